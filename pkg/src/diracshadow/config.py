"""
Declarative experiment files (YAML) and their validation.

``validate`` turns a parsed mapping into a normalised, immutable
:class:`ExperimentSpec` with the grid filled in, or raises
:class:`ConfigError` listing every violated rule by name.  Validating a
normalised spec again returns an equal spec.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .regularization import make_profile
from .shadow import make_test_function

KINDS = ("sweep", "limit-compare", "evolve", "extfield")
EXPERIMENTS = ("pairing", "divergence", "weak_zero")
LAWS = ("sqrt_delta", "delta")
FIELD_TYPES = ("free_check", "gaussian_pulse", "log_coulomb")

DOMAIN_MARGIN = 0.25
POINTS_PER_EPS_1D = 8


@dataclass(frozen=True)
class ConfigIssue:
    rule: str
    message: str

    def __str__(self):
        return f"{self.rule}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, issues: list[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))

    @property
    def rules(self) -> list[str]:
        return [i.rule for i in self.issues]


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    dimension: int
    experiment: str = "pairing"
    profile: dict = field(default_factory=dict)
    law: str = "sqrt_delta"
    mass: float = 1.0
    times: tuple = (1.0,)
    epsilons: tuple = ()
    test_functions: tuple = ()
    grid: dict = field(default_factory=dict)
    external_field: dict | None = None
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["times"] = list(self.times)
        d["epsilons"] = list(self.epsilons)
        d["test_functions"] = [dict(t) for t in self.test_functions]
        return d

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # builders -----------------------------------------------------------
    def build_profile(self):
        params = {k: v for k, v in self.profile.items() if k != "name"}
        if "coeffs" in params:
            params["coeffs"] = [complex(re, im) for re, im in params["coeffs"]]
        return make_profile(self.profile["name"], self.dimension, **params)

    def build_test_functions(self):
        return [make_test_function(t["name"], self.dimension,
                                   **{k: v for k, v in t.items() if k != "name"})
                for t in self.test_functions]

    def build_grid(self):
        from .propagator1d import Grid1D
        from .propagator3d import Grid3D
        cls = Grid1D if self.dimension == 1 else Grid3D
        return cls(float(self.grid["L"]), int(self.grid["N"]))


DEFAULT_TOLERANCES = {
    "sweep": {"rel_error": 0.05},
    "limit-compare": {"abs_coefficient": 0.02, "oracle_rel": 0.005},
    "evolve": {"unitarity": 1e-10},
    "extfield": {"norm_drift": 1e-8, "order": 2.0, "order_tol": 0.2, "growth": 1.0, "growth_tol": 0.1},
}


def load_spec(path: str | Path) -> ExperimentSpec:
    """Parse and validate an experiment file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError([ConfigIssue("yaml_invalid", str(exc))]) from exc
    if not isinstance(raw, Mapping):
        raise ConfigError([ConfigIssue("yaml_invalid", "top level must be a mapping")])
    return validate(raw)


def _coeff_pair(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return [float(v[0]), float(v[1])]
    c = complex(str(v).replace(" ", "")) if isinstance(v, str) else complex(v)
    return [c.real, c.imag]


def _canonical(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _canonical(value[k]) for k in sorted(value)}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _next_pow2(n: float) -> int:
    return 1 << max(3, math.ceil(math.log2(max(n, 1.0))))


def _round_up(x: float, step: float) -> float:
    return step * math.ceil(x / step - 1e-12)


def validate(raw: Mapping[str, Any] | ExperimentSpec) -> ExperimentSpec:
    """Check every field and cross-field rule; return the normalised spec."""
    if isinstance(raw, ExperimentSpec):
        raw = raw.to_dict()
    raw = dict(raw)
    issues: list[ConfigIssue] = []
    add = lambda rule, msg: issues.append(ConfigIssue(rule, msg))

    kind = raw.get("kind", "sweep")
    if kind not in KINDS:
        add("kind_invalid", f"kind must be one of {KINDS}, got {kind!r}")
        raise ConfigError(issues)
    dim = raw.get("dimension")
    if dim not in (1, 3):
        add("dimension_invalid", f"dimension must be 1 or 3, got {dim!r}")
        raise ConfigError(issues)
    experiment = raw.get("experiment", "pairing")
    if experiment not in EXPERIMENTS:
        add("experiment_invalid", f"experiment must be one of {EXPERIMENTS}")

    # profile
    prof_raw = raw.get("profile")
    profile = None
    prof_norm: dict = {}
    if not isinstance(prof_raw, Mapping) or "name" not in prof_raw:
        add("profile_missing", "profile must be a mapping with a name")
    else:
        prof_norm = dict(prof_raw)
        if "coeffs" in prof_norm:
            try:
                prof_norm["coeffs"] = [_coeff_pair(c) for c in prof_norm["coeffs"]]
            except (TypeError, ValueError):
                add("profile_invalid", "coefficients must be numbers, complex strings or [re, im] pairs")
        prof_norm = _canonical(prof_norm)
        try:
            params = {k: v for k, v in prof_norm.items() if k != "name"}
            if "coeffs" in params:
                params["coeffs"] = [complex(a, b) for a, b in params["coeffs"]]
            profile = make_profile(prof_norm["name"], dim, **params)
        except KeyError as exc:
            add("profile_unknown", str(exc))
        except (TypeError, ValueError) as exc:
            add("profile_invalid", str(exc))

    law = raw.get("law", "sqrt_delta")
    if law not in LAWS:
        add("law_invalid", f"law must be one of {LAWS}")

    mass = raw.get("mass", 1.0)
    try:
        mass = float(mass)
        if mass < 0 or not math.isfinite(mass):
            add("mass_negative", "mass must be finite and non-negative")
    except (TypeError, ValueError):
        add("mass_negative", "mass must be a number")
        mass = 1.0

    times_raw = raw.get("times", [1.0])
    try:
        times = tuple(float(t) for t in (times_raw if isinstance(times_raw, (list, tuple)) else [times_raw]))
        if not times or any(t < 0 or not math.isfinite(t) for t in times):
            raise ValueError
    except (TypeError, ValueError):
        add("times_invalid", "times must be a non-empty list of non-negative numbers")
        times = (1.0,)

    eps_raw = raw.get("epsilons", [])
    try:
        epsilons = tuple(float(e) for e in eps_raw)
    except (TypeError, ValueError):
        add("epsilon_not_positive", "epsilons must be numbers")
        epsilons = ()
    needs_eps = kind != "extfield"
    if needs_eps and not epsilons:
        add("epsilon_missing", "an epsilon list is required")
    if any(e <= 0 for e in epsilons):
        add("epsilon_not_positive", "all epsilons must be positive")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        add("epsilon_not_decreasing", "epsilons must be strictly decreasing")
    if kind == "sweep" and epsilons:
        need = 4 if experiment == "pairing" and dim == 1 else 3 if experiment != "pairing" else 1
        if len(epsilons) < need:
            add("too_few_epsilons", f"a {experiment} sweep needs at least {need} epsilons")

    # test functions
    tf_raw = raw.get("test_functions")
    if tf_raw is None and "test_function" in raw:
        tf_raw = [raw["test_function"]]
    tf_norm = []
    tests = []
    if kind != "extfield":
        if not tf_raw:
            add("test_function_missing", "at least one test function is required")
        for t in tf_raw or []:
            if not isinstance(t, Mapping) or "name" not in t:
                add("test_function_invalid", "test functions need a name")
                continue
            tn = _canonical(dict(t))
            try:
                tests.append(make_test_function(tn["name"], dim, **{k: v for k, v in tn.items() if k != "name"}))
                tf_norm.append(tn)
            except KeyError as exc:
                add("test_function_unknown", str(exc))
            except (TypeError, ValueError) as exc:
                add("test_function_invalid", str(exc))

    if kind == "limit-compare" and dim == 1:
        if len(tests) < 2:
            add("limit_compare_needs_two_test_functions",
                "separating c_plus from c_minus needs two test functions")
        elif len(epsilons) < 2:
            add("too_few_epsilons", "the extrapolated limit needs at least two epsilons")
        else:
            for t in times:
                A = np.array([[h.at(t), h.at(-t)] for h in tests])
                if np.linalg.matrix_rank(A) < 2:
                    add("test_functions_degenerate", f"test functions cannot separate h({t:g}) from h({-t:g})")

    if experiment == "divergence" and kind == "sweep":
        if law != "delta":
            add("divergence_law", "the divergence experiment uses the delta scaling law")
        if profile is not None and not profile.compact:
            add("divergence_profile", "the divergence experiment needs a compactly supported profile")

    # external field block
    ext = raw.get("external_field")
    ext_norm = None
    if kind == "extfield":
        ext_norm = _validate_external(ext, dim, add)

    # grid: derive what is missing, then check the resolution and domain rules
    grid_raw = dict(raw.get("grid") or {})
    grid_norm: dict = {}
    if profile is not None and not issues:
        t_max = max(times)
        if kind == "extfield":
            t_max = max(t_max, float(ext_norm.get("T", 0.0)))
        eps_max = max(epsilons) if epsilons else 1.0
        eps_min = min(epsilons) if epsilons else 1.0
        reach = max([_reach(h) for h in tests] + [0.0])
        need_L = max(t_max + profile.decay_radius * eps_max + DOMAIN_MARGIN, reach)
        L = float(grid_raw.get("L", _round_up(need_L, 0.5)))
        if dim == 1:
            N = int(grid_raw.get("N", _next_pow2(2 * L * POINTS_PER_EPS_1D / eps_min)))
        else:
            n_min = 2 * L * profile.nyquist_cutoff / (math.pi * eps_min)
            N = int(grid_raw.get("N", 8 * math.ceil(n_min / 8)))
        grid_norm = {"L": L, "N": N}
        if L <= 0:
            add("grid_invalid", "L must be positive")
        elif dim == 1 and (N < 8 or N & (N - 1)):
            add("grid_invalid", "1D grids need N a power of two >= 8")
        elif dim == 3 and (N < 8 or N % 2):
            add("grid_invalid", "3D grids need an even N >= 8")
        else:
            dx = 2 * L / N
            if dim == 1 and dx > eps_min / POINTS_PER_EPS_1D * (1 + 1e-12):
                add("grid_spacing_too_coarse",
                    f"dx = {dx:.4g} exceeds eps_min/{POINTS_PER_EPS_1D} = {eps_min / POINTS_PER_EPS_1D:.4g}")
            if dim == 3 and math.pi / dx * eps_min < profile.nyquist_cutoff * (1 - 1e-12):
                add("grid_spacing_too_coarse",
                    f"k_max * eps_min = {math.pi / dx * eps_min:.4g} below the profile cutoff "
                    f"{profile.nyquist_cutoff:.4g}")
            if L < t_max + profile.decay_radius * eps_max + DOMAIN_MARGIN - 1e-12:
                add("domain_too_small",
                    f"L = {L:g} < t_max + decay_radius * eps_max + margin = {need_L:.4g}")
            for h in tests:
                if _reach(h) > L + 1e-12:
                    add("test_function_outside_domain",
                        f"{h.name} support reaches {_reach(h):.4g} > L = {L:g}")

    if issues:
        raise ConfigError(issues)

    tol = dict(DEFAULT_TOLERANCES[kind])
    tol.update(raw.get("tolerances") or {})
    output = dict(raw.get("output") or {})
    output.setdefault("prefix", kind.replace("-", "_"))
    return ExperimentSpec(
        kind=kind,
        dimension=dim,
        experiment=experiment,
        profile=prof_norm,
        law=law,
        mass=mass,
        times=times,
        epsilons=epsilons,
        test_functions=tuple(tf_norm),
        grid=grid_norm,
        external_field=ext_norm,
        tolerances=_canonical(tol),
        output=_canonical(output),
        seed=int(raw.get("seed", 0)),
    )


def _reach(h) -> float:
    if h.radius is None:
        return 0.0
    return float(np.max(np.abs(np.atleast_1d(h.center))) + h.radius)


def _validate_external(ext, dim, add) -> dict:
    if not isinstance(ext, Mapping):
        add("external_field_invalid", "extfield runs need an external_field mapping")
        return {}
    ext = _canonical(dict(ext))
    ftype = ext.get("type")
    if ftype not in FIELD_TYPES:
        add("external_field_invalid", f"external_field.type must be one of {FIELD_TYPES}")
        return ext
    T = ext.get("T", 1.0)
    if not isinstance(T, (int, float)) or T <= 0:
        add("external_field_invalid", "T must be positive")
        return ext
    dts = ext.get("dts", [])
    if ftype in ("free_check", "gaussian_pulse"):
        if len(dts) < 3:
            add("external_field_invalid", "a refinement study needs at least three dts")
        if any(b >= a for a, b in zip(dts, dts[1:])):
            add("dt_not_decreasing", "dts must be strictly decreasing")
        for dt in dts:
            n = T / dt if dt > 0 else 0
            if dt <= 0 or abs(n - round(n)) > 1e-9:
                add("external_field_invalid", f"dt = {dt} does not divide T = {T}")
    if ftype == "log_coulomb":
        eps = ext.get("epsilons", [])
        if len(eps) < 3 or any(not 0 < e < 1 for e in eps):
            add("log_coulomb_eps_range", "log_coulomb needs at least three epsilons in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            add("epsilon_not_decreasing", "log_coulomb epsilons must be strictly decreasing")
    steps = ext.get("norm_steps", 100)
    if not isinstance(steps, int) or steps < 1:
        add("external_field_invalid", "norm_steps must be a positive integer")
    ext.setdefault("T", T)
    ext.setdefault("norm_steps", steps)
    return _canonical(ext)
