import copy
import numpy as np
import pytest
import yaml

from diracshadow.cli import bundled_specs, resolve_spec
from diracshadow.config import ConfigError, load_spec, validate

BASE = {
    "kind": "sweep",
    "experiment": "pairing",
    "dimension": 1,
    "profile": {"name": "aligned_pair"},
    "law": "sqrt_delta",
    "mass": 1.0,
    "times": [1.0],
    "epsilons": [0.2, 0.1, 0.05, 0.025],
    "test_function": {"name": "bump", "center": 1.0, "radius": 1.0},
}


def _with(**changes):
    raw = copy.deepcopy(BASE)
    for k, v in changes.items():
        if v is None:
            raw.pop(k, None)
        else:
            raw[k] = v
    return raw


def _rules(raw):
    with pytest.raises(ConfigError) as info:
        validate(raw)
    return info.value.rules


def test_epsilons_must_decrease():
    assert "epsilon_not_decreasing" in _rules(_with(epsilons=[0.2, 0.05, 0.1, 0.025]))
    assert "epsilon_not_positive" in _rules(_with(epsilons=[0.2, 0.1, 0.0, -0.1]))
    assert "epsilon_missing" in _rules(_with(epsilons=None))
    assert "too_few_epsilons" in _rules(_with(epsilons=[0.2, 0.1]))


def test_derived_grid_is_echoed():
    spec = validate(BASE)
    L, N = spec.grid["L"], spec.grid["N"]
    # L covers t + decay radius * eps_max + margin and N resolves eps_min with 8 points
    assert L >= 1.0 + 1.0 * 0.2 + 0.25
    assert N & (N - 1) == 0 and 2 * L / N <= 0.025 / 8
    assert validate(spec.to_dict()).grid == spec.grid


def test_coarse_grid_is_named():
    rules = _rules(_with(grid={"L": 8.0, "N": 1024}))
    assert rules == ["grid_spacing_too_coarse"]
    raw3 = {"kind": "sweep", "dimension": 3, "profile": {"name": "gaussian", "coeffs": [1, 0, 0, 0]},
            "epsilons": [0.1], "test_function": {"name": "bump", "center": [0.4, 0, 0], "radius": 1.0},
            "grid": {"L": 2.0, "N": 16}}
    assert "grid_spacing_too_coarse" in _rules(raw3)


def test_domain_rules():
    assert "domain_too_small" in _rules(_with(grid={"L": 1.0, "N": 1024}))
    assert "test_function_outside_domain" in _rules(
        _with(test_function={"name": "bump", "center": 5.0, "radius": 1.0}, grid={"L": 4.0, "N": 4096}))
    assert "grid_invalid" in _rules(_with(grid={"L": 8.0, "N": 5000}))


def test_validation_is_idempotent_and_hash_stable():
    spec = validate(BASE)
    again = validate(spec)
    assert again == spec
    assert again.spec_hash() == spec.spec_hash()
    assert validate(_with(mass=2.0)).spec_hash() != spec.spec_hash()


def test_complex_coefficient_forms_agree():
    forms = [[1, "0.5j"], [1, [0.0, 0.5]], ["1+0j", 0.5j]]
    specs = [validate(_with(profile={"name": "gaussian", "coeffs": c})) for c in forms]
    assert all(s.profile["coeffs"] == [[1.0, 0.0], [0.0, 0.5]] for s in specs)
    assert len({s.spec_hash() for s in specs}) == 1
    v = specs[0].build_profile().value(np.array([0.0]))[0]
    assert v[1] / v[0] == pytest.approx(0.5j)


def test_unknown_names():
    assert _rules(_with(profile={"name": "lorentzian"})) == ["profile_unknown"]
    assert "profile_missing" in _rules(_with(profile=None))
    assert "test_function_unknown" in _rules(_with(test_function={"name": "sinc"}))
    assert "law_invalid" in _rules(_with(law="cube_root"))
    assert "mass_negative" in _rules(_with(mass=-1))
    assert "kind_invalid" in _rules(_with(kind="plot"))
    assert "dimension_invalid" in _rules(_with(dimension=2))


def test_several_rules_reported_together():
    err_rules = _rules(_with(epsilons=[0.1, 0.2, 0.05, 0.025], law="cube_root", mass=-2))
    assert {"epsilon_not_decreasing", "law_invalid", "mass_negative"} <= set(err_rules)
    with pytest.raises(ConfigError) as info:
        validate(_with(law="cube_root", mass=-2))
    assert "law_invalid" in str(info.value) and "mass_negative" in str(info.value)


def test_limit_compare_rules():
    raw = _with(kind="limit-compare", profile={"name": "rotated_pair", "angle": 0.5})
    assert "limit_compare_needs_two_test_functions" in _rules(raw)
    raw["test_functions"] = [{"name": "bump", "center": 1.0, "radius": 1.0},
                             {"name": "bump", "center": 1.0, "radius": 1.0}]
    assert "test_functions_degenerate" in _rules(raw)


def test_divergence_rules():
    raw = _with(experiment="divergence", epsilons=[0.2, 0.1, 0.05])
    assert set(_rules(raw)) >= {"divergence_law", "divergence_profile"}


def _extfield(**ext):
    base = {"type": "gaussian_pulse", "amplitude": 1.0, "width": 1.0, "T": 1.0, "dts": [0.1, 0.05, 0.025]}
    base.update(ext)
    return {"kind": "extfield", "dimension": 1, "profile": {"name": "gaussian", "coeffs": [1, 0]},
            "epsilons": [1.0], "grid": {"L": 10.0, "N": 512}, "external_field": base}


def test_external_field_rules():
    assert validate(_extfield()).external_field["norm_steps"] == 100
    assert "external_field_invalid" in _rules(_extfield(type="laser"))
    assert "dt_not_decreasing" in _rules(_extfield(dts=[0.05, 0.1, 0.025]))
    assert "external_field_invalid" in _rules(_extfield(dts=[0.3, 0.2, 0.1]))
    assert "log_coulomb_eps_range" in _rules(_extfield(type="log_coulomb", epsilons=[0.1, 1.5, 1e-3]))
    raw = _extfield()
    raw.pop("external_field")
    assert "external_field_invalid" in _rules(raw)


@pytest.mark.parametrize("name", bundled_specs())
def test_bundled_specs_validate(name):
    spec = load_spec(resolve_spec(name))
    assert spec.output["prefix"] == name


def test_yaml_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: [sweep\n")
    with pytest.raises(ConfigError) as info:
        load_spec(bad)
    assert info.value.rules == ["yaml_invalid"]
    bad.write_text(yaml.safe_dump([1, 2]))
    with pytest.raises(ConfigError):
        load_spec(bad)
