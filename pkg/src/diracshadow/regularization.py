"""
Mother profiles and their epsilon-scaled families.

Fourier convention (used throughout the package)::

    f_hat(k) = (2 pi)^(-d/2) * integral f(x) exp(-i k.x) dx

Two scaling laws are supported for a profile ``phi`` on R^d:

* ``SQRT_DELTA``: ``phi_eps(x) = eps^(-d/2) phi(x/eps)``, so ``|phi_eps|^2 -> delta``
* ``DELTA``:      ``phi_eps(x) = eps^(-d) phi(x/eps)``,   so ``|phi_eps| -> ||phi||_1 delta``
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre


class ScalingLaw(str, Enum):
    SQRT_DELTA = "sqrt_delta"
    DELTA = "delta"


@dataclass(frozen=True)
class MotherProfile:
    """A spinor-valued Schwartz (or compactly supported) profile.

    ``value(x)`` takes points of shape ``(..., dim)`` (or ``(...)`` when
    ``dim == 1``) and returns components of shape ``(..., ncomp)``;
    ``fourier(k)`` does the same on the Fourier side.
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    fourier: Callable[[np.ndarray], np.ndarray]
    decay_radius: float
    fourier_radius: float
    compact: bool = False
    params: dict = field(default_factory=dict)
    # |k| eps beyond which phi_eps_hat is negligible on a 3D grid
    nyquist_cutoff: float = 3.5

    @property
    def ncomp(self) -> int:
        return 2 if self.dim == 1 else 4


def _norm_coeffs(coeffs, ncomp):
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (ncomp,):
        raise ValueError(f"expected {ncomp} component coefficients, got shape {c.shape}")
    n = np.linalg.norm(c)
    if n == 0:
        raise ValueError("coefficients must not all vanish")
    return c / n


def _radius(x, dim):
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return np.abs(x), x
    return np.sqrt(np.sum(x * x, axis=-1)), x


def gaussian_profile(dim: int, coeffs: Sequence[complex] | None = None,
                     momentum: Sequence[float] | float | None = None,
                     name: str = "gaussian") -> MotherProfile:
    """Unit-L2 Gaussian ``pi^(-d/4) exp(-|x|^2/2)`` times a fixed spinor.

    ``momentum`` applies a carrier ``exp(i k0.x)``, shifting the transform to
    ``k0``.
    """
    ncomp = 2 if dim == 1 else 4
    if coeffs is None:
        coeffs = np.eye(ncomp)[0]
    c = _norm_coeffs(coeffs, ncomp)
    if momentum is None:
        k0 = 0.0 if dim == 1 else np.zeros(3)
    else:
        k0 = np.asarray(momentum, dtype=float)
        if dim == 3 and k0.shape != (3,):
            raise ValueError("3D momentum must be a 3-vector")
    pref = np.pi ** (-dim / 4)

    def value(x):
        r, x = _radius(x, dim)
        phase = np.exp(1j * (x * k0 if dim == 1 else x @ k0))
        return (pref * np.exp(-0.5 * r * r) * phase)[..., None] * c

    def fourier(k):
        k = np.asarray(k, dtype=float)
        q = k - k0
        r2 = q * q if dim == 1 else np.sum(q * q, axis=-1)
        return (pref * np.exp(-0.5 * r2))[..., None] * c

    kmag = float(np.linalg.norm(np.atleast_1d(k0)))
    return MotherProfile(name, dim, value, fourier, decay_radius=7.5,
                         fourier_radius=7.5 + kmag,
                         params={"coeffs": c, "momentum": k0},
                         nyquist_cutoff=3.5 + kmag)


def aligned_pair(sign: int = 1) -> MotherProfile:
    """1D profile with ``rho_1 = sign * rho_2 = g / sqrt2``."""
    return gaussian_profile(1, [1.0, float(sign)], name="aligned_pair")


def orthogonal_pair() -> MotherProfile:
    """1D profile with ``rho_2 = i rho_1``, so ``Re(conj(rho_1) rho_2) = 0``."""
    return gaussian_profile(1, [1.0, 1j], name="orthogonal_pair")


def rotated_pair(angle: float) -> MotherProfile:
    """1D profile ``(cos a, sin a) g``."""
    return gaussian_profile(1, [np.cos(angle), np.sin(angle)], name="rotated_pair")


def _bump(r):
    out = np.zeros_like(r, dtype=float)
    inside = r < 1.0
    ri = r[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ri * ri))
    return out


_GL_X, _GL_W = roots_legendre(400)


def _radial_integral(f, upper=1.0):
    """Gauss-Legendre quadrature of ``f`` over ``[0, upper]``."""
    r = 0.5 * upper * (_GL_X + 1.0)
    return 0.5 * upper * np.sum(_GL_W * f(r))


def bump_profile(dim: int, coeffs: Sequence[complex] | None = None,
                 radius: float = 1.0) -> MotherProfile:
    """Compactly supported smooth bump ``exp(1 - 1/(1 - (|x|/R)^2))``, unit L2.

    The transform has no closed form; it is evaluated by Gauss-Legendre
    quadrature of the (radial) Fourier integral.
    """
    ncomp = 2 if dim == 1 else 4
    if coeffs is None:
        coeffs = np.eye(ncomp)[0]
    c = _norm_coeffs(coeffs, ncomp)
    R = float(radius)
    if dim == 1:
        mass = 2 * R * _radial_integral(lambda s: _bump(s) ** 2)
    else:
        mass = 4 * np.pi * R ** 3 * _radial_integral(lambda s: s * s * _bump(s) ** 2)
    amp = 1.0 / np.sqrt(mass)

    def value(x):
        r, _ = _radius(x, dim)
        return (amp * _bump(r / R))[..., None] * c

    s = 0.5 * (_GL_X + 1.0)
    w = 0.5 * _GL_W * amp * _bump(s)

    def fourier(k):
        k = np.asarray(k, dtype=float)
        if dim == 1:
            # even profile: (2pi)^(-1/2) * 2 R int_0^1 b(s) cos(k R s) ds
            kr = np.multiply.outer(np.abs(k) * R, s)
            val = (2 * R / np.sqrt(2 * np.pi)) * np.cos(kr) @ w
        else:
            kr = np.multiply.outer(np.sqrt(np.sum(k * k, axis=-1)) * R, s)
            # (2pi)^(-3/2) 4 pi R^3 int_0^1 s^2 b(s) sinc(kRs) ds
            val = (4 * np.pi * R ** 3 / (2 * np.pi) ** 1.5) * (np.sinc(kr / np.pi) * s * s) @ w
        return val[..., None] * c

    return MotherProfile("bump", dim, value, fourier, decay_radius=R,
                         fourier_radius=80.0 / R, compact=True,
                         params={"coeffs": c, "radius": R},
                         nyquist_cutoff=8.0 / R)


PROFILES = {
    "gaussian": gaussian_profile,
    "bump": bump_profile,
}


def make_profile(name: str, dim: int, **params) -> MotherProfile:
    """Look up a built-in profile by config name."""
    if name == "aligned_pair":
        if dim != 1:
            raise ValueError("aligned_pair is one-dimensional")
        return aligned_pair(params.get("sign", 1))
    if name == "orthogonal_pair":
        if dim != 1:
            raise ValueError("orthogonal_pair is one-dimensional")
        return orthogonal_pair()
    if name == "rotated_pair":
        if dim != 1:
            raise ValueError("rotated_pair is one-dimensional")
        return rotated_pair(float(params["angle"]))
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}")
    return PROFILES[name](dim, **params)


@dataclass(frozen=True)
class RegularizationFamily:
    profile: MotherProfile
    law: ScalingLaw
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "law", ScalingLaw(self.law))

    @property
    def dim(self) -> int:
        return self.profile.dim

    @property
    def amplitude(self) -> float:
        d = self.profile.dim
        p = d / 2 if self.law is ScalingLaw.SQRT_DELTA else d
        return self.epsilon ** (-p)

    def evaluate(self, x) -> np.ndarray:
        """Spinor values ``phi_eps(x)``."""
        x = np.asarray(x, dtype=float)
        return self.amplitude * self.profile.value(x / self.epsilon)

    def fourier(self, k) -> np.ndarray:
        """``phi_eps_hat(k) = amplitude * eps^d * phi_hat(eps k)``."""
        k = np.asarray(k, dtype=float)
        scale = self.amplitude * self.epsilon ** self.profile.dim
        return scale * self.profile.fourier(self.epsilon * k)

    @property
    def norm_squared(self) -> float:
        """Analytic ``||phi_eps||^2`` for a unit-L2 profile."""
        if self.law is ScalingLaw.SQRT_DELTA:
            return 1.0
        return self.epsilon ** (-self.profile.dim)

    @property
    def support_radius(self) -> float:
        return self.profile.decay_radius * self.epsilon

    def with_epsilon(self, epsilon: float) -> "RegularizationFamily":
        return RegularizationFamily(self.profile, self.law, epsilon)


def geometric_epsilons(eps0: float, count: int, ratio: float = 0.5) -> list[float]:
    """Default decreasing grid ``eps0 * ratio^j``."""
    return [eps0 * ratio ** j for j in range(count)]


@dataclass(frozen=True)
class WeakDeltaRow:
    epsilon: float
    value: float
    limit: float
    abs_error: float
    resolved: bool


def weak_delta_check(family: RegularizationFamily, h: Callable[[np.ndarray], np.ndarray],
                     epsilons: Sequence[float], power: int = 2,
                     points_per_eps: int = 16) -> list[WeakDeltaRow]:
    """Tabulate ``<|phi_eps|^power, h>`` against its ``eps -> 0`` limit.

    ``power=2`` with ``SQRT_DELTA`` tends to ``h(0)``; ``power=1`` with
    ``DELTA`` tends to ``||phi||_1 h(0)``.  Quadrature is done in scaled
    coordinates ``x = eps y`` (trapezoid on a uniform grid over the profile's
    decay box), which is exact to roundoff for the smooth profiles here.
    ``resolved`` is False when halving the quadrature grid moves the value
    by more than 1e-8 relative.
    """
    prof = family.profile
    d = prof.dim
    h0 = float(np.real(np.asarray(h(np.zeros(d) if d > 1 else np.array(0.0)))))
    R = prof.decay_radius
    n = max(2 * int(np.ceil(R * points_per_eps)), 16)
    if d == 3:
        n = min(n, 96)
    rows = []

    def _quad(eps, npts):
        y = np.linspace(-R, R, npts + 1)
        dy = y[1] - y[0]
        if d == 1:
            pts = y
            wts = np.full(y.shape, dy)
            wts[[0, -1]] *= 0.5
        else:
            g = np.stack(np.meshgrid(y, y, y, indexing="ij"), axis=-1)
            pts = g
            w1 = np.full(y.shape, dy)
            w1[[0, -1]] *= 0.5
            wts = w1[:, None, None] * w1[None, :, None] * w1[None, None, :]
        fam = family.with_epsilon(eps)
        vals = np.sum(np.abs(fam.evaluate(eps * pts)) ** 2, axis=-1)
        dens = vals if power == 2 else np.sqrt(vals)
        jac = eps ** d
        return float(np.sum(wts * dens * np.real(h(eps * pts))) * jac)

    if (power, family.law) == (2, ScalingLaw.SQRT_DELTA):
        limit = h0
    elif (power, family.law) == (1, ScalingLaw.DELTA):
        limit = h0 * _profile_l1(prof)
    else:
        raise ValueError("use power=2 with SQRT_DELTA or power=1 with DELTA")
    for eps in epsilons:
        v = _quad(eps, n)
        v2 = _quad(eps, n // 2)
        resolved = abs(v - v2) <= 1e-8 * max(abs(v), 1.0)
        rows.append(WeakDeltaRow(eps, v, limit, abs(v - limit), resolved))
    return rows


def _profile_l1(prof: MotherProfile) -> float:
    """L1 norm of ``|phi|`` by trapezoid quadrature over the decay box."""
    R = prof.decay_radius
    n = 400 if prof.dim == 1 else 96
    y = np.linspace(-R, R, n + 1)
    if prof.dim == 1:
        return float(integrate.trapezoid(np.linalg.norm(prof.value(y), axis=-1), y))
    g = np.stack(np.meshgrid(y, y, y, indexing="ij"), axis=-1)
    v = np.linalg.norm(prof.value(g), axis=-1)
    return float(integrate.trapezoid(integrate.trapezoid(integrate.trapezoid(v, y), y), y))
