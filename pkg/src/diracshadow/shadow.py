"""
Distributional pairings of the probability density with test functions,
epsilon sweeps and the closed-form eps -> 0 limits.

Position-space pairings come from evolved grid fields.  The closed forms and
the one-dimensional Fourier-side double integral are computed independently
of the propagators, so the two routes check each other.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from . import propagator1d as p1
from . import propagator3d as p3
from .algebra import dispersion, eigenbasis_1d, eigenbasis_3d, limit_eigenbasis_3d
from .regularization import MotherProfile, RegularizationFamily


# ---------------------------------------------------------------- test functions

@dataclass(frozen=True)
class TestFunction:
    """Real test function on R^dim.

    ``radius`` is the support radius about ``center`` (``None`` for functions
    that are not localised, e.g. the constant 1).  Gaussians report the
    radius beyond which they are below 1e-16.
    """

    __test__ = False  # not a pytest class

    name: str
    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    center: np.ndarray
    radius: float | None
    inverse_fourier: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return self.func(np.asarray(x, dtype=float))

    def at(self, x) -> float:
        return float(self(np.asarray(x, dtype=float)))


def _offset(x, center, dim):
    return np.abs(x - center) if dim == 1 else np.sqrt(np.sum((x - center) ** 2, axis=-1))


def _smooth_bump(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; equals 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def _center(center, dim):
    if dim == 1:
        return 0.0 if center is None else float(center)
    c = np.asarray(center if center is not None else 0.0, dtype=float)
    if c.ndim == 0 and c == 0:
        c = np.zeros(3)
    if c.shape != (3,):
        raise ValueError("3D centre must be a 3-vector")
    return c


def bump_test_function(dim: int, center=0.0, radius: float = 1.0) -> TestFunction:
    """Smooth compactly supported bump with value 1 at ``center``."""
    c = _center(center, dim)
    R = float(radius)
    f = lambda x: _smooth_bump(_offset(x, c, dim) / R)
    inv = _bump_inverse_fourier(c, R) if dim == 1 else None
    return TestFunction("bump", dim, f, c, R, inv, {"center": c, "radius": R})


def gaussian_test_function(dim: int, center=0.0, width: float = 0.5) -> TestFunction:
    """``exp(-|x - c|^2 / (2 w^2))``; its inverse transform is closed form in 1D."""
    c = _center(center, dim)
    w = float(width)
    f = lambda x: np.exp(-0.5 * (_offset(x, c, dim) / w) ** 2)
    inv = None
    if dim == 1:
        # (2pi)^(-1/2) int h(x) e^{i xi x} dx
        inv = lambda xi: w * np.exp(-0.5 * (w * np.asarray(xi)) ** 2 + 1j * np.asarray(xi) * c)
    return TestFunction("gaussian", dim, f, c, 7.5 * w, inv, {"center": c, "width": w})


def plateau_test_function(dim: int, inner: float, outer: float, center=None) -> TestFunction:
    """Equal to 1 on ``|x - c| <= inner``, smooth and decreasing to 0 at ``outer``."""
    if not 0 <= inner < outer:
        raise ValueError("need 0 <= inner < outer")
    c = _center(center, dim)

    def step(s):
        s = np.clip(s, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
            b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
        return a / (a + b)

    f = lambda x: step((outer - _offset(x, c, dim)) / (outer - inner))
    return TestFunction("plateau", dim, f, c, float(outer), None,
                        {"inner": inner, "outer": outer, "center": c})


def constant_test_function(dim: int, value: float = 1.0) -> TestFunction:
    c = _center(0.0, dim)
    f = lambda x: np.full(np.shape(x) if dim == 1 else np.shape(x)[:-1], float(value))
    return TestFunction("constant", dim, f, c, None, None, {"value": value})


def _bump_inverse_fourier(center, R, nodes=600):
    x, w = roots_legendre(nodes)
    hx = _smooth_bump(x)

    def inv(xi):
        xi = np.asarray(xi, dtype=float)
        # (2pi)^(-1/2) int h(x) e^{i xi x} dx, substituting x = c + R s
        integ = (np.cos(np.multiply.outer(xi * R, x)) * hx) @ w
        return R * integ * np.exp(1j * xi * center) / np.sqrt(2 * np.pi)

    return inv


TEST_FUNCTIONS = {
    "bump": bump_test_function,
    "gaussian": gaussian_test_function,
    "plateau": plateau_test_function,
    "constant": constant_test_function,
}


def make_test_function(name: str, dim: int, **params) -> TestFunction:
    if name not in TEST_FUNCTIONS:
        raise KeyError(f"unknown test function {name!r}")
    return TEST_FUNCTIONS[name](dim, **params)


# ---------------------------------------------------------------- pairings

@dataclass(frozen=True)
class PairingResult:
    epsilon: float | None
    t: float
    value: float
    error_estimate: float


def _check_inside(grid_L: float, h: TestFunction):
    if h.radius is None:
        return
    reach = np.max(np.abs(np.atleast_1d(h.center))) + h.radius
    if reach > grid_L:
        raise ValueError(f"test function support reaches {reach:.3g}, beyond the box half-width {grid_L:.3g}")


def grid_points(grid) -> np.ndarray:
    return grid.x if isinstance(grid, p1.Grid1D) else grid.points()


def _points(field_):
    return grid_points(field_.grid)


def _cell(field_):
    return field_.grid.dx if isinstance(field_, p1.SpinorField1D) else field_.grid.cell


def pairing(field_, h: TestFunction, epsilon: float | None = None) -> PairingResult:
    """``int |psi(t,x)|^2 h(x) dx`` by the periodic trapezoid rule.

    The error estimate is the change when every other grid point is dropped.
    """
    _check_inside(field_.grid.L, h)
    rho = np.sum(np.abs(field_.values) ** 2, axis=-1)
    hv = np.real(h(_points(field_)))
    w = rho * hv
    value = float(np.sum(w) * _cell(field_))
    if w.ndim == 1:
        coarse = np.sum(w[::2]) * 2 * _cell(field_)
    else:
        coarse = np.sum(w[::2, ::2, ::2]) * 8 * _cell(field_)
    return PairingResult(epsilon, field_.t, value, float(abs(value - coarse)))


def weak_pairing(field_, h: TestFunction) -> float:
    """Euclidean norm of the spinor ``int psi(t,x) h(x) dx``."""
    _check_inside(field_.grid.L, h)
    hv = np.real(h(_points(field_)))
    vec = np.tensordot(hv, field_.values, axes=(tuple(range(hv.ndim)), tuple(range(hv.ndim))))
    return float(np.linalg.norm(vec) * _cell(field_))


def evolve(field_, t: float, m: float, check_decay: bool = True):
    if isinstance(field_, p1.SpinorField1D):
        return p1.evolve_1d(field_, t, m, check_decay=check_decay)
    return p3.evolve_3d_spectral(field_, t, m, check_decay=check_decay)


def sample(family: RegularizationFamily, grid):
    if isinstance(grid, p1.Grid1D):
        return p1.sample(family, grid)
    return p3.sample(family, grid)


def evolved_pairing(family: RegularizationFamily, grid, t: float, m: float,
                    h: TestFunction) -> PairingResult:
    """Sample ``phi_eps`` on ``grid``, evolve to ``t`` and pair the density with ``h``."""
    f = evolve(sample(family, grid), t, m)
    return pairing(f, h, family.epsilon)


# ---------------------------------------------------------------- closed forms

@dataclass(frozen=True)
class ClosedFormLimit1D:
    c_plus: float
    c_minus: float
    overlap: float  # Re int conj(rho_1) rho_2

    @classmethod
    def from_profile(cls, profile: MotherProfile, points: int = 4001) -> "ClosedFormLimit1D":
        if profile.dim != 1:
            raise ValueError("one-dimensional profile required")
        R = profile.decay_radius
        x = np.linspace(-R, R, points)
        v = profile.value(x)
        integrand = np.real(np.conj(v[:, 0]) * v[:, 1])
        overlap = float(integrate.trapezoid(integrand, x))
        return cls(0.5 + overlap, 0.5 - overlap, overlap)

    def __call__(self, t: float, h: TestFunction) -> float:
        return self.c_plus * h.at(t) + self.c_minus * h.at(-t)


def limit_1d(profile: MotherProfile, t: float, h: TestFunction) -> float:
    """``c_+ h(t) + c_- h(-t)`` with ``c_+- = 1/2 +- Re int conj(rho_1) rho_2``."""
    return ClosedFormLimit1D.from_profile(profile)(t, h)


def sphere_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^2: n Gauss-Legendre nodes in cos(theta) times 2n azimuths.

    Exact for spherical harmonics of degree < 2n; 2n^2 nodes.
    """
    z, wz = roots_legendre(n)
    phi = np.pi * np.arange(2 * n) / n
    s = np.sqrt(1.0 - z * z)
    pts = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)),
                    np.outer(z, np.ones_like(phi))], axis=-1).reshape(-1, 3)
    wts = np.outer(wz, np.full(phi.shape, np.pi / n)).reshape(-1)
    return pts, wts


def energy_weights(profile: MotherProfile, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Limit weights ``f_pos(eta), f_neg(eta)``: squared overlaps of ``phi_hat(eta)``
    with the homogeneous limit of the omega basis (a_+- = 1/sqrt2)."""
    basis = limit_eigenbasis_3d(eta)
    ph = profile.fourier(eta)
    ov = lambda w: np.abs(np.sum(w.conj() * ph, axis=-1)) ** 2
    f_pos = ov(basis.omega_pos_plus) + ov(basis.omega_pos_minus)
    f_neg = ov(basis.omega_neg_plus) + ov(basis.omega_neg_minus)
    return f_pos, f_neg


def sphere_density(profile: MotherProfile, theta: np.ndarray, radial_nodes: int) -> np.ndarray:
    """``f(theta) = int_0^R r^2 (f_pos(r theta) + f_neg(-r theta)) dr`` by Gauss-Legendre.

    Positive-energy momenta ``r theta`` propagate towards ``+theta``,
    negative-energy ones towards ``-theta``.
    """
    R = profile.fourier_radius
    x, w = roots_legendre(radial_nodes)
    r = 0.5 * R * (x + 1.0)
    wr = 0.5 * R * w * r * r
    eta = r[None, :, None] * theta[:, None, :]  # (ndir, nr, 3)
    f_pos, _ = energy_weights(profile, eta)
    _, f_neg = energy_weights(profile, -eta)
    return (f_pos + f_neg) @ wr


@dataclass(frozen=True)
class SphereLimit:
    value: float
    total: float
    f_min: float
    angular_nodes: int
    radial_nodes: int
    converged: bool


def _radial_order(profile, theta, start=32, tol=1e-12, max_nodes=1024):
    n = start
    prev = sphere_density(profile, theta, n)
    while n < max_nodes:
        n *= 2
        cur = sphere_density(profile, theta, n)
        if np.max(np.abs(cur - prev)) <= tol * max(np.max(np.abs(cur)), 1e-300):
            return n, cur, True
        prev = cur
    return n, prev, False


def limit_3d(profile: MotherProfile, t: float, h: TestFunction,
             angular_start: int = 4, angular_tol: float = 1e-4,
             max_angular: int = 128) -> SphereLimit:
    """``int_{S^2} f(theta) h(t theta) d theta`` for the sphere density of the profile.

    The angular order starts at 2*angular_start^2 nodes and doubles until
    the value changes by less than ``angular_tol``.
    """
    if profile.dim != 3:
        raise ValueError("three-dimensional profile required")
    n = angular_start
    results = []
    converged = False
    while n <= max_angular:
        theta, w = sphere_nodes(n)
        nr, f, ok_r = _radial_order(profile, theta)
        value = float(np.sum(w * f * np.real(h(t * theta))))
        total = float(np.sum(w * f))
        results.append((value, total, float(f.min()), theta.shape[0], nr, ok_r))
        if len(results) > 1 and abs(results[-1][0] - results[-2][0]) < angular_tol:
            converged = ok_r
            break
        n *= 2
    value, total, fmin, na, nr, _ = results[-1]
    return SphereLimit(value, total, fmin, na, nr, converged)


# ---------------------------------------------------------------- phase / overlap diagnostics

def phase_gap(eta, xi, eps: float, m: float, dimension: int = 1):
    """``lambda(eta/eps + xi) - lambda(eta/eps)`` computed without cancellation."""
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if dimension == 1:
        if np.any(eta == 0):
            raise ValueError("eta must be nonzero")
        k = eta / eps
        num = xi * (2 * k + xi)
        lam0, lam1 = dispersion(k, m), dispersion(k + xi, m)
    else:
        if np.any(np.all(eta == 0, axis=-1)):
            raise ValueError("eta must be nonzero")
        k = eta / eps
        num = np.sum(xi * (2 * k + xi), axis=-1)
        lam0, lam1 = dispersion(k, m, axis=-1), dispersion(k + xi, m, axis=-1)
    return num / (lam0 + lam1)


def phase_gap_limit(eta, xi, dimension: int = 1):
    """eps -> 0 limit: ``sgn(eta) xi`` in 1D, ``<eta, xi>/|eta|`` in 3D."""
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if dimension == 1:
        return np.sign(eta) * xi
    return np.sum(eta * xi, axis=-1) / np.sqrt(np.sum(eta * eta, axis=-1))


@dataclass(frozen=True)
class Overlaps:
    """``matrix[a, b] = <omega_a(eta/eps + xi) | omega_b(eta/eps)>``, order (pos+, pos-, neg+, neg-)."""

    matrix: np.ndarray

    @property
    def mixed_max(self) -> float:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.max(np.abs(off)))

    @property
    def pos_neg(self) -> complex:
        return complex(self.matrix[0, 2])


def mixed_overlap(eta, xi, eps: float, m: float) -> Overlaps:
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    k = eta / eps
    kp = k + xi
    if not np.any(k) or not np.any(kp):
        raise ValueError("overlaps are undefined at zero wave vector")
    a = eigenbasis_3d(kp, m).stacked()
    b = eigenbasis_3d(k, m).stacked()
    return Overlaps(a.conj() @ b.T)


# ---------------------------------------------------------------- Fourier-side oracle (1D)

@dataclass(frozen=True)
class OracleResult:
    value: float
    imag: float
    bound_ratio: float  # max |integrand| / dominating function over the nodes


def fourier_pairing_1d(profile: MotherProfile, t: float, m: float, eps: float, h: TestFunction,
                       n_eta: int | None = None, n_xi: int | None = None,
                       xi_max: float | None = None, chunk: int = 256) -> OracleResult:
    """``<mu_t^eps, h>`` as the (eta, xi) double integral

        (2pi)^(-1/2) int int F^-1(h)(xi) <a(eta) | a'(eta, xi)> d eta d xi

    where ``a(eta) = sum_s <u_s(eta/eps)|phi_hat(eta)> u_s(eta/eps) e^{-i s t lambda(eta/eps)}``
    and ``a'`` is the same at wavenumber ``eta/eps + xi`` with ``phi_hat(eta + eps xi)``.
    Trapezoid rule on both axes; no propagator or FFT is involved.
    """
    if h.inverse_fourier is None:
        raise ValueError("test function needs an inverse Fourier transform")
    R = profile.fourier_radius
    if xi_max is None:
        # inverse transform of a Gaussian of width w is negligible beyond 9/w;
        # bump transforms decay only like exp(-sqrt(R xi)) so reach further out
        xi_max = 9.0 / h.params["width"] if h.name == "gaussian" else 160.0 / (h.radius or 1.0)
    if n_eta is None:
        d_eta = min(eps / (8.0 * max(t, 0.25)), eps * max(m, 1e-3) / 4.0, 0.02)
        n_eta = 2 * int(math.ceil(R / d_eta)) + 1
    if n_xi is None:
        span = abs(float(np.max(np.abs(np.atleast_1d(h.center))))) + t + 8.0 * eps + 1.0
        d_xi = min(2 * np.pi / (12.0 * span), 0.05)
        n_xi = 2 * int(math.ceil(xi_max / d_xi)) + 1
    eta = np.linspace(-R, R, n_eta)
    xi = np.linspace(-xi_max, xi_max, n_xi)
    w_eta = np.full(n_eta, eta[1] - eta[0])
    w_eta[[0, -1]] *= 0.5
    w_xi = np.full(n_xi, xi[1] - xi[0])
    w_xi[[0, -1]] *= 0.5
    hinv = h.inverse_fourier(xi)

    k = eta / eps
    b0 = eigenbasis_1d(k, m)
    lam0 = dispersion(k, m)
    phi0 = profile.fourier(eta)
    c_pos0 = np.sum(b0.u_pos.conj() * phi0, axis=-1)
    c_neg0 = np.sum(b0.u_neg.conj() * phi0, axis=-1)
    sup_phi = float(np.max(np.linalg.norm(profile.fourier(np.linspace(-R, R, 4001)), axis=-1)))
    dom_eta = np.linalg.norm(phi0, axis=-1)

    total = 0.0 + 0.0j
    ratio = 0.0
    for start in range(0, n_xi, chunk):
        sl = slice(start, start + chunk)
        X = xi[sl][:, None]
        kp = k[None, :] + X
        b1 = eigenbasis_1d(kp, m)
        lam1 = dispersion(kp, m)
        phi1 = profile.fourier(eta[None, :] + eps * X)
        c_pos1 = np.sum(b1.u_pos.conj() * phi1, axis=-1)
        c_neg1 = np.sum(b1.u_neg.conj() * phi1, axis=-1)
        tot = lam0[None, :] + lam1
        # lambda(k + xi) - lambda(k), stable also at eta = 0
        same = np.exp(-1j * t * (X * (2 * k[None, :] + X)) / tot)
        ov = lambda u, v: np.sum(u.conj() * v, axis=-1)
        pp = np.conj(c_pos0)[None, :] * c_pos1 * ov(b0.u_pos[None, :], b1.u_pos) * same
        nn = np.conj(c_neg0)[None, :] * c_neg1 * ov(b0.u_neg[None, :], b1.u_neg) * np.conj(same)
        pn = np.conj(c_pos0)[None, :] * c_neg1 * ov(b0.u_pos[None, :], b1.u_neg) * np.exp(1j * t * tot)
        np_ = np.conj(c_neg0)[None, :] * c_pos1 * ov(b0.u_neg[None, :], b1.u_pos) * np.exp(-1j * t * tot)
        inner = pp + nn + pn + np_
        integrand = hinv[sl][:, None] * inner / np.sqrt(2 * np.pi)
        dom = sup_phi * dom_eta[None, :] * np.abs(hinv[sl])[:, None] / np.sqrt(2 * np.pi)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(dom > 1e-300, np.abs(integrand) / np.where(dom > 1e-300, dom, 1.0), 0.0)
        ratio = max(ratio, float(r.max()))
        total += np.sum(integrand * w_eta[None, :] * w_xi[sl][:, None])
    return OracleResult(float(total.real), float(total.imag), ratio)


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class EpsilonSweep:
    results: list[PairingResult]
    limit: float
    errors: np.ndarray
    slope: float
    monotone: bool
    verdict: str

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([r.epsilon for r in self.results])

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.results])

    @property
    def rel_errors(self) -> np.ndarray:
        return self.errors / abs(self.limit) if self.limit else self.errors


def fit_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def tail_slope(eps: Sequence[float], err: Sequence[float]) -> float:
    """Convergence order from the last ceil(n/2) points (at least two)."""
    n = len(eps)
    q = max(2, math.ceil(n / 2))
    return fit_slope(eps[-q:], err[-q:])


def epsilon_sweep(pairing_at: Callable[[float], PairingResult], epsilons: Sequence[float],
                  limit: float, rel_tol: float = 0.05, threads: int = 1) -> EpsilonSweep:
    """Evaluate ``pairing_at`` over decreasing epsilons and compare with ``limit``.

    Verdict is "converged" when the errors decrease monotonically and the
    last relative error is within ``rel_tol``; otherwise "inconclusive".
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 4:
        raise ValueError("an epsilon sweep needs at least four values")
    if any(b >= a for a, b in zip(eps, eps[1:])) or eps[-1] <= 0:
        raise ValueError("epsilons must be positive and strictly decreasing")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(pairing_at, eps))
    else:
        results = [pairing_at(e) for e in eps]
    errors = np.array([abs(r.value - limit) for r in results])
    monotone = bool(np.all(np.diff(errors) < 0))
    with np.errstate(divide="ignore"):
        slope = tail_slope(eps, np.maximum(errors, 1e-300))
    rel = errors[-1] / abs(limit) if limit else errors[-1]
    verdict = "converged" if monotone and rel <= rel_tol else "inconclusive"
    return EpsilonSweep(results, float(limit), errors, slope, monotone, verdict)


# ---------------------------------------------------------------- divergence / weak zero

@dataclass(frozen=True)
class DivergenceResult:
    epsilons: np.ndarray
    values: np.ndarray
    slope: float


def _dominates(h: TestFunction, family: RegularizationFamily, t: float, grid) -> bool:
    """h == 1 on every grid point of supp(phi_eps) + B_t(0)."""
    pts = grid_points(grid)
    r = np.abs(pts) if pts.ndim == 1 else np.sqrt(np.sum(pts * pts, axis=-1))
    inside = r <= family.support_radius + t
    return bool(np.all(np.abs(np.real(h(pts[inside])) - 1.0) <= 1e-12))


def divergence_check(family: RegularizationFamily, t: float, h: TestFunction,
                     epsilons: Sequence[float], grid_for: Callable[[float], object], m: float = 1.0,
                     threads: int = 1) -> DivergenceResult:
    """Growth exponent of ``<|psi_eps(t)|^2, h>`` in ``1/eps`` for a compact profile.

    ``grid_for(eps)`` supplies the grid for each epsilon.  With h == 1 on
    ``supp(phi_eps) + B_t(0)`` the pairing equals ``||phi_eps||^2`` by finite
    propagation speed, i.e. ``eps^(-d)`` for the DELTA law.
    """
    if not family.profile.compact:
        raise ValueError("divergence check needs a compactly supported profile")

    def one(eps):
        fam = family.with_epsilon(eps)
        grid = grid_for(eps)
        if not _dominates(h, fam, t, grid):
            raise ValueError("test function must equal 1 on supp(phi_eps) + B_t(0)")
        return evolved_pairing(fam, grid, t, m, h).value

    eps = [float(e) for e in epsilons]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(one, eps))
    else:
        vals = [one(e) for e in eps]
    slope = fit_slope(1.0 / np.array(eps), vals)
    return DivergenceResult(np.array(eps), np.array(vals), slope)
