"""
Dirac equations with external fields written as the first-order system

    d_t psi + sum_j alpha^j d_j psi + B psi = 0,    psi(0) = phi

with coefficient matrices built from a potential one-form or a field
two-form, a log-scaled Coulomb potential, and a Strang split-step solver.

In one space dimension the same machinery runs with ``sigma^1`` in place
of the alphas and ``sigma^3`` in place of beta.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import propagator1d as p1
from . import propagator3d as p3
from .algebra import ALPHA, BETA, GAMMA, I2, I4, SIGMA1, SIGMA3

# gamma^0 gamma^a gamma^b, indexed [a, b]
GAMMA_PRODUCTS = np.einsum("ij,ajk,bkl->abil", GAMMA[0], GAMMA, GAMMA)


@dataclass(frozen=True)
class PotentialOneForm:
    """Real potential ``A_alpha(t, x)``; ``components(t, x)`` returns (A0, A1[, A2, A3])."""

    components: Callable[[float, np.ndarray], Sequence]
    charge: float = 1.0
    name: str = "potential"
    static: bool = False


@dataclass(frozen=True)
class FieldTwoForm:
    """Field ``F_{alpha beta}(t, x)``; ``components(t, x)`` returns an array of shape (4, 4, ...)."""

    components: Callable[[float, np.ndarray], np.ndarray]
    moment: float = 1.0
    name: str = "field"
    static: bool = False


@dataclass(frozen=True)
class CoefficientMatrix:
    """Matrix field ``B(t, x)``; calling it on grid points returns shape (..., n, n)."""

    func: Callable[[float, np.ndarray], np.ndarray]
    dim: int = 3
    name: str = "B"
    static: bool = False

    def __call__(self, t: float, points: np.ndarray) -> np.ndarray:
        return self.func(t, points)

    @property
    def size(self) -> int:
        return 2 if self.dim == 1 else 4

    def __add__(self, other: "CoefficientMatrix") -> "CoefficientMatrix":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return CoefficientMatrix(lambda t, x: self(t, x) + other(t, x), self.dim,
                                 f"{self.name}+{other.name}", self.static and other.static)


def _spatial_shape(points, dim):
    return points.shape if dim == 1 else points.shape[:-1]


def _broadcast(v, shape):
    return np.broadcast_to(np.asarray(v, dtype=float), shape)


def constant_matrix(mat, dim: int = 3, name: str = "const") -> CoefficientMatrix:
    mat = np.asarray(mat, dtype=complex)
    return CoefficientMatrix(
        lambda t, x: np.broadcast_to(mat, _spatial_shape(x, dim) + mat.shape).copy(),
        dim, name, static=True)


def mass_term(m: float, dim: int = 3) -> CoefficientMatrix:
    """``i m beta`` (``i m sigma^3`` in 1D)."""
    return constant_matrix(1j * m * (SIGMA3 if dim == 1 else BETA), dim, "mass")


def build_from_potential(A: PotentialOneForm, m: float, dim: int = 3) -> CoefficientMatrix:
    """``B = -i e A_0 - i e sum_j alpha^j A_j + i m beta``; anti-Hermitian for real A."""
    e = A.charge
    if dim == 1:
        unit, alphas, beta = I2, SIGMA1[None], SIGMA3
    else:
        unit, alphas, beta = I4, ALPHA, BETA

    def B(t, x):
        shape = _spatial_shape(x, dim)
        comps = A.components(t, x)
        if len(comps) != dim + 1:
            raise ValueError(f"potential must have {dim + 1} components")
        a0 = _broadcast(comps[0], shape)
        out = (-1j * e) * a0[..., None, None] * unit
        for j, aj in enumerate(comps[1:]):
            out = out + (-1j * e) * _broadcast(aj, shape)[..., None, None] * alphas[j]
        return out + 1j * m * beta

    return CoefficientMatrix(B, dim, f"potential:{A.name}", A.static)


def build_from_field(F: FieldTwoForm, m: float, probe_points: np.ndarray | None = None) -> CoefficientMatrix:
    """``B = (mu/2) sum_{a,b} gamma^0 gamma^a gamma^b F_ab + i m beta`` (3D only)."""
    def components(t, x):
        f = np.asarray(F.components(t, x), dtype=float)
        if f.shape[:2] != (4, 4):
            raise ValueError("field two-form must have shape (4, 4, ...)")
        if not np.allclose(f, -np.swapaxes(f, 0, 1), atol=1e-14, rtol=0):
            raise ValueError("field two-form must be antisymmetric")
        return f

    probe = np.zeros((1, 3)) if probe_points is None else probe_points
    components(0.0, probe)

    def B(t, x):
        shape = x.shape[:-1]
        f = components(t, x)
        f = f.reshape(f.shape + (1,) * (len(shape) + 2 - f.ndim))
        f = np.broadcast_to(f, (4, 4) + shape)
        return 0.5 * F.moment * np.einsum("ab...,abij->...ij", f, GAMMA_PRODUCTS) + 1j * m * BETA

    return CoefficientMatrix(B, 3, f"field:{F.name}", F.static)


def coulomb_cutoff(eps: float) -> float:
    """Cutoff radius ``1/log(1/eps)``."""
    return 1.0 / np.log(1.0 / eps)


def log_scaled_coulomb(q: float, eps: float, center=None, charge: float = 1.0,
                       dim: int = 3) -> PotentialOneForm:
    """Static point charge with logarithmic regularisation,

        A_0 = q / (4 pi max(|x - c|, 1/log(1/eps))),  A_j = 0,

    so that ``sup |A_0| = q log(1/eps) / (4 pi)``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    r_cut = coulomb_cutoff(eps)
    c = np.zeros(dim if dim == 3 else ()) if center is None else np.asarray(center, float)

    def comps(t, x):
        d = np.abs(x - c) if dim == 1 else np.sqrt(np.sum((x - c) ** 2, axis=-1))
        a0 = q / (4 * np.pi * np.maximum(d, r_cut))
        return (a0,) + (0.0,) * dim

    return PotentialOneForm(comps, charge, f"log_coulomb(eps={eps:g})", static=True)


def gaussian_pulse(amplitude: float, width: float, center=0.0, t_center: float | None = None,
                   duration: float | None = None, dim: int = 1) -> PotentialOneForm:
    """Scalar potential ``A_0 = a exp(-|x-c|^2/(2 w^2))``, optionally with a Gaussian time envelope."""
    c = np.asarray(center, float)

    def comps(t, x):
        d2 = (x - c) ** 2 if dim == 1 else np.sum((x - c) ** 2, axis=-1)
        a0 = amplitude * np.exp(-0.5 * d2 / width ** 2)
        if duration is not None:
            a0 = a0 * np.exp(-0.5 * ((t - (t_center or 0.0)) / duration) ** 2)
        return (a0,) + (0.0,) * dim

    return PotentialOneForm(comps, 1.0, "gaussian_pulse", static=duration is None)


def sup_norm(A: PotentialOneForm, points: np.ndarray, t: float = 0.0) -> float:
    """Grid sup of ``|A_0(t, .)|``."""
    return float(np.max(np.abs(A.components(t, points)[0])))


# ---------------------------------------------------------------- matrix exponentials

def _is_skew(M, tol=1e-13):
    scale = max(1.0, float(np.max(np.abs(M))))
    return float(np.max(np.abs(M + np.conj(np.swapaxes(M, -1, -2))))) <= tol * scale


def expm_batched(M: np.ndarray) -> np.ndarray:
    """``exp(M)`` for a stack of small square matrices (..., n, n).

    Anti-Hermitian stacks are diagonalised (exactly unitary result); other
    matrices use scaling and squaring with a degree-18 Taylor polynomial.
    """
    M = np.asarray(M, dtype=complex)
    if _is_skew(M):
        K = 1j * M  # Hermitian; M = -i K
        K = 0.5 * (K + np.conj(np.swapaxes(K, -1, -2)))
        w, V = np.linalg.eigh(K)
        return np.einsum("...ij,...j,...kj->...ik", V, np.exp(-1j * w), V.conj())
    nmax = float(np.max(np.sum(np.abs(M), axis=-1))) if M.size else 0.0
    s = max(0, int(np.ceil(np.log2(nmax / 0.5)))) if nmax > 0.5 else 0
    A = M / 2.0 ** s
    n = M.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=complex), M.shape)
    out = eye.copy()
    term = eye.copy()
    for j in range(1, 19):
        term = term @ A / j
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def operator_norm_hermitian(H: np.ndarray) -> np.ndarray:
    """Spectral norm of a stack of Hermitian matrices."""
    return np.max(np.abs(np.linalg.eigvalsh(H)), axis=-1)


def defect_rate(B: CoefficientMatrix, t: float, points: np.ndarray) -> float:
    """``sup_x ||(B + B*)(t, x)||`` in the operator 2-norm."""
    b = B(t, points)
    herm = b + np.conj(np.swapaxes(b, -1, -2))
    return float(np.max(operator_norm_hermitian(herm)))


def hermiticity_defect(B: CoefficientMatrix, points: np.ndarray, times: Sequence[float]) -> float:
    """``int_0^T sup_x ||(B + B*)(t, .)|| dt`` by the trapezoid rule on ``times``."""
    times = np.asarray(times, dtype=float)
    rates = np.array([defect_rate(B, t, points) for t in times])
    if len(times) == 1:
        return 0.0
    return float(np.sum(0.5 * (rates[1:] + rates[:-1]) * np.diff(times)))


# ---------------------------------------------------------------- split-step solver

@dataclass
class FieldHistory:
    times: np.ndarray
    norms: np.ndarray
    energy_bounds: np.ndarray
    defect_rates: np.ndarray
    final: object
    snapshots: list = field(default_factory=list)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))


def _free_symbol(grid, dt, m):
    if isinstance(grid, p1.Grid1D):
        return p1.propagator_symbol_1d(grid.k, dt, m)
    return p3.propagator_symbol_3d(grid, dt, m)


def _fft(values, dim):
    return np.fft.fft(values, axis=0) if dim == 1 else np.fft.fftn(values, axes=(0, 1, 2))


def _ifft(values, dim):
    return np.fft.ifft(values, axis=0) if dim == 1 else np.fft.ifftn(values, axes=(0, 1, 2))


def solve_split_step(initial, B: CoefficientMatrix, T: float, dt: float,
                     free_mass: float = 0.0, snapshot_every: int = 0) -> FieldHistory:
    """Strang splitting: ``exp(-B(t+dt/2) dt/2)``, exact free step, ``exp(-B(t+dt/2) dt/2)``.

    The free step is the exact spectral propagator of the Dirac operator with
    mass ``free_mass`` (usually 0, with the mass folded into ``B``).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("T must be a positive multiple of dt")
    dim = 1 if isinstance(initial, p1.SpinorField1D) else 3
    if B.dim != dim:
        raise ValueError("coefficient matrix and field dimensions differ")
    grid = initial.grid
    points = grid.x if dim == 1 else grid.points()
    U = _free_symbol(grid, dt, free_mass)
    psi = np.array(initial.values, dtype=complex)
    norm0 = initial.norm()
    cell = grid.dx if dim == 1 else grid.cell
    times = [initial.t]
    norms = [norm0]
    bounds = [norm0]
    rates = []
    snaps = [initial] if snapshot_every else []
    cached = None
    log_growth = 0.0
    t = initial.t
    for step in range(nsteps):
        tm = t + 0.5 * dt
        if B.static and cached is not None:
            E, rate = cached
        else:
            b = B(tm, points)
            E = expm_batched(-0.5 * dt * b)
            herm = b + np.conj(np.swapaxes(b, -1, -2))
            rate = float(np.max(operator_norm_hermitian(herm)))
            if B.static:
                cached = (E, rate)
        psi = np.einsum("...ij,...j->...i", E, psi)
        psi = _ifft(np.einsum("...ij,...j->...i", U, _fft(psi, dim)), dim)
        psi = np.einsum("...ij,...j->...i", E, psi)
        with np.errstate(over="ignore", invalid="ignore"):
            norm = float(np.sqrt(np.sum(np.abs(psi) ** 2) * cell))
        if not (np.all(np.isfinite(psi)) and np.isfinite(norm)):
            raise FloatingPointError(f"non-finite field values at step {step + 1}")
        t = initial.t + (step + 1) * dt
        log_growth += 0.5 * dt * rate
        times.append(t)
        norms.append(norm)
        bounds.append(norm0 * np.exp(log_growth))
        rates.append(rate)
        if snapshot_every and (step + 1) % snapshot_every == 0:
            snaps.append(type(initial)(grid, psi.copy(), t))
    final = type(initial)(grid, psi, t)
    return FieldHistory(np.array(times), np.array(norms), np.array(bounds), np.array(rates), final, snaps)


@dataclass(frozen=True)
class CompatibilityReport:
    dts: np.ndarray
    differences: np.ndarray  # ||psi_dt - psi_{dt/2}|| for consecutive pairs
    ratios: np.ndarray
    orders: np.ndarray
    reference_error: float | None

    @property
    def observed_order(self) -> float:
        return float(self.orders[-1])


def _l2(a, b, grid):
    cell = grid.dx if isinstance(grid, p1.Grid1D) else grid.cell
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * cell))


def smooth_compatibility_check(initial, B: CoefficientMatrix, T: float, dts: Sequence[float],
                               reference=None, free_mass: float = 0.0) -> CompatibilityReport:
    """Refinement study of the split-step solution over decreasing ``dts``.

    Successive differences shrink by ``2^p`` for halved steps; with a
    ``reference`` field the error of the finest run against it is reported.
    """
    dts = [float(d) for d in dts]
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("dts must be decreasing")
    finals = [solve_split_step(initial, B, T, dt, free_mass).final for dt in dts]
    diffs = np.array([_l2(a.values, b.values, initial.grid) for a, b in zip(finals, finals[1:])])
    ratios = diffs[:-1] / diffs[1:] if len(diffs) > 1 else np.array([])
    steps = np.array(dts[:-1]) / np.array(dts[1:])
    orders = np.log(ratios) / np.log(steps[1:]) if len(ratios) else np.array([])
    ref_err = None
    if reference is not None:
        ref_err = _l2(finals[-1].values, reference.values, initial.grid)
    return CompatibilityReport(np.array(dts), diffs, ratios, orders, ref_err)
