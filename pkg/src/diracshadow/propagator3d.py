"""
Free Dirac propagation on a periodic 3D box.

``evolve_3d_spectral`` expands every Fourier mode in the omega basis (the
canonical solver for any mass).  ``evolve_3d_convolution_massless`` applies
the cos / sin(t|k|)/|k| form of the massless solution and serves as an
independent check at m = 0.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .algebra import ALPHA, BETA, I4, dispersion, eigenbasis_3d
from .propagator1d import BOUNDARY_TOL, BoundaryDecayWarning
from .regularization import RegularizationFamily


@dataclass(frozen=True)
class Grid3D:
    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("half-width L must be positive")
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be even and >= 4, got {self.N}")

    @property
    def dx(self) -> float:
        return 2 * self.L / self.N

    @property
    def cell(self) -> float:
        return self.dx ** 3

    @property
    def axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @property
    def kaxis(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def points(self) -> np.ndarray:
        """Grid points, shape (N, N, N, 3)."""
        a = self.axis
        return np.stack(np.meshgrid(a, a, a, indexing="ij"), axis=-1)

    def wavevectors(self) -> np.ndarray:
        """Wave vectors in FFT order, shape (N, N, N, 3)."""
        k = self.kaxis
        return np.stack(np.meshgrid(k, k, k, indexing="ij"), axis=-1)


@dataclass(frozen=True)
class SpinorField3D:
    grid: Grid3D
    values: np.ndarray  # (N, N, N, 4)
    t: float = 0.0

    def __post_init__(self):
        n = self.grid.N
        if self.values.shape != (n, n, n, 4):
            raise ValueError(f"values must have shape ({n}, {n}, {n}, 4)")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell))


def sample(family: RegularizationFamily, grid: Grid3D) -> SpinorField3D:
    if family.dim != 3:
        raise ValueError("expected a three-dimensional family")
    return SpinorField3D(grid, np.asarray(family.evaluate(grid.points()), dtype=complex), 0.0)


def boundary_mass(field: SpinorField3D, fraction: float = 1 / 16) -> float:
    """Mass in the outer shell of the box (any coordinate within ``fraction`` of the edge)."""
    n = field.grid.N
    w = max(1, int(n * fraction))
    rho = np.sum(np.abs(field.values) ** 2, axis=-1)
    total = rho.sum()
    if total == 0:
        return 0.0
    idx = np.arange(n)
    edge = (idx < w) | (idx >= n - w)
    mask = edge[:, None, None] | edge[None, :, None] | edge[None, None, :]
    return float(rho[mask].sum() / total)


def _check_decay(field, tol=BOUNDARY_TOL):
    bm = boundary_mass(field)
    if bm > tol:
        warnings.warn(f"initial data not decayed at the box edge: boundary mass {bm:.3e}",
                      BoundaryDecayWarning, stacklevel=3)
    return bm


def _fft(v):
    return np.fft.fftn(v, axes=(0, 1, 2))


def _ifft(v):
    return np.fft.ifftn(v, axes=(0, 1, 2))


def mass_phase_matrix(t: float, m: float, sign: int = 1) -> np.ndarray:
    """``exp(sign * i m beta t) = cos(mt) I + sign * i sin(mt) beta``."""
    return np.cos(m * t) * I4 + sign * 1j * np.sin(m * t) * BETA


def evolve_3d_spectral(initial: SpinorField3D, t: float, m: float,
                       check_decay: bool = True) -> SpinorField3D:
    """Advance by ``t``: each mode is expanded in (omega_pos,+-, omega_neg,+-).

    The k = 0 mode is advanced by ``exp(-i m beta t)``.
    """
    if check_decay:
        _check_decay(initial)
    g = initial.grid
    spec = _fft(initial.values)
    k = g.wavevectors()
    zero = np.all(k == 0, axis=-1)
    kk = np.where(zero[..., None], 1.0, k)  # placeholder direction at the origin
    omega = eigenbasis_3d(kk, m).stacked()  # (..., 4 vectors, 4 comps)
    coeff = np.einsum("...vc,...c->...v", omega.conj(), spec)
    lam = dispersion(k, m, axis=-1)
    ph = np.exp(-1j * t * lam)
    phases = np.stack([ph, ph, ph.conj(), ph.conj()], axis=-1)
    out = np.einsum("...v,...vc->...c", coeff * phases, omega)
    out[zero] = spec[zero] @ mass_phase_matrix(t, m, -1).T
    return SpinorField3D(g, _ifft(out), initial.t + t)


def evolve_3d_convolution_massless(initial: SpinorField3D, t: float, m: float = 0.0) -> SpinorField3D:
    """Massless solution ``u_hat = cos(t|k|) phi_hat - sin(t|k|)/|k| * i (alpha.k) phi_hat``.

    Only valid at m = 0: the substitution ``u = exp(i m beta t) psi`` does not
    remove the mass term because beta anticommutes with the alphas.
    """
    if m != 0:
        raise ValueError("the cos/sin convolution form is exact only for m = 0; "
                         "use evolve_3d_spectral for massive fields")
    g = initial.grid
    spec = _fft(initial.values)
    k = g.wavevectors()
    kabs = np.sqrt(np.sum(k * k, axis=-1))
    # sin(t|k|)/|k| with its removable singularity at k = 0
    sinc = t * np.sinc(t * kabs / np.pi)
    ak = np.einsum("...j,jab->...ab", k, ALPHA)
    akphi = np.einsum("...ab,...b->...a", ak, spec)
    out = np.cos(t * kabs)[..., None] * spec - 1j * sinc[..., None] * akphi
    return SpinorField3D(g, _ifft(out), initial.t + t)


def mass_phase(field: SpinorField3D, t: float, m: float, sign: int = 1) -> SpinorField3D:
    """Multiply pointwise by ``exp(sign * i m beta t)``; leaves ``|psi|^2`` unchanged."""
    mat = mass_phase_matrix(t, m, sign)
    return replace(field, values=field.values @ mat.T)


def energy_projection(field: SpinorField3D, m: float, sign: int) -> SpinorField3D:
    """Projection onto positive (``sign=+1``) or negative energy; k = 0 uses beta's eigenspaces."""
    g = field.grid
    spec = _fft(field.values)
    k = g.wavevectors()
    zero = np.all(k == 0, axis=-1)
    kk = np.where(zero[..., None], 1.0, k)
    omega = eigenbasis_3d(kk, m).stacked()
    sel = omega[..., :2, :] if sign > 0 else omega[..., 2:, :]
    coeff = np.einsum("...vc,...c->...v", sel.conj(), spec)
    out = np.einsum("...v,...vc->...c", coeff, sel)
    keep = np.array([1, 1, 0, 0] if sign > 0 else [0, 0, 1, 1], dtype=complex)
    out[zero] = spec[zero] * keep
    return replace(field, values=_ifft(out))


def probability_density(field: SpinorField3D) -> np.ndarray:
    return np.sum(np.abs(field.values) ** 2, axis=-1)


def plane_wave(grid: Grid3D, kvec, spinor) -> SpinorField3D:
    """Single Fourier mode ``exp(i k.x) * spinor``; ``kvec`` must lie on the wave-vector lattice."""
    x = grid.points()
    return SpinorField3D(grid, np.exp(1j * (x @ np.asarray(kvec, float)))[..., None]
                         * np.asarray(spinor, complex), 0.0)


def propagator_symbol_3d(grid: Grid3D, t: float, m: float) -> np.ndarray:
    """Per-mode propagator matrices ``exp(-i t H(k))`` in FFT order, shape (N, N, N, 4, 4)."""
    k = grid.wavevectors()
    zero = np.all(k == 0, axis=-1)
    kk = np.where(zero[..., None], 1.0, k)
    omega = eigenbasis_3d(kk, m).stacked()
    lam = dispersion(k, m, axis=-1)
    ph = np.exp(-1j * t * lam)
    phases = np.stack([ph, ph, ph.conj(), ph.conj()], axis=-1)
    # sum_v phase_v |omega_v><omega_v|
    U = np.einsum("...v,...va,...vb->...ab", phases, omega, omega.conj())
    U[zero] = mass_phase_matrix(t, m, -1)
    return U
