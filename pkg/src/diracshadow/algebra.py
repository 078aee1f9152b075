"""
Pauli and Dirac matrices, the free dispersion relation and the energy /
helicity eigenbases of the Fourier-space Dirac Hamiltonian.

Conventions: natural units, standard (Dirac) representation with
``beta = diag(I2, -I2)`` and ``alpha^j`` carrying ``sigma^j`` on the
off-diagonal blocks.  The gamma matrices are ``gamma^0 = beta`` and
``gamma^j = beta alpha^j`` so that ``gamma^0 gamma^j = alpha^j``.

All eigenbasis builders are vectorised: a wave vector argument of shape
``(..., 3)`` (or ``(...)`` in one dimension) yields spinor arrays of shape
``(..., 4)`` (or ``(..., 2)``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI = (SIGMA1, SIGMA2, SIGMA3)

# relative tolerance for the positive k3 axis, where the helicity formula is 0/0
AXIS_TOL = 1e-12

for _m in _PAULI:
    _m.setflags(write=False)


def pauli(j: int) -> np.ndarray:
    """Return a copy of the Pauli matrix ``sigma^j`` for ``j`` in 1..3."""
    if j not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {j!r}")
    return _PAULI[j - 1].copy()


class DiracMatrices(NamedTuple):
    beta: np.ndarray
    alpha: tuple[np.ndarray, np.ndarray, np.ndarray]
    gamma: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _block(a, b, c, d):
    return np.block([[a, b], [c, d]])


def dirac_matrices() -> DiracMatrices:
    """Build beta, alpha^1..3 and gamma^0..3 in the Dirac representation."""
    z = np.zeros((2, 2), dtype=complex)
    beta = _block(I2, z, z, -I2)
    alpha = tuple(_block(z, s, s, z) for s in _PAULI)
    gamma = (beta.copy(),) + tuple(beta @ a for a in alpha)
    return DiracMatrices(beta, alpha, gamma)


_DM = dirac_matrices()
BETA = _DM.beta
ALPHA = np.stack(_DM.alpha)  # (3, 4, 4)
GAMMA = np.stack(_DM.gamma)  # (4, 4, 4)


def dispersion(k, m: float, axis: int | None = None):
    """Free dispersion ``sqrt(|k|^2 + m^2)``.

    ``k`` is a scalar or array of one-dimensional wavenumbers; pass ``axis``
    to treat that axis of ``k`` as vector components (e.g. ``axis=-1`` for
    an array of 3-vectors).
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    k = np.asarray(k, dtype=float)
    k2 = k * k if axis is None else np.sum(k * k, axis=axis)
    return np.sqrt(k2 + m * m)


def hamiltonian_1d(k, m: float) -> np.ndarray:
    """Fourier symbol ``k sigma^1 + m sigma^3`` of ``-i sigma^1 d_x + m sigma^3``."""
    k = np.asarray(k, dtype=float)[..., None, None]
    return k * SIGMA1 + m * SIGMA3


def hamiltonian_3d(k, m: float) -> np.ndarray:
    """Fourier symbol ``sum_j alpha^j k_j + m beta``; ``k`` has shape (..., 3)."""
    k = np.asarray(k, dtype=float)
    return np.einsum("...j,jab->...ab", k, ALPHA) + m * BETA


@dataclass(frozen=True)
class EigenBasis1D:
    k: np.ndarray
    u_pos: np.ndarray
    u_neg: np.ndarray


@dataclass(frozen=True)
class EigenBasis3D:
    k: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    h_plus: np.ndarray
    h_minus: np.ndarray
    omega_pos_plus: np.ndarray
    omega_pos_minus: np.ndarray
    omega_neg_plus: np.ndarray
    omega_neg_minus: np.ndarray

    def stacked(self) -> np.ndarray:
        """Basis vectors as rows, ordered (pos+, pos-, neg+, neg-): shape (..., 4, 4)."""
        return np.stack(
            [self.omega_pos_plus, self.omega_pos_minus,
             self.omega_neg_plus, self.omega_neg_minus], axis=-2)


def _amplitudes(kabs, m: float):
    """Return ``(sqrt(1+m/lambda), sqrt(1-m/lambda))``, defined as (1, 1) where lambda = 0."""
    lam = np.sqrt(kabs * kabs + m * m)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(lam > 0, m / np.where(lam > 0, lam, 1.0), 0.0)
    # 1 - m/lambda loses all digits for |k| << m; use k^2 / (lambda (lambda + m))
    with np.errstate(invalid="ignore", divide="ignore"):
        one_minus = np.where(lam > 0, kabs * kabs / np.where(lam > 0, lam * (lam + m), 1.0), 1.0)
    return np.sqrt(1.0 + ratio), np.sqrt(one_minus)


def eigenbasis_1d(k, m: float) -> EigenBasis1D:
    """Normalised eigenvectors of ``k sigma^1 + m sigma^3`` for the energies ``+-lambda(k)``.

    At ``k = 0`` the basis is ``(1, 0), (0, 1)`` for every mass, which is the
    eigenbasis of ``m sigma^3`` and the continuous extension for ``m > 0``.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    k = np.asarray(k, dtype=float)
    s = np.sign(k)
    plus, minus = _amplitudes(np.abs(k), m)
    # pin k = 0 explicitly: for m = 0 (or m so small that m^2 underflows)
    # the amplitude formula gives (1, 0)/sqrt2, which is not normalised
    zero = k == 0
    plus = np.where(zero, np.sqrt(2.0), plus)
    minus = np.where(zero, 0.0, minus)
    u_pos = np.stack([plus, s * minus], axis=-1) / np.sqrt(2.0)
    u_neg = np.stack([-s * minus, plus], axis=-1) / np.sqrt(2.0)
    return EigenBasis1D(k, u_pos.astype(complex), u_neg.astype(complex))


def helicity_spinors(k) -> tuple[np.ndarray, np.ndarray]:
    """Unit eigenvectors of ``sigma . k / |k|`` with eigenvalues +1 and -1.

    The vectors depend only on the direction of ``k``.  On the positive
    k3 axis, where the closed form is 0/0, the limits ``(1, 0)`` and ``(0, 1)``
    are returned.
    """
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 3:
        raise ValueError("helicity spinors need 3-vectors")
    k1, k2, k3 = k[..., 0], k[..., 1], k[..., 2]
    kabs = np.sqrt(k1 * k1 + k2 * k2 + k3 * k3)
    if np.any(kabs == 0):
        raise ValueError("helicity spinors are undefined at k = 0")
    rho2 = k1 * k1 + k2 * k2
    # |k| - k3 without cancellation for directions near the positive k3 axis
    gap = np.where(k3 > 0, rho2 / (kabs + np.abs(k3)), kabs - k3)
    axis = gap < AXIS_TOL * kabs
    safe_gap = np.where(axis, 1.0, gap)
    norm = np.sqrt(2.0 * kabs * safe_gap)
    hp = np.stack([k1 - 1j * k2, safe_gap + 0j], axis=-1) / norm[..., None]
    hm = np.stack([-safe_gap + 0j, k1 + 1j * k2], axis=-1) / norm[..., None]
    up = np.array([1, 0], dtype=complex)
    down = np.array([0, 1], dtype=complex)
    hp = np.where(axis[..., None], up, hp)
    hm = np.where(axis[..., None], down, hm)
    return hp, hm


def eigenbasis_3d(k, m: float) -> EigenBasis3D:
    """Positive/negative energy helicity basis of ``sum_j alpha^j k_j + m beta``.

    ``omega_pos,+-`` have energy ``+lambda(k)`` and ``omega_neg,+-`` have
    ``-lambda(k)``; the helicity label is that of the 2-spinor ``h_+-``.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    k = np.asarray(k, dtype=float)
    hp, hm = helicity_spinors(k)
    kabs = np.sqrt(np.sum(k * k, axis=-1))
    plus, minus = _amplitudes(kabs, m)
    a_p = (plus / np.sqrt(2.0))[..., None]
    a_m = (minus / np.sqrt(2.0))[..., None]
    cat = np.concatenate
    return EigenBasis3D(
        k=k,
        a_plus=a_p[..., 0],
        a_minus=a_m[..., 0],
        h_plus=hp,
        h_minus=hm,
        omega_pos_plus=cat([a_p * hp, a_m * hp], axis=-1),
        omega_pos_minus=cat([a_p * hm, -a_m * hm], axis=-1),
        omega_neg_plus=cat([-a_m * hp, a_p * hp], axis=-1),
        omega_neg_minus=cat([a_m * hm, a_p * hm], axis=-1),
    )


def limit_eigenbasis_3d(k) -> EigenBasis3D:
    """Degree-0 homogeneous limit of ``eigenbasis_3d(k / eps, m)`` as eps -> 0.

    Equal to the massless basis, since ``a_+- -> 1/sqrt2``.
    """
    return eigenbasis_3d(k, 0.0)
