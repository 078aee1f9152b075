import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from diracshadow import algebra as alg
from diracshadow import external as ext
from diracshadow import propagator1d as p1
from diracshadow import propagator3d as p3
from diracshadow.regularization import RegularizationFamily, ScalingLaw, gaussian_profile

G1 = p1.Grid1D(10.0, 256)
G3 = p3.Grid3D(4.0, 16)


def _f1(eps=0.5):
    return p1.sample(RegularizationFamily(gaussian_profile(1, [1, 0.5j]), ScalingLaw.SQRT_DELTA, eps), G1)


def _f3(eps=0.6):
    return p3.sample(RegularizationFamily(gaussian_profile(3, [1, 0, 0.4j, 0.2]), ScalingLaw.SQRT_DELTA, eps), G3)


def _zero_potential(dim):
    return ext.PotentialOneForm(lambda t, x: (0.0,) * (dim + 1), static=True)


def test_zero_potential_gives_mass_term():
    pts = G3.points()
    B = ext.build_from_potential(_zero_potential(3), 1.3)
    assert np.allclose(B(0.0, pts), 1.3j * alg.BETA)
    B1 = ext.build_from_potential(_zero_potential(1), 0.7, dim=1)
    assert np.allclose(B1(0.0, G1.x), 0.7j * alg.SIGMA3)


def test_potential_component_count_checked():
    B = ext.build_from_potential(_zero_potential(1), 1.0, dim=3)
    with pytest.raises(ValueError):
        B(0.0, G3.points())


def test_random_potential_is_anti_hermitian():
    rng = np.random.default_rng(5)
    pts = G3.points()
    comps = [rng.normal(size=pts.shape[:-1]) for _ in range(4)]
    B = ext.build_from_potential(ext.PotentialOneForm(lambda t, x: comps, charge=0.8), 2.0)
    b = B(0.3, pts)
    assert np.max(np.abs(b + np.conj(np.swapaxes(b, -1, -2)))) < 1e-14
    assert ext.defect_rate(B, 0.3, pts) < 1e-14


def test_constant_scalar_potential_is_global_phase():
    f = _f1()
    A = ext.PotentialOneForm(lambda t, x: (1.0, 0.0), static=True)
    hist = ext.solve_split_step(f, ext.build_from_potential(A, 0.0, dim=1), 1.0, 0.05, free_mass=1.0)
    free = p1.evolve_1d(f, 1.0, 1.0)
    # -i e A_0 enters with d_t psi + ... + B psi = 0, so psi picks up exp(i t)
    assert np.max(np.abs(hist.final.values - np.exp(1j) * free.values)) < 1e-12


def test_zero_field_matches_spectral_solution():
    f = _f3()
    # with the mass in the exact free step and B = 0 the splitting is exact
    B = ext.build_from_potential(_zero_potential(3), 0.0)
    hist = ext.solve_split_step(f, B, 0.6, 0.1, free_mass=0.9)
    ref = p3.evolve_3d_spectral(f, 0.6, 0.9, check_decay=False)
    assert np.max(np.abs(hist.final.values - ref.values)) < 1e-8
    assert hist.norm_drift < 1e-12
    # folding the non-commuting mass term into B costs a second-order splitting error
    errs = [np.max(np.abs(ext.solve_split_step(f, ext.mass_term(0.9), 0.6, dt).final.values - ref.values))
            for dt in (0.1, 0.05)]
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)


def test_field_two_form_builder():
    pts = G3.points()
    zero = ext.FieldTwoForm(lambda t, x: np.zeros((4, 4)), static=True)
    assert np.allclose(ext.build_from_field(zero, 1.1)(0.0, pts), 1.1j * alg.BETA)
    F = np.zeros((4, 4))
    F[1, 2], F[2, 1] = 0.7, -0.7
    b = ext.build_from_field(ext.FieldTwoForm(lambda t, x: F, static=True), 0.0)(0.0, pts[:1, :1, :1])[0, 0, 0]
    # a purely magnetic F_12 couples through gamma^0 gamma^1 gamma^2, which commutes with beta
    assert np.allclose(b @ alg.BETA, alg.BETA @ b)
    assert np.max(np.abs(b)) > 0
    bad = np.zeros((4, 4))
    bad[0, 1] = 1.0
    with pytest.raises(ValueError):
        ext.build_from_field(ext.FieldTwoForm(lambda t, x: bad), 1.0)


def test_log_coulomb_sup_and_range():
    pts = G3.points()
    for eps in (0.1, 1e-3):
        A = ext.log_scaled_coulomb(2.0, eps)
        assert ext.sup_norm(A, pts) == pytest.approx(2.0 * np.log(1 / eps) / (4 * np.pi), rel=1e-12)
    assert ext.coulomb_cutoff(np.exp(-2.0)) == pytest.approx(0.5)
    for eps in (1.0, 2.0, 0.0):
        with pytest.raises(ValueError):
            ext.log_scaled_coulomb(1.0, eps)


def test_defect_of_real_identity_term():
    c = 0.35
    B = ext.constant_matrix(c * alg.I4, name="cI")
    pts = G3.points()[:2, :2, :2]
    assert ext.defect_rate(B, 0.0, pts) == pytest.approx(2 * c)
    assert ext.hermiticity_defect(B, pts, np.linspace(0, 1.5, 7)) == pytest.approx(2 * c * 1.5)


def test_energy_estimate_holds_for_non_skew_term():
    f = _f1()
    c = 0.2
    B = ext.mass_term(1.0, dim=1) + ext.constant_matrix(c * alg.I2, dim=1, name="damp")
    hist = ext.solve_split_step(f, B, 1.0, 0.05)
    # a damping term -c I decays the norm exactly like exp(-c t), inside the bound exp(c t)
    assert hist.norms[-1] == pytest.approx(f.norm() * np.exp(-c), rel=1e-12)
    assert np.all(hist.norms <= hist.energy_bounds * (1 + 1e-12))
    grow = ext.solve_split_step(f, ext.constant_matrix(-c * alg.I2, dim=1), 1.0, 0.05)
    assert grow.norms[-1] == pytest.approx(grow.energy_bounds[-1], rel=1e-12)


def test_blow_up_raises():
    f = _f1()
    B = ext.constant_matrix(-800.0 * alg.I2, dim=1)
    with pytest.raises(FloatingPointError):
        ext.solve_split_step(f, B, 1.0, 0.5)


def test_step_validation():
    f = _f1()
    B = ext.mass_term(1.0, dim=1)
    with pytest.raises(ValueError):
        ext.solve_split_step(f, B, 1.0, 0.3)
    with pytest.raises(ValueError):
        ext.solve_split_step(f, B, 1.0, -0.1)
    with pytest.raises(ValueError):
        ext.solve_split_step(f, ext.mass_term(1.0), 1.0, 0.1)


def test_expm_batched_matches_scipy():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(6, 4, 4)) + 1j * rng.normal(size=(6, 4, 4))
    skew = 3 * (M - np.conj(np.swapaxes(M, -1, -2)))
    for stack in (M, 4 * M, skew):
        ours = ext.expm_batched(stack)
        ref = np.array([scipy.linalg.expm(a) for a in stack])
        assert np.allclose(ours, ref, rtol=1e-11, atol=1e-11)


def _mode_reference(f, B_of_t, T):
    """Per-mode ODE d/dt u_k = -(i k sigma^1 + B(t)) u_k for a position-independent B."""
    n = G1.N
    k = 2 * np.pi * np.fft.fftfreq(n, G1.dx)
    u0 = np.fft.fft(f.values, axis=0)

    def rhs(t, y):
        u = y.reshape(n, 2)
        return (-(1j * k[:, None] * (u @ alg.SIGMA1.T)) - u @ B_of_t(t).T).ravel()

    sol = solve_ivp(rhs, (0.0, T), u0.ravel(), method="DOP853", rtol=1e-12, atol=1e-12)
    return np.fft.ifft(sol.y[:, -1].reshape(n, 2), axis=0)


def test_time_dependent_uniform_potential_against_ode():
    f = _f1()
    m, e = 1.0, 0.8
    comps = lambda t, x: (np.cos(t) * np.ones_like(x), 0.6 * np.sin(2 * t) * np.ones_like(x))
    B = ext.build_from_potential(ext.PotentialOneForm(comps, charge=e), m, dim=1)
    B_of_t = lambda t: (-1j * e * np.cos(t) * alg.I2 - 1j * e * 0.6 * np.sin(2 * t) * alg.SIGMA1
                        + 1j * m * alg.SIGMA3)
    T = 1.0
    ref = _mode_reference(f, B_of_t, T)
    errs = []
    for dt in (0.05, 0.025):
        out = ext.solve_split_step(f, B, T, dt).final.values
        errs.append(np.sqrt(np.sum(np.abs(out - ref) ** 2) * G1.dx))
    assert errs[1] < errs[0] < 1e-2
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)


def test_compatibility_check_order():
    f = _f1()
    A = ext.gaussian_pulse(1.5, 1.0, 0.3, t_center=0.5, duration=0.5)
    B = ext.build_from_potential(A, 1.0, dim=1)
    rep = ext.smooth_compatibility_check(f, B, 1.0, [0.1, 0.05, 0.025, 0.0125])
    assert rep.observed_order == pytest.approx(2.0, abs=0.2)
    with pytest.raises(ValueError):
        ext.smooth_compatibility_check(f, B, 1.0, [0.05, 0.1])
