import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from diracshadow import propagator1d as p1
from diracshadow import propagator3d as p3
from diracshadow.regularization import (
    RegularizationFamily,
    ScalingLaw,
    aligned_pair,
    bump_profile,
    gaussian_profile,
    orthogonal_pair,
    rotated_pair,
)
from diracshadow.shadow import (
    ClosedFormLimit1D,
    bump_test_function,
    constant_test_function,
    divergence_check,
    epsilon_sweep,
    evolved_pairing,
    fit_slope,
    fourier_pairing_1d,
    gaussian_test_function,
    limit_1d,
    limit_3d,
    make_test_function,
    mixed_overlap,
    pairing,
    phase_gap,
    phase_gap_limit,
    plateau_test_function,
    sphere_density,
    sphere_nodes,
    tail_slope,
)

G1 = p1.Grid1D(8.0, 4096)


@pytest.mark.parametrize("prof", [aligned_pair(), aligned_pair(-1), orthogonal_pair(),
                                  rotated_pair(0.3), gaussian_profile(1, [0.2 + 1j, -0.7])])
def test_convexity(prof):
    c = ClosedFormLimit1D.from_profile(prof)
    assert c.c_plus + c.c_minus == pytest.approx(1.0, abs=1e-12)
    assert 0 <= c.c_minus <= 1 and 0 <= c.c_plus <= 1


def test_closed_form_1d_examples():
    h = bump_test_function(1, 1.0, 1.0)
    assert limit_1d(aligned_pair(), 1.0, h) == pytest.approx(1.0)
    assert limit_1d(aligned_pair(-1), 1.0, h) == pytest.approx(0.0, abs=1e-12)
    hh = gaussian_test_function(1, 0.5, 0.8)
    assert limit_1d(orthogonal_pair(), 1.0, hh) == pytest.approx(0.5 * (hh.at(1.0) + hh.at(-1.0)))
    c = ClosedFormLimit1D.from_profile(rotated_pair(math.pi / 6))
    assert c.c_plus == pytest.approx(0.9330127018922193, abs=1e-12)


def test_pairing_with_constant_is_total_probability():
    fam = RegularizationFamily(rotated_pair(0.4), ScalingLaw.SQRT_DELTA, 0.05)
    res = evolved_pairing(fam, G1, 1.5, 1.0, constant_test_function(1))
    assert res.value == pytest.approx(1.0, abs=1e-8)


def test_pairing_at_time_zero_is_delta_approximant():
    h = gaussian_test_function(1, 0.2, 0.5)
    fam = RegularizationFamily(aligned_pair(), ScalingLaw.SQRT_DELTA, 0.05)
    res = pairing(p1.sample(fam, G1), h, 0.05)
    # second-order approach: h(0) + eps^2 h''(0) / 4 for the unit Gaussian
    hpp = h.at(0.0) * ((0.2 / 0.25) ** 2 - 1 / 0.25)
    assert res.value == pytest.approx(h.at(0.0) + 0.05 ** 2 * hpp / 4, abs=1e-5)
    assert res.error_estimate < 1e-10


def test_pairing_rejects_support_outside_box():
    f = p1.sample(RegularizationFamily(aligned_pair(), ScalingLaw.SQRT_DELTA, 0.1), p1.Grid1D(2.0, 256))
    with pytest.raises(ValueError):
        pairing(f, bump_test_function(1, 1.5, 1.0))


def test_fourier_oracle_matches_position_pairing():
    h = gaussian_test_function(1, 1.0, 0.3)
    prof = rotated_pair(0.9)
    for eps in (0.2, 0.1):
        o = fourier_pairing_1d(prof, 1.0, 1.0, eps, h)
        v = evolved_pairing(RegularizationFamily(prof, ScalingLaw.SQRT_DELTA, eps), G1, 1.0, 1.0, h).value
        assert o.value == pytest.approx(v, rel=1e-10)
        assert abs(o.imag) < 1e-12
        assert o.bound_ratio <= 1 + 1e-12


def test_phase_gap():
    eps = [1e-2, 1e-3, 1e-4]
    errs = [abs(phase_gap(1.0, 0.7, e, 1.0) - 0.7) for e in eps]
    # within the O(eps) bound; for m > 0 the leading term is m^2 xi eps^2 / 2
    assert all(err <= e for err, e in zip(errs, eps))
    assert errs[-1] == pytest.approx(0.7 * 1e-8 / 2, rel=1e-3)
    assert fit_slope(eps, errs) == pytest.approx(2.0, abs=0.05)
    assert phase_gap([[0.0, 0.0, 2.0]], [[0.0, 0.0, 0.5]], 1e-3, 1.0, dimension=3) == pytest.approx(0.5)
    assert phase_gap(1.0, 0.0, 1e-3, 1.0) == 0.0
    assert phase_gap_limit([1.0, 0, 0], [0, 2.0, 0], dimension=3) == 0.0
    with pytest.raises(ValueError):
        phase_gap(0.0, 1.0, 0.1, 1.0)


def test_mixed_overlap():
    eta = np.array([0.6, -0.3, 0.8])
    assert mixed_overlap(eta, np.zeros(3), 0.1, 1.0).mixed_max < 1e-14
    xi = np.array([0.4, 1.1, -0.2])
    eps = [1e-1, 1e-2, 1e-3]
    vals = [mixed_overlap(eta, xi, e, 1.0).mixed_max for e in eps]
    assert fit_slope(eps, vals) == pytest.approx(1.0, abs=0.1)
    assert all(v <= 1.0 * e for v, e in zip(vals, eps))
    same = mixed_overlap(eta, xi, 1e-4, 1.0).matrix[0, 0]
    assert abs(same) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        mixed_overlap(np.zeros(3), np.zeros(3), 0.1, 1.0)


def test_sphere_nodes_integrate_harmonics():
    pts, w = sphere_nodes(8)
    assert np.sum(w) == pytest.approx(4 * np.pi)
    assert np.sum(w * pts[:, 2] ** 2) == pytest.approx(4 * np.pi / 3)
    assert np.sum(w * pts[:, 0] * pts[:, 1] ** 3) == pytest.approx(0.0, abs=1e-13)


def test_sphere_density_radial_gaussian_is_uniform():
    prof = gaussian_profile(3, [1, 0, 0, 0])
    theta, _ = sphere_nodes(6)
    f = sphere_density(prof, theta, 64)
    assert np.allclose(f, 1 / (4 * np.pi), atol=1e-12)


def test_limit_3d_examples():
    prof = gaussian_profile(3, [1, 0.3j, 0, 0.1])
    one = limit_3d(prof, 1.0, constant_test_function(3))
    assert one.value == pytest.approx(1.0, abs=1e-6) and one.total == pytest.approx(1.0, abs=1e-6)
    assert one.f_min >= 0
    inside = limit_3d(prof, 1.0, bump_test_function(3, 0.0, 0.8))
    assert inside.value == 0.0


def test_sphere_limit_orientation():
    # (1, 0, 1, 0) is positive energy for momenta along +z, so the mass must
    # land on the +z cap; the reflected density f(-theta) predicts almost none
    prof = gaussian_profile(3, [1, 0, 1, 0], momentum=[0, 0, 3.0])
    theta, w = sphere_nodes(12)
    fth = sphere_density(prof, theta, 128)
    assert np.sum(w * fth * theta[:, 2]) > 0.8
    h = bump_test_function(3, [0, 0, 1.0], 0.9)
    h_reflected = bump_test_function(3, [0, 0, -1.0], 0.9)
    g = p3.Grid3D(3.0, 64)
    values = []
    for eps in (0.25, 0.125):
        fam = RegularizationFamily(prof, ScalingLaw.SQRT_DELTA, eps)
        values.append(evolved_pairing(fam, g, 1.0, 1.0, h).value)
    limit = limit_3d(prof, 1.0, h).value
    flipped = limit_3d(prof, 1.0, h_reflected).value
    assert flipped < 0.05 and limit > 0.8
    assert abs(values[1] - limit) < abs(values[0] - limit) < 0.2


def test_epsilon_sweep_contract():
    at = lambda e: type("R", (), {"value": 1.0 + e, "epsilon": e})()
    sw = epsilon_sweep(at, [0.4, 0.2, 0.1, 0.05], 1.0, rel_tol=0.1)
    assert sw.verdict == "converged" and sw.slope == pytest.approx(1.0)
    with pytest.raises(ValueError):
        epsilon_sweep(at, [0.4, 0.2, 0.1], 1.0)
    with pytest.raises(ValueError):
        epsilon_sweep(at, [0.4, 0.1, 0.2, 0.05], 1.0)
    noisy = epsilon_sweep(lambda e: type("R", (), {"value": 1.0 + (0.3 if e == 0.1 else e), "epsilon": e})(),
                          [0.4, 0.2, 0.1, 0.05], 1.0)
    assert not noisy.monotone and noisy.verdict == "inconclusive"


def test_tail_slope_uses_last_half():
    eps = [1.0, 0.5, 0.25, 0.125]
    err = [0.3, 0.5, 0.25 ** 2, 0.125 ** 2]
    assert tail_slope(eps, err) == pytest.approx(2.0)


def test_divergence_check_laws():
    prof = bump_profile(1, [1, 0], radius=1.0)
    g = p1.Grid1D(4.0, 4096)
    h = plateau_test_function(1, 0.5 + 0.4 + 1e-9, 1.5)
    delta = divergence_check(RegularizationFamily(prof, ScalingLaw.DELTA, 0.4), 0.5, h, [0.4, 0.2, 0.1],
                             lambda e: g)
    assert delta.slope == pytest.approx(1.0, abs=1e-6)
    sq = divergence_check(RegularizationFamily(prof, ScalingLaw.SQRT_DELTA, 0.4), 0.5, h, [0.4, 0.2, 0.1],
                          lambda e: g)
    assert sq.slope == pytest.approx(0.0, abs=1e-6)
    t0 = divergence_check(RegularizationFamily(prof, ScalingLaw.DELTA, 0.4), 0.0, h, [0.4, 0.2], lambda e: g)
    assert t0.values == pytest.approx([0.4 ** -1, 0.2 ** -1], rel=1e-10)


def test_divergence_check_rejects():
    g = p1.Grid1D(4.0, 1024)
    prof = bump_profile(1, [1, 0], radius=1.0)
    narrow = plateau_test_function(1, 0.2, 1.0)
    with pytest.raises(ValueError):
        divergence_check(RegularizationFamily(prof, ScalingLaw.DELTA, 0.4), 0.5, narrow, [0.4, 0.2], lambda e: g)
    with pytest.raises(ValueError):
        divergence_check(RegularizationFamily(aligned_pair(), ScalingLaw.DELTA, 0.4), 0.5, narrow, [0.4], lambda e: g)


def test_make_test_function():
    h = make_test_function("plateau", 3, inner=0.2, outer=0.5)
    assert h.at([0.1, 0.0, 0.0]) == pytest.approx(1.0)
    assert h.at([0.0, 0.6, 0.0]) == 0.0
    with pytest.raises(KeyError):
        make_test_function("sinc", 1)
    b = bump_test_function(1, 0.5, 2.0)
    xi = np.array([0.0, 1.3])
    x = np.linspace(-1.5, 2.5, 40001)
    direct = [trapezoid(b(x) * np.exp(1j * s * x), x) / np.sqrt(2 * np.pi) for s in xi]
    assert np.allclose(b.inverse_fourier(xi), direct, atol=1e-9)
