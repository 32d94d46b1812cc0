import numpy as np
import pytest

from simapprox.approx import ModulusProfile, near_best
from simapprox.constructions import (
    Compact,
    calibrate_power,
    fit_interior_decay,
    hermite_correct,
    lagrange_basis,
    localized_correct,
    node_groups,
    rho_comparison_constant,
    theorem1_pipeline,
    theorem2d_pipeline,
    theorem3_pipeline,
    walsh_correct,
)
from simapprox.errors import DegreeError, InvalidArgument
from simapprox.functions import branch, entire, from_polynomial, pole
from simapprox.geometry import builtin_domain
from simapprox.polynomial import CPolynomial, Frame, frame_for

DISK = builtin_domain("disk")
DELTAS = np.geomspace(1e-5, 1.8, 24)


def _sqrt_profile(k=1):
    return ModulusProfile.from_table(k, DELTAS, np.sqrt(DELTAS), 0.5)


def _lip_profile(k=1):
    return ModulusProfile.from_table(k, DELTAS, DELTAS, 1.0)


def _roots(N, r=1.0, shift=0.0):
    return r * np.exp(1j * (shift + 2 * np.pi * np.arange(N) / N))


def test_lagrange_basis_is_cardinal():
    z = _roots(5, shift=0.3)
    L = lagrange_basis(z, Frame())
    vals = np.array([l(z) for l in L])
    assert np.allclose(vals, np.eye(5), atol=1e-12)


def test_walsh_keeps_interpolant():
    f = entire()
    z = _roots(4)
    pstar = walsh_correct(CPolynomial([], frame_for(DISK)), f, z, 8)
    p = walsh_correct(pstar, f, z, 8)
    assert np.max(np.abs(p.coef[: len(pstar.coef)] - pstar.coef)) <= 1e-12


def test_walsh_single_node_example():
    f = from_polynomial(CPolynomial([0, 0, 1], Frame()))
    p = walsh_correct(CPolynomial([], Frame()), f, [1.0], 4)
    z = np.array([0.0, 2.0, 1j])
    assert np.allclose(p(z), 1.0)


def test_walsh_random_nodes_near_best_constant(rng):
    f = pole(2.0)
    z = np.exp(2j * np.pi * np.sort(rng.uniform(0, 1, 5)))
    best = near_best(f, DISK, 20)
    p = walsh_correct(best.poly, f, z, 20)
    assert np.max(np.abs(p(z) - f(z))) <= 1e-10
    zb, _, _ = DISK.sample_boundary(1024)
    C = np.max(np.abs(f(zb) - p(zb))) / best.error
    assert np.isfinite(C) and C <= 1e3


def test_walsh_degree_check():
    with pytest.raises(DegreeError):
        walsh_correct(CPolynomial([], Frame()), entire(), _roots(6), 4)
    with pytest.raises(InvalidArgument):
        walsh_correct(CPolynomial([], Frame()), entire(), [1.0, 1.0], 4)


def test_localized_correct_interpolates_and_interior_nodes_use_v_one(maps):
    f = branch(0.5, 1.0)
    z = np.r_[_roots(3), 0.2j]
    t = near_best(f, DISK, 12).poly
    u, kernels = localized_correct(t, f, z, maps["disk"], 12, power=2)
    assert kernels[-1] is None and all(k is not None for k in kernels[:-1])
    assert np.max(np.abs((t + u)(z) - f(z))) <= 1e-9 * (1 + np.max(np.abs(f(z))))


def test_theorem1_entire_example(maps):
    f = entire()
    z = _roots(3, shift=0.1)
    res = theorem1_pipeline(f, DISK, 1, z, 32, profile=_lip_profile(), emap=maps["disk"])
    assert res.node_residuals.max() <= 1e-10
    assert res.boundary_error <= 1e-6
    assert res.degree <= 32


def test_theorem1_degree_precondition(maps):
    with pytest.raises(DegreeError):
        theorem1_pipeline(entire(), DISK, 2, _roots(8), 9, profile=_lip_profile(), emap=maps["disk"])
    with pytest.raises(InvalidArgument):
        theorem1_pipeline(entire(), DISK, 1, _roots(2), 16, mode="slow", emap=maps["disk"])


def test_theorem1_monotone_budget_and_max_modulus(maps):
    f = branch(0.5, 1.0)
    z = np.r_[1.0, _roots(3, shift=1.0)]
    K = [Compact(0, 0.5)]
    runs = [theorem1_pipeline(f, DISK, 1, z, n, compacts=K, profile=_sqrt_profile(), emap=maps["disk"])
            for n in (16, 32)]
    assert runs[1].boundary_error <= 1.1 * runs[0].boundary_error
    for r in runs:
        assert r.max_modulus_ok
        assert r.residual_ratio <= 1e-9
        assert np.all(np.isfinite(r.boundary[0].ratio))


def test_rho_comparison_constant_on_disk(maps):
    for n in (16, 64):
        assert rho_comparison_constant(maps["disk"], _sqrt_profile(), n, 1) <= 32


def test_hermite_matches_trivially(maps):
    f = entire()
    z = np.array([1.0, -1.0])
    # t interpolating exp and its first two derivatives at +-1 (degree 5)
    t = near_best(f, DISK, 24).poly
    t = t + hermite_correct(t, f, z, 24, 2, maps["disk"])
    u = hermite_correct(t, f, z, 24, 2, maps["disk"])
    assert u.norm() <= 1e-9


def test_hermite_single_node_square(maps):
    f = from_polynomial(CPolynomial([0, 0, 1], frame_for(DISK)))
    t = CPolynomial([], frame_for(DISK))
    p = t + hermite_correct(t, f, [1.0], 8, 1, maps["disk"])
    d = p.derivatives(np.array([1.0]), 1)
    assert abs(d[0, 0] - 1) <= 1e-9 and abs(d[1, 0] - 2) <= 1e-9


def test_hermite_two_nodes_exp(maps):
    f = entire()
    z = np.array([1.0, -1.0])
    t = near_best(f, DISK, 8).poly
    p = t + hermite_correct(t, f, z, 16, 2, maps["disk"])
    d = p.derivatives(z, 2)
    for l in range(3):
        assert np.allclose(d[l], np.exp(z), atol=1e-8)


def test_hermite_rejects_bad_input(maps):
    t = CPolynomial([], frame_for(DISK))
    with pytest.raises(InvalidArgument):
        hermite_correct(t, entire(), [0.5], 8, 1, maps["disk"])
    with pytest.raises(InvalidArgument):
        hermite_correct(t, pole(2.0, order=1), [1.0], 8, 2, maps["disk"])
    with pytest.raises(DegreeError):
        hermite_correct(t, entire(), _roots(4), 6, 1, maps["disk"])


def test_theorem2d_residuals(maps):
    f = branch(2.5, 1.0)
    z = _roots(3, shift=0.4)
    res = theorem2d_pipeline(f, DISK, 1, 1, z, 32, profile=_sqrt_profile(), emap=maps["disk"])
    assert res.residual_ratio <= 1e-8
    assert set(res.boundary) == {0, 1}
    assert np.all(np.isfinite(res.boundary[1].ratio))


def test_calibrate_power_disk(maps):
    assert calibrate_power(maps["disk"], 8) == 2


def test_node_groups_partition(maps):
    z = _roots(16)
    zb, _, _ = DISK.sample_boundary(64)
    g = node_groups(maps["disk"], z, zb, 4)
    assert set(np.unique(g)) <= {0, 1, 2}
    assert np.all(np.sum(g == 0, axis=1) >= 1)


def test_theorem3_disk_roots_of_unity(maps):
    f = branch(0.5, 1.0)
    res = theorem3_pipeline(f, DISK, 1, 8, 0.25, nodes=_roots(8), profile=_sqrt_profile(),
                            emap=maps["disk"])
    assert res.n == 10 and res.degree <= 10
    assert res.node_residuals.max() <= 1e-9


@pytest.mark.parametrize("N", [16, 32, 64])
def test_theorem3_near_group_size(maps, N):
    eps = 0.25
    res = theorem3_pipeline(branch(0.5, 1.0), DISK, 1, N, eps, nodes=_roots(N, shift=0.05),
                            profile=_sqrt_profile(), emap=maps["disk"])
    assert res.diagnostics["near_group_max"] <= 8 / eps
    assert res.degree <= (1 + eps) * N + 1


def test_theorem3_segment_is_not_jordan(maps):
    S = builtin_domain("segment")
    res = theorem3_pipeline(pole(2.0), S, 1, 8, 0.5, profile=_lip_profile(), emap=maps["segment"])
    assert res.diagnostics["jordan_domain"] is False
    assert res.residual_ratio <= 1e-9


def test_theorem3_eps_range(maps):
    with pytest.raises(InvalidArgument):
        theorem3_pipeline(entire(), DISK, 1, 8, 0.0, nodes=_roots(8), emap=maps["disk"])


def test_fit_interior_decay_recovers_alpha():
    ns = np.array([8, 16, 32, 64, 128])
    errs = 3.0 * np.exp(-0.7 * ns ** 0.5)
    fit = fit_interior_decay(ns, errs)
    assert fit["alpha"] == pytest.approx(0.5)
    assert fit["c"] == pytest.approx(0.7, rel=1e-9)
    assert fit["r2"] == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        fit_interior_decay([1, 2], [1e-2, 1e-3])


def test_compact_parse():
    c = Compact.parse("disk:0.5,0,0.25")
    assert c.center == 0.5 and c.radius == 0.25
    pts = c.points(32)
    # rim samples plus the centre
    assert np.all(np.abs(pts - 0.5) <= 0.25 + 1e-15)
    assert np.sum(np.isclose(np.abs(pts - 0.5), 0.25)) == 32
