import mpmath
import numpy as np
import pytest

from simapprox.conformal import build_map, distortion_exponent, level_curve, rho_delta
from simapprox.errors import DomainError, InvalidArgument
from simapprox.geometry import Continuum

ALL = ["disk", "ellipse", "segment", "square", "lshape"]


def _test_w(count=256, seed=7):
    rng = np.random.default_rng(seed)
    return rng.uniform(1.001, 4, count) * np.exp(1j * rng.uniform(0, 2 * np.pi, count))


def test_disk_is_identity(maps):
    m = maps["disk"]
    assert m.capacity == 1
    assert m.phi(np.array([2.0]))[0] == 2
    assert m.psi(np.array([3j]))[0] == 3j


def test_segment_closed_forms(maps):
    m = maps["segment"]
    assert m.capacity == pytest.approx(0.5)
    assert m.phi(np.array([2.0]))[0] == pytest.approx(2 + np.sqrt(3), abs=1e-12)
    assert m.psi(np.array([2.0]))[0] == pytest.approx(1.25, abs=1e-14)
    assert m.phi(np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-12)


def test_ellipse_capacity_closed_form(maps):
    # semi-axes a, b: capacity (a + b) / 2
    assert maps["ellipse"].capacity == pytest.approx((1.0 + 0.6) / 2, rel=1e-12)


def test_square_capacity_against_gamma_formula(maps):
    # unit square: Gamma(1/4)^2 / (4 pi^{3/2})
    exact = float(mpmath.gamma(0.25) ** 2 / (4 * mpmath.pi ** 1.5))
    assert maps["square"].capacity == pytest.approx(exact, rel=1e-5)


def test_square_prevertices_are_fourth_roots_up_to_rotation(maps):
    m = maps["square"]
    w = m.phi(m.domain.vertices)
    th = np.sort(np.mod(np.angle(w), 2 * np.pi))
    assert np.allclose(np.diff(th), np.pi / 2, atol=1e-5)


@pytest.mark.parametrize("name", ALL)
def test_round_trip(maps, name):
    m = maps[name]
    w = _test_w()
    assert np.max(np.abs(m.phi(m.psi(w)) - w)) <= 1e-8


@pytest.mark.parametrize("name", ALL)
def test_boundary_maps_to_unit_circle(maps, name):
    m = maps[name]
    z, _, _ = m.domain.sample_boundary(256)
    assert np.max(np.abs(np.abs(m.phi(z)) - 1)) <= 1e-6


@pytest.mark.parametrize("name", ALL)
def test_normalization_at_infinity(maps, name):
    m = maps[name]
    w = np.array([1e6, 1e6j])
    assert np.allclose(m.psi(w) / (m.capacity * w), 1, atol=1e-5)


@pytest.mark.parametrize("name", ALL)
def test_exterior_maps_outside_unit_disk(maps, name):
    m = maps[name]
    z = m.domain.centroid + 1.3 * m.domain.diameter * np.exp(1j * np.linspace(0, 2 * np.pi, 50))
    assert np.all(np.abs(m.phi(z)) > 1)


def test_phi_rejects_interior(maps):
    with pytest.raises(DomainError):
        maps["disk"].phi(np.array([0.1]))
    with pytest.raises(DomainError):
        maps["disk"].psi_checked(np.array([0.5]))


def test_level_curve_examples(maps):
    lc = level_curve(maps["disk"], 0.5, 64)
    assert np.allclose(np.abs(lc.points), 1.5)
    d = 0.3
    lc = level_curve(maps["segment"], d, 128)
    a = ((1 + d) + 1 / (1 + d)) / 2
    b = ((1 + d) - 1 / (1 + d)) / 2
    assert np.max(np.abs((lc.points.real / a) ** 2 + (lc.points.imag / b) ** 2 - 1)) < 1e-12
    with pytest.raises(InvalidArgument):
        level_curve(maps["disk"], 0.1, 32)


@pytest.mark.parametrize("name", ["ellipse", "square", "lshape"])
def test_level_curve_points_on_level(maps, name):
    lc = level_curve(maps[name], 0.2, 128)
    assert np.max(np.abs(np.abs(maps[name].phi(lc.points)) - 1.2)) <= 1e-8


def test_square_level_curve_hausdorff(maps):
    m = maps["square"]
    lc = level_curve(m, 0.01, 512)
    z, _, _ = m.domain.sample_boundary(512)
    d1 = np.max(np.min(np.abs(lc.points[:, None] - z[None, :]), axis=1))
    d2 = np.max(np.min(np.abs(z[:, None] - lc.points[None, :]), axis=1))
    assert max(d1, d2) <= 0.05


def test_rho_closed_forms(maps):
    z, _, _ = maps["disk"].domain.sample_boundary(32)
    for d in (0.1, 0.01, 0.001):
        assert np.max(np.abs(rho_delta(maps["disk"], z, d) - d)) <= 1e-10
        r = float(rho_delta(maps["segment"], np.array([1.0]), d)[0])
        assert r == pytest.approx(d * d / (2 * (1 + d)), abs=1e-8)
        r0 = float(rho_delta(maps["segment"], np.array([0.0]), d)[0])
        assert r0 == pytest.approx(((1 + d) - 1 / (1 + d)) / 2, rel=1e-6)


def test_rho_ellipse_against_mpmath_minimization():
    E = Continuum.ellipse(0, 1.0, 0.6)
    m = build_map(E)
    z = complex(np.cos(0.7), 0.6 * np.sin(0.7))
    d = 0.05
    R = 1 + d
    c = m.capacity
    # level curve of the ellipse map: Psi(w) = c (w + q / w) with q = (a - b)/(a + b)
    q = (1.0 - 0.6) / (1.0 + 0.6)

    def dist(t):
        w = R * mpmath.expj(t)
        p = c * (w + q / w)
        return abs(p - z)

    roots = [mpmath.findroot(lambda t: mpmath.diff(dist, t), t0) for t0 in (0.6, 0.7, 0.8)]
    best = min(roots, key=dist)
    exact = float(dist(best))
    assert float(rho_delta(m, np.array([z]), d)[0]) == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("name", ["disk", "segment", "square"])
def test_rho_doubling_bound(maps, name):
    m = maps[name]
    z, _, _ = m.domain.sample_boundary(64)
    for j in range(1, 11):
        d = 2.0 ** -j
        assert np.all(rho_delta(m, z, 2 * d) <= 8 * rho_delta(m, z, d))


@pytest.mark.parametrize("name", ALL)
def test_rho_neighbour_comparability(maps, name):
    m = maps[name]
    z, _, _ = m.domain.sample_boundary(96)
    for d in (0.5, 0.1, 0.02):
        r = np.asarray(rho_delta(m, z, d))
        near = np.abs(z[:, None] - z[None, :]) <= r[:, None]
        q = (r[None, :] / r[:, None])[near]
        assert q.min() >= 0.1 and q.max() <= 10


def test_square_distortion_exponent(maps):
    fit = distortion_exponent(maps["square"])
    assert fit["alpha"] >= 0.2
    assert np.isfinite(fit["C"])
