import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from simapprox.errors import InvalidArgument
from simapprox.geometry import L_SHAPE, Continuum, builtin_domain, h_constant, parse_domain


def test_disk_quarter_samples():
    pts = [b.location for b in builtin_domain("disk").boundary_samples(4)]
    assert np.allclose(pts, [1, 1j, -1, -1j], atol=1e-15)


def test_segment_samples_include_endpoints():
    z, _, _ = builtin_domain("segment").sample_boundary(4)
    assert np.any(np.isclose(z, -1)) and np.any(np.isclose(z, 1))


def test_square_samples_include_vertices_and_even_gaps():
    E = builtin_domain("square")
    z, _, _ = E.sample_boundary(64)
    for v in E.vertices:
        assert np.min(np.abs(z - v)) < 1e-14
    gaps = np.abs(np.diff(np.r_[z, z[0]]))
    assert gaps.max() / gaps.min() <= 4


@pytest.mark.parametrize("name", ["disk", "ellipse", "segment", "square", "lshape"])
def test_samples_classify_as_boundary(name):
    E = builtin_domain(name)
    z, _, _ = E.sample_boundary(200)
    assert np.all(E.classify_many(z) == "boundary")


@pytest.mark.parametrize("name", ["disk", "ellipse", "square", "lshape"])
def test_finer_samples_are_dense_near_coarse_ones(name):
    E = builtin_domain(name)
    M = 50
    coarse, _, _ = E.sample_boundary(M)
    fine, _, _ = E.sample_boundary(2 * M)
    gap = np.min(np.abs(coarse[:, None] - fine[None, :]), axis=1)
    assert gap.max() <= E.diameter / M


def test_classify_examples():
    D = builtin_domain("disk")
    S = builtin_domain("segment")
    assert D.classify(0) == "interior"
    assert D.classify(2) == "exterior"
    assert D.classify(1j) == "boundary"
    assert S.classify(0) == "boundary"


def test_classify_agrees_with_shapely_on_lshape(rng):
    E = builtin_domain("lshape")
    poly = shapely.Polygon([(z.real, z.imag) for z in L_SHAPE])
    pts = rng.uniform(-0.5, 2.5, 400) + 1j * rng.uniform(-0.5, 2.5, 400)
    cls = E.classify_many(pts)
    dist = shapely.distance(poly.exterior, shapely.points(pts.real, pts.imag))
    inside = shapely.contains_xy(poly, pts.real, pts.imag)
    clear = dist > 1e-6
    assert np.all((cls[clear] == "interior") == inside[clear])


@pytest.mark.parametrize("vertices", [
    [0, 1, 1 + 1j, 2j - 1, 0.5j + 2],        # self-intersecting
    [0, 1, 1],                                # repeated vertex
    [0, 1],                                   # too few
    [0, 1, 2, 1j],                            # collinear consecutive edges
])
def test_invalid_polygons(vertices):
    with pytest.raises(InvalidArgument):
        Continuum.polygon(vertices)


def test_clockwise_polygon_is_reoriented():
    E = Continuum.polygon([0, 1j, 1 + 1j, 1])
    v = E.vertices
    area2 = np.sum(v.real * np.roll(v.imag, -1) - np.roll(v.real, -1) * v.imag)
    assert area2 > 0


def test_invalid_parameters():
    with pytest.raises(InvalidArgument):
        Continuum.disk(0, 0)
    with pytest.raises(InvalidArgument):
        Continuum.segment(1, 1)
    with pytest.raises(InvalidArgument):
        Continuum.ellipse(0, 0.5, 1.0)
    with pytest.raises(InvalidArgument):
        builtin_domain("blob")


def test_parse_domain_forms():
    assert parse_domain("disk:1,2,3").params["radius"] == 3
    assert parse_domain("segment:0,0,2,0").diameter == pytest.approx(2)
    sq = parse_domain("polygon:0,0,1,0,1,1,0,1")
    assert sq.convex and sq.kind == "polygon"
    assert parse_domain(sq.to_json()).to_dict() == sq.to_dict()
    with pytest.raises(InvalidArgument):
        parse_domain("disk:1,2")


@settings(max_examples=30, deadline=None)
@given(cx=st.floats(-5, 5), cy=st.floats(-5, 5), r=st.floats(0.1, 10))
def test_disk_json_round_trip(cx, cy, r):
    E = Continuum.disk(complex(cx, cy), r)
    back = Continuum.from_json(E.to_json())
    assert back.to_dict() == E.to_dict()


def test_nearest_point_on_disk_matches_radial_projection(rng):
    E = Continuum.disk(0.5 + 0.5j, 2.0)
    z = 0.5 + 0.5j + rng.uniform(2.5, 5, 50) * np.exp(1j * rng.uniform(0, 2 * np.pi, 50))
    proj = 0.5 + 0.5j + 2.0 * (z - 0.5 - 0.5j) / np.abs(z - 0.5 - 0.5j)
    assert np.allclose(E.nearest_point(z), proj, atol=1e-12)
    assert np.allclose(E.distance(z), np.abs(z - 0.5 - 0.5j) - 2.0, atol=1e-12)


def test_diameter_and_perimeter():
    assert builtin_domain("disk").diameter == pytest.approx(2)
    assert builtin_domain("square").diameter == pytest.approx(np.sqrt(2))
    assert builtin_domain("disk").perimeter == pytest.approx(2 * np.pi)
    assert builtin_domain("square").perimeter == pytest.approx(4)


def test_outward_normal_on_disk():
    E = builtin_domain("disk")
    for th in (0.1, 1.0, 2.5):
        z = np.exp(1j * th)
        assert abs(E.outward_normal(z) - z) < 1e-9


@pytest.mark.parametrize("name", ["disk", "segment", "ellipse", "square"])
def test_h_constant_convex(name):
    assert abs(h_constant(builtin_domain(name)) - 1.0) <= 1e-9


def _lshape_geodesic(z, w, poly):
    """Exact in-E path length: the chord, or the bend through the reentrant corner."""
    line = shapely.LineString([(z.real, z.imag), (w.real, w.imag)])
    if poly.buffer(1e-12).covers(line):
        return abs(z - w)
    c = 1 + 1j
    return abs(z - c) + abs(c - w)


def test_h_constant_lshape_against_corner_oracle():
    E = builtin_domain("lshape")
    M = 64
    val = h_constant(E, M)
    poly = shapely.Polygon([(z.real, z.imag) for z in L_SHAPE])
    z, _, _ = E.sample_boundary(M)
    pts = np.unique(np.r_[E.vertices, z])
    best = 1.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = max(best, _lshape_geodesic(pts[i], pts[j], poly) / abs(pts[i] - pts[j]))
    assert 1 < val <= 3
    assert val == pytest.approx(best, rel=1e-9)


def test_interior_grid_is_inside():
    E = builtin_domain("lshape")
    g = E.interior_grid(8)
    assert len(g) > 0 and np.all(E.classify_many(g) == "interior")
