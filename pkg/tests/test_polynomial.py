import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from simapprox.errors import DegreeError, InvalidArgument, NotDivisible
from simapprox.polynomial import (
    DEGREE_CAP,
    CPolynomial,
    Frame,
    NodeSet,
    divide_linear,
    leja_order,
    node_poly,
)

MONO = Frame()
SHIFTED = Frame(0.5 + 0.25j, 2.0, "monomial")
CHEB = Frame(0.0, 1.0, "chebyshev")

coef_lists = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                      min_size=1, max_size=8)


def test_evaluation_matches_numpy():
    c = np.array([1, 2 - 1j, 0.5, 3j])
    z = np.linspace(-1, 1, 7) + 0.3j
    assert np.allclose(CPolynomial(c, MONO)(z), P.polyval(z, c))
    assert np.allclose(CPolynomial(c, CHEB)(z), C.chebval(z, c))
    zh = (z - SHIFTED.center) / SHIFTED.scale
    assert np.allclose(CPolynomial(c, SHIFTED)(z), P.polyval(zh, c))


@settings(max_examples=40, deadline=None)
@given(a=coef_lists, b=coef_lists)
def test_arithmetic_matches_pointwise(a, b):
    z = np.array([0.3 + 0.1j, -0.7, 0.9j, 1.2 - 0.4j])
    for fr in (MONO, SHIFTED, CHEB):
        p, q = CPolynomial(a, fr), CPolynomial(b, fr)
        scale = 1 + max(np.max(np.abs(p(z))), np.max(np.abs(q(z)))) ** 2
        assert np.allclose((p + q)(z), p(z) + q(z), atol=1e-9 * scale)
        assert np.allclose((p - q)(z), p(z) - q(z), atol=1e-9 * scale)
        assert np.allclose((p * q)(z), p(z) * q(z), atol=1e-9 * scale)


def test_power_and_linear():
    lin = CPolynomial.linear(0.5j, SHIFTED)
    z = np.array([0.0, 1.0, 2 + 1j])
    assert np.allclose(lin(z), z - 0.5j)
    assert np.allclose((lin ** 3)(z), (z - 0.5j) ** 3)
    assert (lin ** 0).degree == 0


def test_derivatives_against_numpy():
    c = np.array([1, -2, 3, 0.5j, 1])
    p = CPolynomial(c, MONO)
    z = np.array([0.2, -0.4 + 0.3j])
    d = p.derivatives(z, 3)
    for m in range(4):
        assert np.allclose(d[m], P.polyval(z, P.polyder(c, m)))
    pc = CPolynomial(c, Frame(0.0, 2.0, "chebyshev"))
    assert np.allclose(pc.deriv(2)(z), C.chebval(z / 2, C.chebder(c, 2)) / 4)


def test_from_roots_vanishes_at_roots_degree_64():
    roots = np.cos(np.pi * (np.arange(64) + 0.5) / 64)
    p = CPolynomial.from_roots(roots, CHEB)
    assert p.degree == 64
    assert np.max(np.abs(p(roots))) <= 1e-12 * np.max(np.abs(p(np.linspace(-1, 1, 200))))


def test_leja_order_properties():
    z = np.exp(2j * np.pi * np.arange(16) / 16) * np.linspace(1, 2, 16)
    o = leja_order(z)
    assert sorted(o.tolist(), key=lambda c: (c.real, c.imag)) == sorted(z.tolist(), key=lambda c: (c.real, c.imag))
    assert abs(o[0]) == pytest.approx(np.max(np.abs(z)))
    # greedy rule: each point maximizes the distance product to the earlier ones
    for j in range(1, len(o)):
        prods = [np.prod(np.abs(c - o[:j])) for c in o[j:]]
        assert np.prod(np.abs(o[j] - o[:j])) == pytest.approx(max(prods))


@settings(max_examples=40, deadline=None)
@given(a=coef_lists, zeta=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_divide_linear_inverts_multiplication(a, zeta):
    for fr in (MONO, SHIFTED, CHEB):
        s = CPolynomial(a, fr)
        p = s * CPolynomial.linear(zeta, fr)
        q, rem = divide_linear(p, zeta)
        z = np.array([0.1, -0.5 + 0.2j, 0.8j])
        assert np.allclose(q(z), s(z), atol=1e-8 * (1 + s.norm()))


def test_divide_linear_rejects_nonzero_remainder():
    p = CPolynomial([1.0, 0.0, 1.0], MONO)
    with pytest.raises(NotDivisible) as info:
        divide_linear(p, 1.0)
    assert info.value.remainder == pytest.approx(2.0)


def test_frames_must_agree():
    with pytest.raises(InvalidArgument):
        CPolynomial([1, 2], MONO) + CPolynomial([1, 2], CHEB)


def test_degree_cap():
    with pytest.raises(DegreeError):
        CPolynomial(np.ones(DEGREE_CAP + 2), MONO)


def test_to_raw_matches_values():
    p = CPolynomial([1, 2, 3], Frame(1 + 1j, 0.5, "chebyshev"))
    raw = p.to_raw()
    z = np.array([0.7, 1.2 + 0.9j])
    assert np.allclose(P.polyval(z, raw), p(z))


def test_dict_round_trip():
    p = CPolynomial([1, 2j, 3], SHIFTED)
    q = CPolynomial.from_dict(p.to_dict())
    assert q.frame == p.frame and np.array_equal(q.coef, p.coef)


def test_node_set_validation_and_node_poly():
    with pytest.raises(InvalidArgument):
        NodeSet((0.0, 1.0, 1.0))
    with pytest.raises(InvalidArgument):
        NodeSet((0.0,), r=-1)
    z = np.array([1, 1j, -1, -1j])
    q, dq = node_poly(z, MONO)
    assert np.allclose(q(np.array([2.0])), 2 ** 4 - 1)
    # q = z^4 - 1 so q'(z_j) = 4 z_j^3
    assert np.allclose(dq, 4 * z ** 3)
