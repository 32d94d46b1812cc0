import mpmath
import numpy as np
import pytest

from simapprox.errors import InvalidArgument
from simapprox.functions import branch, entire, from_polynomial, logfac, parse_function, pole
from simapprox.geometry import builtin_domain
from simapprox.polynomial import CPolynomial, Frame

Z = [0.3 + 0.2j, -0.5 - 0.1j, 0.1j]


def _mp_derivs(fn, z, order):
    return [complex(mpmath.diff(fn, mpmath.mpc(z.real, z.imag), l)) for l in range(order + 1)]


@pytest.mark.parametrize("handle,fn", [
    (pole(2.0), lambda z: 1 / (z - 2)),
    (branch(0.5, 1.0), lambda z: mpmath.sqrt(1 - z)),
    (branch(1.5, 1.0), lambda z: (1 - z) ** mpmath.mpf(1.5)),
    (logfac(1.0), lambda z: (1 - z) * mpmath.log(1 - z)),
    (entire(), mpmath.exp),
])
def test_derivatives_against_mpmath(handle, fn):
    for z in Z:
        ref = _mp_derivs(fn, z, 4)
        got = [complex(handle.derivative(l, np.array([z]))[0]) for l in range(5)]
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-12)


def test_branch_vanishes_at_anchor():
    assert branch(0.5, 1.0)(np.array([1.0]))[0] == 0
    assert abs(branch(0.5, 1.0)(np.array([0.0]))[0] - 1) < 1e-15


def test_branch_cut_leaves_domain():
    D = builtin_domain("disk")
    f = branch(0.5, 1j, D)
    z, _, _ = D.sample_boundary(400)
    v = f(z)
    # continuity along the boundary: no jump across a cut
    jumps = np.abs(np.diff(np.r_[v, v[0]]))
    assert jumps.max() < 0.2


def test_branch_point_must_be_on_boundary():
    with pytest.raises(InvalidArgument):
        branch(0.5, 0.2, builtin_domain("disk"))
    with pytest.raises(InvalidArgument):
        branch(-1.0, 1.0)


def test_parse_function():
    D = builtin_domain("disk")
    assert parse_function("pole:2+1j", D).params["a"] == [2.0, 1.0]
    assert parse_function("branch:0.5,1", D).beta == 0.5
    assert parse_function("entire").name == "entire"
    with pytest.raises(InvalidArgument):
        parse_function("pole:0.5", D)
    with pytest.raises(InvalidArgument):
        parse_function("spline")


def test_derivative_handle_tags():
    f = branch(1.5, 1.0)
    assert f.derivative_handle(1).smoothness == "holder"
    assert f.derivative_handle(2).smoothness == "custom"
    with pytest.raises(InvalidArgument):
        pole(2.0, order=2).derivative(3, np.array([0.0]))


def test_from_polynomial():
    p = CPolynomial([1, 0, 3], Frame())
    f = from_polynomial(p)
    z = np.array([0.5, 1j])
    assert np.allclose(f.derivative(1, z), 6 * z)
    assert np.allclose(f.derivative(3, z), 0)
