"""Complex polynomials stored in a shifted and scaled coordinate.

Every polynomial lives in a :class:`Frame` ``zhat = (z - center) / scale``.
The coefficient basis is monomial in ``zhat`` by default; slit-like domains
use Chebyshev polynomials of ``zhat`` because monomials are hopelessly
ill-conditioned on an interval. Arithmetic is delegated to
``numpy.polynomial``; mixing frames is an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _mono

from .errors import DegreeError, InvalidArgument, NotDivisible

DEGREE_CAP = 4096

_BASES = {
    "monomial": (_mono.polyval, _mono.polymul, _mono.polyadd, _mono.polysub,
                 _mono.polyder, _mono.polymulx),
    "chebyshev": (_cheb.chebval, _cheb.chebmul, _cheb.chebadd, _cheb.chebsub,
                  _cheb.chebder, _cheb.chebmulx),
}


@dataclass(frozen=True)
class Frame:
    center: complex = 0j
    scale: complex = 1 + 0j
    basis: str = "monomial"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "scale", complex(self.scale))
        if self.basis not in _BASES:
            raise InvalidArgument(f"unknown basis {self.basis!r}")
        if self.scale == 0:
            raise InvalidArgument("frame scale must be nonzero")

    def local(self, z):
        return (np.asarray(z, dtype=complex) - self.center) / self.scale

    def to_dict(self) -> dict:
        c, s = complex(self.center), complex(self.scale)
        return {"center": [c.real, c.imag], "scale": [s.real, s.imag], "basis": self.basis}

    @classmethod
    def from_dict(cls, d: dict) -> "Frame":
        return cls(complex(*d["center"]), complex(*d["scale"]), d.get("basis", "monomial"))


def frame_for(E) -> Frame:
    """Frame centred at the centroid of E with half-diameter scale."""
    if E.kind == "segment":
        a, b = E.params["a"], E.params["b"]
        return Frame((a + b) / 2, (b - a) / 2, "chebyshev")
    return Frame(complex(E.centroid), complex(E.diameter / 2), "monomial")


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if len(nz) else c[:0]


class CPolynomial:
    """Polynomial with complex coefficients in a fixed frame."""

    __slots__ = ("coef", "frame")

    def __init__(self, coef, frame: Frame | None = None):
        self.frame = frame or Frame()
        self.coef = _trim(np.atleast_1d(np.asarray(coef, dtype=complex)))
        if len(self.coef) - 1 > DEGREE_CAP:
            raise DegreeError(f"degree {len(self.coef) - 1} exceeds cap {DEGREE_CAP}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value: complex, frame: Frame) -> "CPolynomial":
        return cls([value], frame)

    @classmethod
    def linear(cls, zeta: complex, frame: Frame) -> "CPolynomial":
        """The polynomial ``z - zeta``."""
        zh = complex(frame.local(zeta))
        # z - zeta = scale * (zhat - zhat(zeta)); T_1 = x so both bases agree
        return cls(frame.scale * np.array([-zh, 1.0]), frame)

    @classmethod
    def from_roots(cls, roots, frame: Frame) -> "CPolynomial":
        """``prod (z - r)``, multiplied in Leja order to keep partial products tame."""
        p = cls.constant(1.0, frame)
        for r in leja_order(roots, frame):
            p = p * cls.linear(r, frame)
        return p

    # -- basic properties -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coef) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coef) == 0

    def _ops(self):
        return _BASES[self.frame.basis]

    def _check(self, other: "CPolynomial"):
        if other.frame != self.frame:
            raise InvalidArgument("polynomials live in different frames")

    def norm(self) -> float:
        return float(np.max(np.abs(self.coef))) if len(self.coef) else 0.0

    # -- evaluation -------------------------------------------------------
    def __call__(self, z):
        zh = self.frame.local(z)
        if self.is_zero:
            return np.zeros_like(zh)
        if self.frame.basis == "monomial":
            # Horner
            out = np.full(zh.shape, self.coef[-1], dtype=complex)
            for c in self.coef[-2::-1]:
                out = out * zh + c
            return out
        return self._ops()[0](zh, self.coef)

    def derivatives(self, z, lmax: int) -> np.ndarray:
        """Values ``p^(l)(z)`` for ``l = 0..lmax``; shape ``(lmax+1,) + z.shape``."""
        zh = self.frame.local(z)
        out = np.zeros((lmax + 1,) + zh.shape, dtype=complex)
        if self.is_zero:
            return out
        if self.frame.basis == "monomial":
            # Horner with derivative accumulation: out[l] holds p^(l)/l!
            out[0] = self.coef[-1]
            for c in self.coef[-2::-1]:
                for l in range(lmax, 0, -1):
                    out[l] = out[l] * zh + out[l - 1]
                out[0] = out[0] * zh + c
            for l in range(2, lmax + 1):
                out[l] *= math.factorial(l)
        else:
            c = self.coef
            for l in range(lmax + 1):
                out[l] = self._ops()[0](zh, c) if len(c) else 0
                c = self._ops()[4](c) if len(c) > 1 else np.zeros(0, complex)
        scale_pow = self.frame.scale ** -np.arange(lmax + 1)
        return out * scale_pow.reshape((-1,) + (1,) * zh.ndim)

    def deriv(self, m: int = 1) -> "CPolynomial":
        if self.degree < m:
            return CPolynomial([], self.frame)
        return CPolynomial(self._ops()[4](self.coef, m) / self.frame.scale ** m, self.frame)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, CPolynomial):
            self._check(other)
            return other
        return CPolynomial.constant(complex(other), self.frame)

    def __add__(self, other):
        o = self._coerce(other)
        return CPolynomial(self._ops()[2](self.coef if len(self.coef) else [0], o.coef if len(o.coef) else [0]), self.frame)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return CPolynomial(self._ops()[3](self.coef if len(self.coef) else [0], o.coef if len(o.coef) else [0]), self.frame)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return CPolynomial(-self.coef, self.frame)

    def __mul__(self, other):
        if not isinstance(other, CPolynomial):
            return CPolynomial(self.coef * complex(other), self.frame)
        self._check(other)
        if self.is_zero or other.is_zero:
            return CPolynomial([], self.frame)
        if self.degree + other.degree > DEGREE_CAP:
            raise DegreeError("product degree exceeds cap")
        return CPolynomial(self._ops()[1](self.coef, other.coef), self.frame)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return CPolynomial(self.coef / complex(other), self.frame)

    def __pow__(self, k: int):
        if k < 0:
            raise InvalidArgument("negative power")
        if k * max(self.degree, 0) > DEGREE_CAP:
            raise DegreeError("power degree exceeds cap")
        result = CPolynomial.constant(1.0, self.frame)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mulx(self) -> "CPolynomial":
        """Multiply by zhat."""
        if self.is_zero:
            return self
        return CPolynomial(self._ops()[5](self.coef), self.frame)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {"frame": self.frame.to_dict(),
                "coefficients": [[float(c.real), float(c.imag)] for c in self.coef]}

    @classmethod
    def from_dict(cls, d: dict) -> "CPolynomial":
        return cls([complex(a, b) for a, b in d["coefficients"]], Frame.from_dict(d["frame"]))

    def to_raw(self) -> np.ndarray:
        """Monomial coefficients in the raw coordinate z (ill-conditioned; display only)."""
        c = self.coef
        if self.frame.basis == "chebyshev":
            c = _cheb.cheb2poly(c)
        s, z0 = self.frame.scale, self.frame.center
        # p(z) = sum c_j ((z - z0)/s)^j
        out = np.zeros(max(len(c), 1), dtype=complex)
        shift = np.array([1.0 + 0j])
        lin = np.array([-z0 / s, 1 / s])
        for cj in c:
            out[: len(shift)] += cj * shift
            shift = _mono.polymul(shift, lin)
        return _trim(out)

    def __repr__(self) -> str:
        return f"CPolynomial(degree={self.degree}, basis={self.frame.basis})"


def divide_linear(p: CPolynomial, zeta: complex, rtol: float = 1e-9) -> tuple[CPolynomial, float]:
    """Quotient ``s`` with ``p(z) = (z - zeta) s(z)``; returns ``(s, |remainder|)``.

    Raises :class:`NotDivisible` when the remainder exceeds both ``rtol``
    times the coefficient norm of ``p`` and an absolute round-off floor.
    """
    fr = p.frame
    if p.is_zero:
        return CPolynomial([], fr), 0.0
    zh = complex(fr.local(zeta))
    if fr.basis == "monomial":
        c = p.coef
        n = len(c) - 1
        q = np.zeros(max(n, 1), dtype=complex)
        acc = c[-1]
        for j in range(n - 1, -1, -1):
            q[j] = acc
            acc = acc * zh + c[j]
        rem = acc
        q = q[:n] if n else q[:0]
    else:
        q, r = _cheb.chebdiv(p.coef, np.array([-zh, 1.0], dtype=complex))
        rem = r[0] if len(r) else 0.0
    rem = abs(rem)
    if rem > max(rtol * p.norm(), 1e-14):
        raise NotDivisible(f"remainder {rem:.3e} exceeds tolerance", rem)
    return CPolynomial(np.asarray(q) / fr.scale, fr), float(rem)


@dataclass(frozen=True)
class NodeSet:
    """Distinct interpolation nodes with uniform multiplicity ``r + 1``."""

    nodes: tuple
    r: int = 0

    def __post_init__(self):
        z = np.asarray(self.nodes, dtype=complex)
        if len(z) < 1:
            raise InvalidArgument("need at least one node")
        if self.r < 0:
            raise InvalidArgument("multiplicity order r must be >= 0")
        if len(z) > 1:
            d = np.abs(z[:, None] - z[None, :])
            scale = max(np.max(d), 1.0)
            np.fill_diagonal(d, np.inf)
            if np.min(d) <= 1e-12 * scale:
                raise InvalidArgument("interpolation nodes are not distinct")
        object.__setattr__(self, "nodes", tuple(complex(x) for x in z))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.nodes, dtype=complex)

    def __len__(self) -> int:
        return len(self.nodes)


def leja_order(points, frame: Frame | None = None) -> np.ndarray:
    """Points reordered so each maximizes the product of distances to its predecessors."""
    z = np.asarray(points, dtype=complex).ravel()
    if len(z) <= 2:
        return z
    zl = frame.local(z) if frame is not None else z
    order = [int(np.argmax(np.abs(zl)))]
    logsum = np.zeros(len(z))
    for _ in range(1, len(z)):
        with np.errstate(divide="ignore"):
            logsum += np.log(np.abs(zl - zl[order[-1]]))
        logsum[order] = -np.inf
        order.append(int(np.argmax(logsum)))
    return z[order]


def node_poly(nodes, frame: Frame) -> tuple[CPolynomial, np.ndarray]:
    """Monic ``q(z) = prod (z - z_j)`` and the derivative values ``q'(z_j)``."""
    ns = nodes if isinstance(nodes, NodeSet) else NodeSet(tuple(nodes))
    z = ns.array
    q = CPolynomial.from_roots(z, frame)
    dq = np.array([np.prod(zj - np.delete(z, j)) for j, zj in enumerate(z)], dtype=complex)
    if np.any(dq == 0):
        raise InvalidArgument("coincident nodes")
    return q, dq
