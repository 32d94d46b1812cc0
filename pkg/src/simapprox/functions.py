"""Sampleable test functions with derivative evaluators and smoothness tags."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument

SMOOTHNESS_TAGS = ("analytic", "holder", "custom")


@dataclass(frozen=True)
class FunctionHandle:
    """A function ``f`` on E with optional derivatives ``f', f'', ...``.

    Parameters
    ----------
    evaluator : callable
        Vectorized map ``z -> f(z)``.
    derivatives : sequence of callables
        ``derivatives[l - 1]`` evaluates ``f^(l)``.
    smoothness : {"analytic", "holder", "custom"}
    beta : float, optional
        Hoelder exponent of ``f`` for the ``holder`` tag.
    """

    evaluator: Callable
    derivatives: Sequence[Callable] = ()
    smoothness: str = "custom"
    beta: float | None = None
    name: str = "f"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.smoothness not in SMOOTHNESS_TAGS:
            raise InvalidArgument(f"unknown smoothness tag {self.smoothness!r}")
        object.__setattr__(self, "derivatives", tuple(self.derivatives))

    def __call__(self, z):
        return np.asarray(self.evaluator(np.asarray(z, dtype=complex)), dtype=complex)

    @property
    def max_order(self) -> int:
        return len(self.derivatives)

    def derivative(self, l: int, z):
        """``f^(l)(z)``; ``l = 0`` is ``f`` itself."""
        if l == 0:
            return self(z)
        if l > self.max_order:
            raise InvalidArgument(f"{self.name}: derivative of order {l} not available")
        return np.asarray(self.derivatives[l - 1](np.asarray(z, dtype=complex)), dtype=complex)

    def derivative_handle(self, l: int) -> "FunctionHandle":
        """Handle for ``f^(l)`` carrying the remaining derivatives."""
        if l == 0:
            return self
        if l > self.max_order:
            raise InvalidArgument(f"{self.name}: derivative of order {l} not available")
        beta = None if self.beta is None else self.beta - l
        tag = self.smoothness
        if tag == "holder" and (beta is None or beta <= 0):
            tag = "custom"
        return FunctionHandle(self.derivatives[l - 1], self.derivatives[l:], tag, beta,
                              f"{self.name}^({l})", dict(self.params))

    def describe(self) -> dict:
        return {"name": self.name, "params": self.params, "smoothness": self.smoothness,
                "beta": self.beta, "derivatives": self.max_order}


def _branch_log(u, direction: complex):
    """log u with the cut along -direction."""
    rot = direction / abs(direction)
    return np.log(u / rot) + 1j * np.angle(rot)


def pole(a: complex, order: int = 6) -> FunctionHandle:
    """``1 / (z - a)``; analytic on any E not containing ``a``."""
    a = complex(a)

    def make(l):
        c = (-1) ** l * math.factorial(l)
        return lambda z: c / (z - a) ** (l + 1)

    return FunctionHandle(make(0), [make(l) for l in range(1, order + 1)], "analytic", None,
                          "pole", {"a": [a.real, a.imag]})


def branch(beta: float, z0: complex = 1.0, E=None, order: int = 6) -> FunctionHandle:
    """``(z0 - z) ** beta`` with the branch cut pointing out of E.

    The cut runs from ``z0`` along the outward normal, so for ``z0 = 1`` on
    a domain symmetric about the real axis this is the principal branch.
    """
    z0 = complex(z0)
    if beta <= 0:
        raise InvalidArgument("branch exponent must be positive")
    direction = 1.0 + 0j
    if E is not None:
        if E.classify(z0) != "boundary":
            raise InvalidArgument("branch point must lie on the boundary of E")
        if E.kind != "segment":
            direction = E.outward_normal(z0)
        elif abs(z0 - E.params["a"]) <= E.tol:
            direction = (E.params["a"] - E.params["b"])
        elif abs(z0 - E.params["b"]) <= E.tol:
            direction = (E.params["b"] - E.params["a"])
        else:
            direction = 1j * (E.params["b"] - E.params["a"])

    def make(l):
        coef = 1.0
        for i in range(l):
            coef *= beta - i
        coef *= (-1) ** l
        ex = beta - l

        def f(z):
            u = z0 - z
            with np.errstate(divide="ignore", invalid="ignore"):
                out = coef * np.exp(ex * _branch_log(u, direction))
            return np.where(u == 0, 0.0 if ex > 0 else np.inf, out)
        return f

    smooth = "holder"
    if float(beta).is_integer():
        smooth = "analytic"
    return FunctionHandle(make(0), [make(l) for l in range(1, order + 1)], smooth, float(beta),
                          "branch", {"beta": float(beta), "z0": [z0.real, z0.imag]})


def logfac(z0: complex = 1.0, order: int = 6) -> FunctionHandle:
    """``(z0 - z) log(z0 - z)``; continuous, not Lipschitz at ``z0``."""
    z0 = complex(z0)
    direction = z0 if z0 != 0 else 1.0

    def f(z):
        u = z0 - z
        with np.errstate(divide="ignore", invalid="ignore"):
            out = u * _branch_log(u, direction)
        return np.where(u == 0, 0.0, out)

    def make(l):
        def g(z):
            u = z0 - z
            with np.errstate(divide="ignore", invalid="ignore"):
                if l == 1:
                    return -(_branch_log(u, direction) + 1)
                return math.factorial(l - 2) * u ** (1 - l)
        return g

    return FunctionHandle(f, [make(l) for l in range(1, order + 1)], "custom", None,
                          "logfac", {"z0": [z0.real, z0.imag]})


def entire(order: int = 8) -> FunctionHandle:
    """``exp(z)``."""
    return FunctionHandle(np.exp, [np.exp] * order, "analytic", None, "entire", {})


def from_polynomial(p) -> FunctionHandle:
    """Wrap a :class:`CPolynomial` (all derivatives available)."""
    derivs = []
    q = p
    for _ in range(max(p.degree, 0) + 2):
        q = q.deriv()
        derivs.append(q)
    return FunctionHandle(p, derivs, "analytic", None, "polynomial", {"degree": p.degree})


def builtin_functions() -> dict:
    """Catalog of function factories keyed by id."""
    return {"pole": pole, "branch": branch, "logfac": logfac, "entire": entire}


def parse_function(spec: str, E=None) -> FunctionHandle:
    """Build a handle from ``name`` or ``name:arg1,arg2`` text.

    Examples: ``pole:2``, ``branch:0.5,1``, ``logfac:1``, ``entire``.
    Complex arguments use Python syntax, e.g. ``pole:2+1j``.
    """
    name, _, rest = spec.partition(":")
    args = [complex(a.replace(" ", "")) for a in rest.split(",") if a.strip()]
    cat = builtin_functions()
    if name not in cat:
        raise InvalidArgument(f"unknown function id {name!r}")
    if name == "pole":
        a = args[0] if args else 2.0
        if E is not None and E.classify(a) != "exterior":
            raise InvalidArgument("pole must lie outside E")
        return pole(a)
    if name == "branch":
        beta = args[0].real if args else 0.5
        z0 = args[1] if len(args) > 1 else 1.0
        return branch(beta, z0, E)
    if name == "logfac":
        z0 = args[0] if args else 1.0
        if E is not None and E.classify(z0) != "boundary":
            raise InvalidArgument("logfac anchor must lie on the boundary of E")
        return logfac(z0)
    return entire()
