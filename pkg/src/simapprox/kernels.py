"""Polynomial kernels approximating the Cauchy kernel ``1 / (zeta - z)``.

The first-order kernel is a Jackson-weighted average, over the level curve
``|w| = R``, of the degree-``q`` Faber expansion of ``1 / (Psi(w) - z)``.
Powering ``V1 = 1 - (zeta - z) Q`` sharpens the spatial decay of the error
``V / (zeta - z)``. On convex domains a degree-one damping factor ``u`` that
equals 1 at ``zeta`` and is geometrically small inside E is blended in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import ExteriorMap
from .errors import DegreeError, InvalidArgument, Unsupported
from .geometry import Continuum
from .polynomial import CPolynomial, Frame, divide_linear, frame_for


@dataclass(frozen=True)
class KernelSpec:
    """Degree bookkeeping for a powered kernel.

    Parameters
    ----------
    m : int
        Powering exponent of ``V1``.
    n : int
        Degree budget; the kernel has degree ``m (q + 1) - 1 <= n``.
    p : int
        Jackson kernel degree.
    q : int
        Faber truncation degree.
    R : float
        Radius of the averaging circle, default ``1 + 1/n``.
    """

    m: int
    n: int
    p: int
    q: int
    R: float | None = None
    oversample: int = 8

    def __post_init__(self):
        if self.m < 1 or self.p < 1 or self.q < 1:
            raise InvalidArgument("kernel parameters m, p, q must be >= 1")
        if self.m * (self.q + 1) - 1 > self.n:
            raise DegreeError(f"m(q+1)-1 = {self.m * (self.q + 1) - 1} exceeds budget {self.n}")
        if self.R is None:
            object.__setattr__(self, "R", 1.0 + 1.0 / self.n)
        if self.R <= 1:
            raise InvalidArgument("averaging radius must exceed 1")

    @classmethod
    def for_budget(cls, n: int, power: int, R: float | None = None) -> "KernelSpec":
        """Largest kernel fitting the budget; the power drops if ``q`` would be 0."""
        if n < 1:
            raise DegreeError("kernel budget must be >= 1")
        power = max(1, min(power, (n + 1) // 2))
        q = (n + 1) // power - 1
        return cls(power, n, q, q, R)

    @property
    def degree(self) -> int:
        return self.m * (self.q + 1) - 1

    @property
    def nodes(self) -> int:
        # 1/Psi' has singularities at distance log R from the averaging circle;
        # the trapezoid error decays like exp(-nodes * log R)
        return max(self.oversample * max(self.p, self.q + 1), int(np.ceil(40 / np.log(self.R))))


def jackson_kernel(p: int, t):
    """Jackson kernel of degree ``<= p``, normalized to unit integral on [-pi, pi]."""
    m = p // 2 + 1
    t = np.asarray(t, dtype=float)
    grid = 2 * np.pi * np.arange(8 * p) / (8 * p)
    return _jackson_raw(m, t) / (np.mean(_jackson_raw(m, grid)) * 2 * np.pi)


def _jackson_raw(m: int, t):
    s = np.sin(t / 2)
    small = np.abs(s) < 1e-12
    ratio = np.sin(m * t / 2) / np.where(small, 1.0, s)
    return np.where(small, float(m), ratio) ** 4


def faber_polynomials(emap: ExteriorMap, q: int, frame: Frame | None = None) -> list[CPolynomial]:
    """``F_0..F_q`` from the Laurent coefficients of Psi."""
    E = emap.domain
    frame = frame or frame_for(E)
    cache = E.__dict__.setdefault("_cache", {})
    key = ("faber", frame)
    have = cache.get(key)
    if have is not None and len(have) > q:
        return have[: q + 1]
    lc = emap.laurent(max(q, 1))
    cap, c0, c = lc[0], lc[1], lc[1:]
    shift = frame.center - c0
    F = [CPolynomial.constant(1.0, frame)]
    for j in range(q):
        nxt = F[j].mulx() * frame.scale + F[j] * shift
        for i in range(1, j + 1):
            nxt = nxt - F[j - i] * c[i]
        if j >= 1:
            nxt = nxt - j * c[j]
        F.append(nxt / cap)
    cache[key] = F
    return F


def _pole_polar(emap: ExteriorMap, zeta: complex) -> tuple[float, float]:
    """``(|Phi(zeta)|, arg Phi(zeta))`` for a pole on or outside L."""
    w = complex(np.asarray(emap.phi(np.array([zeta])))[0])
    return max(abs(w), 1.0), float(np.angle(w))


def faber_coefficients(emap: ExteriorMap, spec: KernelSpec, zeta: complex, nodes: int | None = None):
    """Coefficients ``b_j`` of the first-order kernel in the Faber basis.

    Poles off L are averaged on their own level circle when it lies
    beyond ``|w| = R``.
    """
    r, th0 = _pole_polar(emap, zeta)
    R = max(spec.R, r)
    Nq = nodes or spec.nodes
    th = th0 + 2 * np.pi * np.arange(Nq) / Nq
    w = R * np.exp(1j * th)
    weights = (2 * np.pi / Nq) * jackson_kernel(spec.p, th0 - th) / emap.dpsi(w)
    j = np.arange(spec.q + 1)
    return (weights[None, :] * w[None, :] ** (-(j[:, None] + 1))).sum(axis=1)


def first_order_kernel(emap: ExteriorMap, spec: KernelSpec, zeta: complex) -> CPolynomial:
    """Degree-``q`` polynomial ``Q`` with ``Q(z)`` close to ``1/(zeta - z)`` away from zeta."""
    b = faber_coefficients(emap, spec, zeta)
    F = faber_polynomials(emap, spec.q)
    Q = F[0] * b[0]
    for bj, Fj in zip(b[1:], F[1:]):
        Q = Q + Fj * bj
    return Q


def truncated_cauchy_kernel(emap: ExteriorMap, degree: int, zeta: complex) -> CPolynomial:
    """Partial sum ``sum_{j<=degree} F_j(z) w^(-j-1) / Psi'(w)``, ``w = Phi(zeta)``.

    This is the Faber expansion of ``1/(zeta - z)``; for ``|w| = r > 1`` the
    tail on E is of order ``r^-(degree+1)``.
    """
    w = complex(np.asarray(emap.phi(np.array([zeta])))[0])
    if abs(w) <= 1:
        raise InvalidArgument("truncated Cauchy kernel needs a pole off L")
    j = np.arange(degree + 1)
    b = w ** (-(j + 1)) / complex(np.asarray(emap.dpsi(np.array([w])))[0])
    F = faber_polynomials(emap, degree)
    Q = F[0] * b[0]
    for bj, Fj in zip(b[1:], F[1:]):
        Q = Q + Fj * bj
    return Q


def quadrature_self_check(emap: ExteriorMap, spec: KernelSpec, zeta: complex) -> float:
    """Relative change of the kernel coefficients when the node count doubles."""
    b1 = faber_coefficients(emap, spec, zeta)
    b2 = faber_coefficients(emap, spec, zeta, nodes=2 * spec.nodes)
    return float(np.max(np.abs(b1 - b2)) / max(np.max(np.abs(b2)), 1e-300))


def v_polynomial(Q: CPolynomial, zeta: complex) -> CPolynomial:
    """``1 - (zeta - z) Q(z)``."""
    return CPolynomial.linear(zeta, Q.frame) * Q + 1.0


def powered_kernel(emap: ExteriorMap, spec: KernelSpec, zeta: complex, k: int | None = None) -> CPolynomial:
    """``Q_m`` with ``1 - (zeta - z) Q_m = (1 - (zeta - z) Q)^k`` exactly."""
    k = spec.m if k is None else k
    if k * (spec.q + 1) - 1 > spec.n:
        raise DegreeError("powered kernel exceeds the degree budget")
    V = v_polynomial(first_order_kernel(emap, spec, zeta), zeta) ** k
    Qm, _ = divide_linear(V - 1.0, zeta)
    return Qm


@dataclass(frozen=True)
class DampingFactor:
    """``u = w^N`` with a degree-one ``w`` mapping E into ``|w - 1/2| <= 1/2``."""

    zeta: complex
    N: int
    base: CPolynomial
    center: complex
    radius: float

    def poly(self) -> CPolynomial:
        return self.base ** self.N

    def __call__(self, z):
        return self.base(z) ** self.N


def tangent_disk(E: Continuum, zeta: complex, M: int = 4096) -> tuple[complex, float]:
    """Smallest disk with ``zeta`` on its boundary that contains E.

    The disk's normal at ``zeta`` is the outward normal for boundary points
    and the direction away from the nearest point of E otherwise.
    """
    if not E.convex:
        raise Unsupported("damping factor needs a convex domain")
    zeta = complex(zeta)
    where = E.classify(zeta)
    if where == "interior":
        raise InvalidArgument("damping anchor must lie on or outside the boundary")
    if where == "boundary":
        n = E.outward_normal(zeta)
    else:
        near = complex(np.asarray(E.nearest_point(np.array([zeta])))[0])
        n = (zeta - near) / abs(zeta - near)
    z, _, _ = E.sample_boundary(M)
    d = z - zeta
    far = np.abs(d) > 1e3 * E.tol
    num = np.abs(d[far]) ** 2
    den = 2 * np.real(-d[far] * np.conj(n))
    if np.any(den <= 1e-12 * num):
        raise Unsupported("no enclosing tangent disk: boundary is flat at the anchor")
    R = float(np.max(num / den))
    if where == "boundary":
        R = max(R, E.curvature_radius(zeta))
    R *= 1 + 1e-9
    if not np.isfinite(R):
        raise Unsupported("no enclosing tangent disk: boundary is flat at the anchor")
    return zeta - R * n, R


def damping(E: Continuum, zeta: complex, N: int, frame: Frame | None = None) -> DampingFactor:
    """Damping factor at a point of L (or of the exterior) for convex E."""
    if N < 0:
        raise InvalidArgument("damping power must be nonnegative")
    zeta = complex(zeta)
    c, R = tangent_disk(E, zeta)
    frame = frame or frame_for(E)
    e = np.conj((zeta - c) / R)
    # w(z) = (1 + (z - c) e / R) / 2 = (1 + (zeta - c) e / R) / 2 + (z - zeta) e / (2R)
    base = CPolynomial.linear(zeta, frame) * (e / (2 * R)) + 1.0
    return DampingFactor(zeta, int(N), base, c, R)


def combined_kernel(emap: ExteriorMap, spec: KernelSpec, zeta: complex, N: int | None = None,
                    kernel_spec: KernelSpec | None = None) -> CPolynomial:
    """``T = (1 - u)/(zeta - z) + u K`` so that ``1 - (zeta - z) T = u V_K``.

    ``N`` defaults to ``n // 2``; the inner kernel gets the remaining budget.
    """
    n = spec.n
    N = n // 2 if N is None else N
    ks = kernel_spec or KernelSpec.for_budget(n - N, spec.m)
    if N + ks.degree > n:
        raise DegreeError("combined kernel exceeds the degree budget")
    u = damping(emap.domain, zeta, N).poly()
    cauchy_part, _ = divide_linear(u - 1.0, zeta)
    K = powered_kernel(emap, ks, zeta)
    return cauchy_part + u * K


def correction_kernel(emap: ExteriorMap, degree: int, zeta: complex, power: int = 1,
                      damped: bool = True, damping_share: float = 0.5) -> CPolynomial:
    """Kernel of degree ``<= degree`` used to localize interpolation corrections.

    The damped kernel, with ``damping_share`` of the budget spent on ``u``,
    is used when E is convex with interior and a tangent disk exists at
    ``zeta``; otherwise the powered kernel at the given power.
    """
    E = emap.domain
    if not 0 < damping_share < 1:
        raise InvalidArgument("damping share must lie in (0, 1)")
    if damped and E.convex and E.has_interior and degree >= 4:
        N = min(degree - 1, max(1, int(round(damping_share * degree))))
        try:
            return combined_kernel(emap, KernelSpec.for_budget(degree, power), zeta, N=N,
                                   kernel_spec=KernelSpec.for_budget(degree - N, power))
        except Unsupported:
            pass
    return powered_kernel(emap, KernelSpec.for_budget(degree, power), zeta)


@dataclass
class KernelDecay:
    """Boundary profile of ``|1/(zeta - z) - Q(z)|`` against ``|zeta - z|``.

    ``slope`` is the log-log fit over ``|zeta - z| in [8 rho, 1]`` and
    ``bound`` is ``max |Q(z)| |zeta - z|`` over the boundary samples.
    ``rows`` pairs each error with the reference decay
    ``(rho / (d + rho))^power / d``.
    """

    zeta: complex
    rho: float
    power: int
    dist: np.ndarray
    error: np.ndarray
    slope: float
    bound: float

    def rows(self):
        ref = (self.rho / (self.dist + self.rho)) ** self.power / self.dist
        for d, e, b in zip(self.dist, self.error, ref):
            yield float(d), float(e), float(b)


def kernel_decay(emap: ExteriorMap, Q: CPolynomial, zeta: complex, n: int, power: int = 1,
                 M: int = 4096) -> KernelDecay:
    """Measure the decay and boundedness of a kernel ``Q`` on boundary samples of E."""
    from .conformal import rho_delta
    zeta = complex(zeta)
    z, _, _ = emap.domain.sample_boundary(M)
    d = np.abs(z - zeta)
    keep = d > 1e-12
    z, d = z[keep], d[keep]
    rho = float(np.asarray(rho_delta(emap, np.array([zeta]), 1.0 / n))[0])
    Qz = Q(z)
    err = np.abs(1.0 / (zeta - z) - Qz)
    sel = (d >= 8 * rho) & (d <= 1) & (err > 0)
    if sel.sum() < 3:
        raise InvalidArgument("too few boundary samples in the decay window")
    slope = float(np.polyfit(np.log(d[sel]), np.log(err[sel]), 1)[0])
    order = np.argsort(d)
    return KernelDecay(zeta, rho, power, d[order], err[order], slope, float(np.max(np.abs(Qz) * d)))
