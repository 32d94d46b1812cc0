"""Interpolating polynomial approximation: correction operators and pipelines.

Every pipeline starts from an approximant ``t`` and adds a correction that
restores interpolation at the nodes without spoiling the approximation:

* ``walsh_correct``: plain Lagrange correction ``sum l_j(z) (f - p*)(z_j)``;
* ``theorem1_pipeline``: the Lagrange terms are multiplied by a localizing
  factor ``V(z_j, z) = 1 - (z_j - z) Q(z_j, z)`` built from a Cauchy-kernel
  approximant, so each correction is felt only near its node;
* ``theorem2d_pipeline``: Hermite data up to order ``r``;
* ``theorem3_pipeline``: Fekete nodes with the degree held to ``(1+eps) N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import ModulusProfile, default_deltas, global_modulus_profile, near_best
from .conformal import ExteriorMap, build_map, rho_delta
from .errors import DegreeError, InvalidArgument
from .functions import FunctionHandle
from .geometry import Continuum
from .kernels import KernelSpec, correction_kernel, powered_kernel, v_polynomial
from .polynomial import CPolynomial, NodeSet, divide_linear, node_poly

RESIDUAL_TOL = 1e-9
ALPHA_GRID = np.round(np.arange(1, 11) / 10, 1)
# share of the correction kernel degree spent on damping toward the interior
DAMPING_SHARE = 0.75


# -- compacts and tables ------------------------------------------------------

@dataclass(frozen=True)
class Compact:
    """Closed disk ``|z - center| <= radius`` inside E."""

    center: complex
    radius: float
    name: str = ""

    def points(self, M: int = 256) -> np.ndarray:
        # f - p is analytic on the compact, so its sup sits on the circle
        th = 2 * np.pi * np.arange(M) / M
        return np.r_[self.center + self.radius * np.exp(1j * th), self.center]

    @property
    def label(self) -> str:
        c = complex(self.center)
        return self.name or f"disk:{c.real:g},{c.imag:g},{self.radius:g}"

    @classmethod
    def parse(cls, text: str) -> "Compact":
        """Parse ``disk:cx,cy,r``."""
        kind, _, rest = text.partition(":")
        parts = [float(x) for x in rest.split(",") if x.strip()]
        if kind != "disk" or len(parts) != 3 or parts[2] <= 0:
            raise InvalidArgument(f"compact must look like disk:cx,cy,r, got {text!r}")
        return cls(complex(parts[0], parts[1]), parts[2])


@dataclass
class RatioTable:
    """Pointwise errors against the local scale ``omega(rho_{1/n}(z))``."""

    z: np.ndarray
    error: np.ndarray
    rho: np.ndarray
    omega: np.ndarray
    order: int = 0

    @property
    def ratio(self) -> np.ndarray:
        return self.error / np.where(self.omega > 0, self.omega, np.nan)

    @property
    def max_ratio(self) -> float:
        r = self.ratio
        return float(np.nanmax(r)) if np.any(np.isfinite(r)) else float("nan")

    def rows(self):
        for z, e, w, r in zip(self.z, self.error, self.omega, self.ratio):
            yield complex(z), float(e), float(w), float(r)

    def to_dict(self) -> dict:
        return {"order": self.order, "max_ratio": self.max_ratio,
                "max_error": float(np.max(self.error))}


@dataclass
class PipelineResult:
    """Output of a pipeline run at one degree.

    ``node_residuals[j, l]`` is ``|p^(l)(z_j) - f^(l)(z_j)|`` and
    ``residual_scale[j, l]`` is ``1 + |f^(l)(z_j)|``.
    """

    theorem: str
    n: int
    p: CPolynomial
    t: CPolynomial
    nodes: np.ndarray
    r: int
    node_residuals: np.ndarray
    residual_scale: np.ndarray
    boundary: dict
    boundary_error: float
    interior: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.p.degree

    @property
    def residual_ratio(self) -> float:
        """``max residual / scale``; interpolation holds when this is at most ``1e-9``."""
        return float(np.max(self.node_residuals / self.residual_scale))

    @property
    def max_modulus_ok(self) -> bool:
        return all(v <= self.boundary_error + 1e-12 for v in self.interior.values())

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "n": self.n, "degree": self.degree,
                "nodes": [[float(z.real), float(z.imag)] for z in self.nodes], "r": self.r,
                "max_node_residual": float(np.max(self.node_residuals)),
                "residual_ratio": self.residual_ratio,
                "boundary_error": self.boundary_error,
                "boundary": {str(l): t.to_dict() for l, t in self.boundary.items()},
                "interior": dict(self.interior), "diagnostics": _jsonable(self.diagnostics),
                "max_modulus_ok": self.max_modulus_ok}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _nodes_array(nodes) -> np.ndarray:
    if isinstance(nodes, NodeSet):
        return nodes.array
    return NodeSet(tuple(np.atleast_1d(np.asarray(nodes, dtype=complex)))).array


def _boundary_points(E: Continuum, n: int, M: int | None) -> np.ndarray:
    M = M or max(1024, 16 * (n + 1))
    z, _, _ = E.sample_boundary(M)
    return z


def _profile(f: FunctionHandle, E: Continuum, k: int, n_max: int) -> ModulusProfile:
    return global_modulus_profile(f, E, k, default_deltas(E, n_max))


def _interior_errors(f, p, compacts) -> dict:
    out = {}
    for K in compacts or ():
        pts = K.points()
        out[K.label] = float(np.max(np.abs(f(pts) - p(pts))))
    return out


def _value_residuals(f, p, z) -> tuple[np.ndarray, np.ndarray]:
    fz = f(z)
    return np.abs(p(z) - fz)[:, None], (1 + np.abs(fz))[:, None]


# -- correction operators -------------------------------------------------------

def lagrange_basis(nodes, frame) -> list[CPolynomial]:
    """``l_j(z) = q(z) / (q'(z_j) (z - z_j))``."""
    z = _nodes_array(nodes)
    q, dq = node_poly(z, frame)
    return [divide_linear(q, zj)[0] / dqj for zj, dqj in zip(z, dq)]


def walsh_correct(pstar: CPolynomial, f: FunctionHandle, nodes, n: int) -> CPolynomial:
    """``p = p* + sum_j l_j(z) (f(z_j) - p*(z_j))``; interpolates f at the nodes.

    Raises
    ------
    DegreeError
        If ``N - 1`` or ``deg p*`` exceeds ``n``.
    """
    z = _nodes_array(nodes)
    if len(z) - 1 > n or pstar.degree > n:
        raise DegreeError(f"{len(z)} nodes and deg p* = {pstar.degree} do not fit degree {n}")
    resid = f(z) - pstar(z)
    p = pstar
    for lj, rj in zip(lagrange_basis(z, pstar.frame), resid):
        p = p + lj * rj
    return p


def localized_correct(t: CPolynomial, f: FunctionHandle, nodes, emap: ExteriorMap,
                      kernel_degree: int, power: int = 1, damped: bool = True,
                      damping_share: float = 0.5):
    """``u = sum_j l_j(z) (f - t)(z_j) V(z_j, z)`` with ``V = 1 - (z_j - z) Q``.

    ``V`` is identically 1 for nodes in the interior of E. Returns
    ``(u, kernels)`` where ``kernels[j]`` is the ``Q`` used at node j (None
    for interior nodes).
    """
    E = emap.domain
    z = _nodes_array(nodes)
    resid = f(z) - t(z)
    u = CPolynomial([], t.frame)
    kernels = []
    for zj, lj, rj in zip(z, lagrange_basis(z, t.frame), resid):
        if E.classify(zj) == "interior" or kernel_degree < 1:
            kernels.append(None)
            u = u + lj * rj
            continue
        Q = correction_kernel(emap, kernel_degree, complex(zj), power, damped, damping_share)
        kernels.append(Q)
        u = u + lj * v_polynomial(Q, complex(zj)) * rj
    return u, kernels


def _inverse_power_series(a: complex, order: int) -> np.ndarray:
    """Taylor coefficients in s of ``1 / (a + s)``."""
    s = np.arange(order + 1)
    return (-1.0) ** s / a ** (s + 1)


def _series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a, b)[: order + 1]


def hermite_weights(nodes, j: int, r: int) -> np.ndarray:
    """Taylor coefficients at ``z_j`` of ``g_j(z) = (z - z_j)^(r+1) / q(z)^(r+1)`` up to ``s^r``."""
    z = _nodes_array(nodes)
    g = np.zeros(r + 1, dtype=complex)
    g[0] = 1.0
    for i, zi in enumerate(z):
        if i == j:
            continue
        inv = _inverse_power_series(z[j] - zi, r)
        for _ in range(r + 1):
            g = _series_mul(g, inv, r)
    return g


def hermite_correct(t: CPolynomial, f: FunctionHandle, nodes, n: int, r: int,
                    emap: ExteriorMap, power: int = 1, kernel_degree: int | None = None) -> CPolynomial:
    """Correction ``u`` with ``u^(l)(z_j) = f^(l)(z_j) - t^(l)(z_j)``, ``l = 0..r``.

    ``u = sum_j (q/(z - z_j))^(r+1) V_j(z) sum_s A_{j,s} (z - z_j)^s`` where
    ``sum_s A_{j,s} s^s`` is the order-``r`` Taylor polynomial of
    ``(f - t) g_j`` at ``z_j`` and
    ``V_j = 1 - (z_j - z)^(r+1) / r! * d^r/dz^r Q(z_j, z)``.
    """
    E = emap.domain
    z = _nodes_array(nodes)
    if r < 0:
        raise InvalidArgument("derivative order r must be >= 0")
    if not np.all(E.classify_many(z) == "boundary"):
        raise InvalidArgument("Hermite nodes must lie on the boundary")
    if f.max_order < r:
        raise InvalidArgument(f"f provides {f.max_order} derivatives, need {r}")
    N = len(z)
    budget = n - N * (r + 1)
    dK = min(n // 2 - 1, budget) if kernel_degree is None else kernel_degree
    if budget < 0:
        raise DegreeError(f"N(r+1) = {N * (r + 1)} exceeds degree {n}")
    fr = t.frame
    q, _ = node_poly(z, fr)
    u = CPolynomial([], fr)
    tder = t.derivatives(z, r)  # (r+1, N)
    fact = np.array([math.factorial(v) for v in range(r + 1)], dtype=float)
    for j, zj in enumerate(z):
        e = np.array([f.derivative(v, np.array([zj]))[0] - tder[v, j] for v in range(r + 1)])
        A = _series_mul(e / fact, hermite_weights(z, j, r), r)
        lin = CPolynomial.linear(complex(zj), fr)
        taylor = CPolynomial([], fr)
        pw = CPolynomial.constant(1.0, fr)
        for s in range(r + 1):
            taylor = taylor + pw * A[s]
            pw = pw * lin
        h = divide_linear(q, complex(zj))[0] ** (r + 1)
        term = h * taylor
        if dK >= max(r, 1):
            Q = correction_kernel(emap, dK, complex(zj), power)
            # (z_j - z)^(r+1) = (-1)^(r+1) (z - z_j)^(r+1)
            V = 1.0 - (lin ** (r + 1)) * Q.deriv(r) * ((-1) ** (r + 1) / fact[r])
            term = term * V
        u = u + term
    return u


# -- pipelines ------------------------------------------------------------------

def _boundary_table(f, p, emap, n, profile, z, order=0, weight_power=0) -> RatioTable:
    err = np.abs(f.derivative(order, z) - p.derivatives(z, order)[order])
    rho = np.asarray(rho_delta(emap, z, 1.0 / n), dtype=float)
    omega = profile(rho) * rho ** weight_power
    return RatioTable(z, err, rho, omega, order)


def theorem1_pipeline(f: FunctionHandle, E: Continuum, k: int, nodes, n: int,
                      mode: str = "fast", compacts=(), profile: ModulusProfile | None = None,
                      M: int | None = None, emap: ExteriorMap | None = None,
                      extension_depth: int = 6, damped: bool = True,
                      damping_share: float = DAMPING_SHARE) -> PipelineResult:
    """Near-best (or area-integral) ``t`` plus the localized interpolation correction.

    Parameters
    ----------
    k : int
        Order of the modulus of continuity used in the ratio table and the
        power of the localizing kernel.
    mode : {"fast", "constructive"}
        ``fast`` takes ``t = near_best(f, floor(n/2))``; ``constructive``
        builds ``t`` from the extension's area integral (convex E only).
    damping_share : float
        Fraction of the correction kernel's degree spent on the damping
        factor when E is convex; the kernel uses the full budget ``n - N``.
    """
    z = _nodes_array(nodes)
    N = len(z)
    if n < N + k:
        raise DegreeError(f"need n >= N + k = {N + k}, got {n}")
    if mode not in ("fast", "constructive"):
        raise InvalidArgument(f"unknown mode {mode!r}")
    emap = emap or build_map(E)
    if mode == "fast":
        t = near_best(f, E, n // 2).poly
    else:
        from .extension import area_integral_tn, extend, primitive
        ext = extend(primitive(f, E), E, max(k, 1), max_depth=extension_depth)
        t = area_integral_tn(ext, emap, n)
    dK = n - N
    u, _ = localized_correct(t, f, z, emap, dK, power=k, damped=damped,
                             damping_share=damping_share)
    p = t + u
    if p.degree > n:
        raise DegreeError(f"pipeline produced degree {p.degree} > {n}")
    profile = profile or _profile(f, E, k, n)
    zb = _boundary_points(E, n, M)
    table = _boundary_table(f, p, emap, n, profile, zb)
    res, scale = _value_residuals(f, p, z)
    return PipelineResult("1", n, p, t, z, 0, res, scale, {0: table}, float(np.max(table.error)),
                          _interior_errors(f, p, compacts),
                          {"mode": mode, "kernel_degree": dK, "t_error": float(np.max(np.abs(f(zb) - t(zb))))})


def theorem2d_pipeline(f: FunctionHandle, E: Continuum, k: int, r: int, nodes, n: int,
                       compacts=(), profile: ModulusProfile | None = None, M: int | None = None,
                       emap: ExteriorMap | None = None) -> PipelineResult:
    """Hermite interpolation of ``f, ..., f^(r)`` at boundary nodes.

    The ratio table of order ``l`` divides ``|f^(l) - p^(l)|`` by
    ``rho^(r-l) omega_{f^(r),k}(rho)``, ``rho = rho_{1/n}(z)``.
    """
    z = _nodes_array(nodes)
    N = len(z)
    if n < N * r + k:
        raise DegreeError(f"need n >= N r + k = {N * r + k}, got {n}")
    emap = emap or build_map(E)
    t = near_best(f, E, n // 2).poly
    p = t + hermite_correct(t, f, z, n, r, emap, power=k)
    if p.degree > n:
        raise DegreeError(f"pipeline produced degree {p.degree} > {n}")
    profile = profile or _profile(f.derivative_handle(r), E, k, n)
    zb = _boundary_points(E, n, M)
    tables = {l: _boundary_table(f, p, emap, n, profile, zb, l, r - l) for l in range(r + 1)}
    pd = p.derivatives(z, r)
    fd = np.array([f.derivative(l, z) for l in range(r + 1)])
    res = np.abs(pd - fd).T
    scale = (1 + np.abs(fd)).T
    return PipelineResult("2d", n, p, t, z, r, res, scale, tables, float(np.max(tables[0].error)),
                          _interior_errors(f, p, compacts))


def calibrate_power(emap: ExteriorMap, m: int, M: int = 64, constant: float = 4.0,
                    lmax: int = 8) -> int:
    """Smallest ``l`` with ``rho/|zeta - z| <= C (1/(m |Phi(zeta) - Phi(z)|))^(2/l)``.

    Checked over pairs of boundary samples with ``|Phi(zeta) - Phi(z)| >= 1/m``
    and ``rho = rho_{1/m}(z)``.
    """
    E = emap.domain
    z, _, _ = E.sample_boundary(M)
    z = np.unique(np.round(z, 14))
    w = emap.phi(z)
    rho = np.asarray(rho_delta(emap, z, 1.0 / m), dtype=float)
    D = np.abs(w[None, :] - w[:, None])
    dist = np.abs(z[None, :] - z[:, None])
    far = (D >= 1.0 / m) & (dist > 0)
    lhs = (rho[:, None] / np.where(dist > 0, dist, 1.0))[far]
    with np.errstate(divide="ignore"):
        x = (1.0 / (m * D))[far]
    for l in range(1, lmax + 1):
        if np.all(lhs <= constant * x ** (2.0 / l)):
            return l
    return lmax


def node_groups(emap: ExteriorMap, nodes, z, m: int) -> np.ndarray:
    """Group index per (z, node): 0 near (``|dtheta| <= 2 pi/m``), 1 middle (``<= 8 pi/m``), 2 far."""
    th_n = np.angle(emap.phi(_nodes_array(nodes)))
    th_z = np.angle(emap.phi(np.asarray(z, dtype=complex)))
    d = np.abs(np.angle(np.exp(1j * (th_z[:, None] - th_n[None, :]))))
    return np.where(d <= 2 * np.pi / m, 0, np.where(d <= 8 * np.pi / m, 1, 2))


def theorem3_pipeline(f: FunctionHandle, E: Continuum, k: int, N: int, eps: float,
                      compacts=(), nodes=None, profile: ModulusProfile | None = None,
                      M: int | None = None, emap: ExteriorMap | None = None,
                      power_offset: int | None = None) -> PipelineResult:
    """Interpolation at N Fekete points with degree at most ``N + floor(eps N)``.

    ``t = near_best(f, N)`` and the correction uses
    ``V = 1 - (z_j - z) Q_m`` with ``Q_m`` the powered kernel of degree
    ``m = floor(eps N)`` at power ``k + l`` (``l`` from :func:`calibrate_power`).
    """
    if not (0 < eps <= 1):
        raise InvalidArgument("eps must lie in (0, 1]")
    emap = emap or build_map(E)
    if nodes is None:
        from .fekete import fekete_points
        nodes = fekete_points(E, N).points
    z = _nodes_array(nodes)
    if len(z) != N:
        raise InvalidArgument(f"expected {N} nodes, got {len(z)}")
    m = int(math.floor(eps * N))
    l = calibrate_power(emap, max(m, 1)) if power_offset is None else power_offset
    t = near_best(f, E, N).poly
    resid = f(z) - t(z)
    fr = t.frame
    basis = lagrange_basis(z, fr)
    terms = []
    for zj, lj, rj in zip(z, basis, resid):
        if m >= 1:
            Q = powered_kernel(emap, KernelSpec.for_budget(m, k + l), complex(zj))
            terms.append(lj * v_polynomial(Q, complex(zj)) * rj)
        else:
            terms.append(lj * rj)
    u = CPolynomial([], fr)
    for term in terms:
        u = u + term
    p = t + u
    n = N + m
    if p.degree > n:
        raise DegreeError(f"pipeline produced degree {p.degree} > {n}")
    profile = profile or _profile(f, E, k, n)
    zb = _boundary_points(E, n, M)
    table = _boundary_table(f, p, emap, n, profile, zb)
    res, scale = _value_residuals(f, p, z)
    groups = node_groups(emap, z, zb, max(m, 1))
    contrib = np.abs(np.array([term(zb) for term in terms])).T  # (points, N)
    group_bounds = {name: float(np.max(np.sum(np.where(groups == g, contrib, 0.0), axis=1)))
                    for g, name in enumerate(("near", "middle", "far"))}
    t_err = float(np.max(np.abs(f(zb) - t(zb))))
    diag = {"m": m, "l": l, "near_group_max": int(np.max(np.sum(groups == 0, axis=1))),
            "group_bounds": group_bounds, "t_error": t_err,
            "error_ratio": float(np.max(table.error)) / t_err if t_err > 0 else float("nan"),
            "jordan_domain": bool(E.has_interior)}
    return PipelineResult("3", n, p, t, z, 0, res, scale, {0: table}, float(np.max(table.error)),
                          _interior_errors(f, p, compacts), diag)


# -- fitted constants -----------------------------------------------------------------

def fit_interior_decay(ns, errors, alphas=ALPHA_GRID) -> dict:
    """Fit ``log err = a - c n^alpha`` over an alpha grid; best R^2 wins."""
    ns = np.asarray(ns, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = e > 0
    if keep.sum() < 3:
        raise InvalidArgument("need at least three positive errors to fit a decay law")
    y = np.log(e[keep])
    best = None
    for a in alphas:
        x = ns[keep] ** a
        A = np.c_[np.ones_like(x), -x]
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        ss_res = float(np.sum((y - A @ coef) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
        if best is None or r2 > best["r2"]:
            best = {"alpha": float(a), "c": float(coef[1]), "log_c3": float(coef[0]), "r2": r2}
    return best


def fit_log_slope(ns, errors) -> float:
    """Least-squares slope of ``log err`` against ``n``."""
    ns = np.asarray(ns, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = e > 0
    return float(np.polyfit(ns[keep], np.log(e[keep]), 1)[0])


def rho_comparison_constant(emap: ExteriorMap, profile: ModulusProfile, n: int, k: int,
                            M: int = 128) -> float:
    """``max omega(rho(zeta)) (rho(z)/(|z - zeta| + rho(z)))^k / omega(rho(z))`` over boundary pairs."""
    z, _, _ = emap.domain.sample_boundary(M)
    rho = np.asarray(rho_delta(emap, z, 1.0 / n), dtype=float)
    om = profile(rho)
    dist = np.abs(z[:, None] - z[None, :])
    val = om[None, :] * (rho[:, None] / (dist + rho[:, None])) ** k / om[:, None]
    return float(np.max(val))


@dataclass
class Sweep:
    """Pipeline runs over a degree list with the fitted constants."""

    results: list
    fits: dict
    profile: ModulusProfile | None = None

    @property
    def degrees(self) -> list:
        return [r.n for r in self.results]

    def max_ratios(self, order: int = 0) -> np.ndarray:
        return np.array([r.boundary[order].max_ratio for r in self.results])

    def ratio_drift(self, order: int = 0) -> float:
        m = self.max_ratios(order)
        return float(np.max(m) / np.min(m))

    def to_dict(self) -> dict:
        return {"runs": [r.to_dict() for r in self.results], "fits": _jsonable(self.fits)}


def fit_sweep(results: list) -> dict:
    """Boundary constant ``c1 = max ratio`` and interior decay fits per compact."""
    fits: dict = {"c1": float(max(r.boundary[0].max_ratio for r in results))}
    ns = [r.n for r in results]
    fits["boundary_log_slope"] = fit_log_slope(ns, [r.boundary_error for r in results]) if len(ns) > 1 else None
    for label in (results[0].interior if results else {}):
        errs = [r.interior[label] for r in results]
        entry = {"log_slope": fit_log_slope(ns, errs) if len(ns) > 1 else None}
        if len(ns) >= 3:
            try:
                entry.update(fit_interior_decay(ns, errs))
            except InvalidArgument:
                pass
        fits[label] = entry
    return fits


def sweep_theorem1(f, E, k, nodes, degrees, mode="fast", compacts=(), emap=None, **kw) -> Sweep:
    """Run :func:`theorem1_pipeline` over ascending degrees with one shared profile."""
    degrees = sorted(degrees)
    emap = emap or build_map(E)
    profile = _profile(f, E, k, degrees[-1])
    runs = [theorem1_pipeline(f, E, k, nodes, n, mode, compacts, profile, emap=emap, **kw)
            for n in degrees]
    return Sweep(runs, fit_sweep(runs), profile)


def sweep_theorem2d(f, E, k, r, nodes, degrees, compacts=(), emap=None) -> Sweep:
    degrees = sorted(degrees)
    emap = emap or build_map(E)
    profile = _profile(f.derivative_handle(r), E, k, degrees[-1])
    runs = [theorem2d_pipeline(f, E, k, r, nodes, n, compacts, profile, emap=emap) for n in degrees]
    return Sweep(runs, fit_sweep(runs), profile)


def sweep_theorem3(f, E, k, counts, eps, compacts=(), emap=None, node_sets=None) -> Sweep:
    """Theorem-3 runs over ascending node counts; ``node_sets[N]`` overrides Fekete points."""
    counts = sorted(counts)
    emap = emap or build_map(E)
    profile = _profile(f, E, k, int(counts[-1] * (1 + eps)) + 1)
    node_sets = node_sets or {}
    runs = [theorem3_pipeline(f, E, k, N, eps, compacts, node_sets.get(N), profile=profile, emap=emap)
            for N in counts]
    fits = fit_sweep(runs)
    fits["error_ratios"] = [r.diagnostics["error_ratio"] for r in runs]
    fits["near_group_sizes"] = [r.diagnostics["near_group_max"] for r in runs]
    return Sweep(runs, fits, profile)
