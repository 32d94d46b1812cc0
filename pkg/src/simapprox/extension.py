"""Primitive along segments, Whitney-type extension, and the area-integral t_n.

The extension of a function F given on a convex E to the whole plane is
assembled from local best fits on Whitney cells of the exterior,

    F_ext = chi(d) * sum_c phi_c P_c   outside E,      F_ext = F   on E,

where ``phi_c`` is a partition of unity made of C^1 tensor cubic bumps and
``chi`` cuts the field off at distance ``3 * diam(E) / 2``. Since every
``P_c`` is a polynomial, ``dbar F_ext`` only involves derivatives of the
weights and of ``chi``. The Cauchy-Green formula then gives

    f(z) = F'(z) = -(1/pi) int dbar F_ext(zeta) / (zeta - z)^2 dm(zeta),

and replacing ``1/(zeta - z)`` by a polynomial kernel yields ``t_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec
from scipy.spatial import cKDTree

from .approx import lawson, window_samples
from .conformal import ExteriorMap
from .errors import ConstructionFailure, InvalidArgument, ResourceError, Unsupported
from .functions import FunctionHandle
from .geometry import Continuum
from .kernels import correction_kernel, truncated_cauchy_kernel
from .polynomial import CPolynomial, Frame, frame_for

BUMP_STRETCH = 1.5
WINDOW_FACTOR = 23
# a cell is accepted once d(center) >= ACCEPT_RATIO * half, which keeps the
# stretched bump support (reach sqrt(2) * 1.5 * half) strictly off E
ACCEPT_RATIO = 2.2


# -- primitive ----------------------------------------------------------------

def _segment_integral(f: FunctionHandle, z0: complex, zeta: np.ndarray, tol: float):
    d = zeta - z0

    def integrand(t):
        return f(z0 + t * d)

    val, err = quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
    val = np.asarray(val) * d
    return val, float(err)


def primitive(f: FunctionHandle, E: Continuum, z0: complex | None = None,
              tol: float = 1e-10) -> FunctionHandle:
    """``F(zeta) = int_{[z0, zeta]} f`` on a convex E (straight segments stay in E)."""
    if not E.convex:
        raise Unsupported("segment primitives need a convex domain")
    if z0 is None:
        z0 = E.centroid if E.has_interior else E.params["a"]
    z0 = complex(z0)
    if E.classify(z0) == "exterior":
        raise InvalidArgument("anchor must lie in E")
    scale = max(1.0, float(np.abs(f(np.array([z0])))[0])) * E.diameter

    def F(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        if flat.size == 0:
            return flat.reshape(zeta.shape)
        val, err = _segment_integral(f, z0, flat, tol)
        if not np.isfinite(err) or err > 1e3 * tol * scale:
            bad = flat[int(np.argmax(np.abs(flat - z0)))]
            raise ConstructionFailure("primitive quadrature did not converge",
                                      {"zeta": [bad.real, bad.imag], "error": err})
        return val.reshape(zeta.shape)

    derivs = [f.evaluator] + list(f.derivatives)
    beta = None if f.beta is None else f.beta + 1
    return FunctionHandle(F, derivs, f.smoothness, beta, f"primitive({f.name})",
                          {"anchor": [z0.real, z0.imag], **f.params})


# -- Whitney cells ------------------------------------------------------------

@dataclass
class WhitneyCell:
    center: complex
    half: float
    dist: float
    nearest: complex
    poly: CPolynomial | None = None
    boundary: bool = False


def whitney_cells(E: Continuum, outer: float, max_depth: int = 7) -> list[WhitneyCell]:
    """Quadtree cells of ``{0 < d(zeta, E) <= outer}``.

    A cell is accepted once ``d(center) >= ACCEPT_RATIO * half``; cells lying
    inside E or beyond ``outer`` are dropped. Cells still unresolved at
    ``max_depth`` touch E and are kept as boundary cells (``boundary=True``)
    so that the weights cover everything up to L.
    """
    z, _, _ = E.sample_boundary(256)
    c0 = complex((z.real.max() + z.real.min()) / 2, (z.imag.max() + z.imag.min()) / 2)
    H = max(z.real.max() - z.real.min(), z.imag.max() - z.imag.min()) / 2 + outer
    centers = np.array([c0])
    half = H
    out: list[WhitneyCell] = []
    for depth in range(max_depth + 1):
        d = np.asarray(E.distance(centers), dtype=float)
        bd = np.asarray(E.boundary_distance(centers), dtype=float)
        diag = np.sqrt(2) * half
        inside = (d == 0) & (bd > diag * BUMP_STRETCH)
        beyond = d - diag > outer
        accept = (d >= ACCEPT_RATIO * half) & ~beyond
        last = depth == max_depth
        if last:
            accept = ~(inside | beyond)
        if np.any(accept):
            near = np.asarray(E.nearest_point(centers[accept]), dtype=complex)
            for c, dd, zn in zip(centers[accept], d[accept], near):
                out.append(WhitneyCell(complex(c), half, float(dd), complex(zn),
                                       boundary=bool(last and dd < ACCEPT_RATIO * half)))
        split = ~(accept | inside | beyond)
        if last or not np.any(split):
            break
        q = half / 2
        offs = np.array([-q - 1j * q, q - 1j * q, -q + 1j * q, q + 1j * q])
        centers = (centers[split][:, None] + offs[None, :]).ravel()
        half = q
    return out


def _bump(t):
    a = np.abs(t)
    inside = a < 1
    b = np.where(inside, (1 - a) ** 2 * (1 + 2 * a), 0.0)
    db = np.where(inside, -6 * t * (1 - a), 0.0)
    return b, db


def _cutoff(d, s):
    """C^1 step: 1 for d <= 2s, 0 for d >= 3s; returns value and d/dd."""
    t = np.clip((d - 2 * s) / s, 0, 1)
    return 1 - (3 * t ** 2 - 2 * t ** 3), -(6 * t - 6 * t ** 2) / s


@dataclass
class ExtensionField:
    """Compactly supported extension of F with analytic ``dbar``."""

    E: Continuum
    F: FunctionHandle
    order: int
    scale: float
    cells: list[WhitneyCell]
    max_depth: int
    _tree: cKDTree = field(repr=False, default=None)

    def __post_init__(self):
        c = np.array([cell.center for cell in self.cells])
        self._cx = c
        self._h = np.array([cell.half for cell in self.cells])
        self._tree = cKDTree(np.c_[c.real, c.imag]) if len(c) else None

    @property
    def support_radius(self) -> float:
        return 3 * self.scale

    def _blend(self, zeta: np.ndarray):
        """Return ``(S, dS, A, B)`` sums over cells at the points ``zeta``."""
        m = len(zeta)
        S = np.zeros(m)
        dS = np.zeros(m, dtype=complex)
        A = np.zeros(m, dtype=complex)
        B = np.zeros(m, dtype=complex)
        if self._tree is None or m == 0:
            return S, dS, A, B
        ptree = cKDTree(np.c_[zeta.real, zeta.imag])
        for i, cell in enumerate(self.cells):
            r = BUMP_STRETCH * cell.half
            idx = ptree.query_ball_point([cell.center.real, cell.center.imag], r * np.sqrt(2))
            if not idx:
                continue
            idx = np.asarray(idx)
            zz = zeta[idx]
            X = (zz.real - cell.center.real) / r
            Y = (zz.imag - cell.center.imag) / r
            bx, dbx = _bump(X)
            by, dby = _bump(Y)
            phi = bx * by
            keep = phi > 0
            if not np.any(keep):
                continue
            idx, zz, phi = idx[keep], zz[keep], phi[keep]
            dphi = 0.5 * (dbx[keep] * by[keep] + 1j * bx[keep] * dby[keep]) / r
            P = cell.poly(zz)
            S[idx] += phi
            dS[idx] += dphi
            A[idx] += phi * P
            B[idx] += dphi * P
        return S, dS, A, B

    def _outside_parts(self, zeta):
        d = np.asarray(self.E.distance(zeta), dtype=float)
        S, dS, A, B = self._blend(zeta)
        covered = S > 0
        Sg = np.where(covered, S, 1.0)
        val = np.where(covered, A / Sg, 0.0)
        dval = np.where(covered, (B * Sg - A * dS) / Sg ** 2, 0.0)
        chi, dchi = _cutoff(d, self.scale)
        near = np.asarray(self.E.nearest_point(zeta), dtype=complex)
        with np.errstate(invalid="ignore", divide="ignore"):
            dbar_d = np.where(d > 0, (zeta - near) / (2 * d), 0.0)
        return d, covered, val, dval, chi, dchi * dbar_d

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        inE = self.E.contains(flat)
        if np.any(inE):
            out[inE] = self.F(flat[inE])
        rest = ~inE
        if np.any(rest):
            d, _, val, _, chi, _ = self._outside_parts(flat[rest])
            out[rest] = np.where(d >= self.support_radius, 0.0, chi * val)
        return out.reshape(zeta.shape)

    def dbar(self, zeta):
        """``dbar F_ext``; zero on E and beyond the support."""
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        rest = ~self.E.contains(flat)
        if np.any(rest):
            d, covered, val, dval, chi, dchi = self._outside_parts(flat[rest])
            v = chi * dval + dchi * val
            out[rest] = np.where(covered & (d < self.support_radius), v, 0.0)
        return out.reshape(zeta.shape)

    def weight_sum(self, zeta):
        """Sum of the normalized partition weights (0 where no cell covers zeta)."""
        zeta = np.asarray(zeta, dtype=complex).ravel()
        S, *_ = self._blend(zeta)
        return np.where(S > 0, S / np.where(S > 0, S, 1.0), 0.0)

    def quadrature_points(self, refine: float = 16.0, min_split: int = 4):
        """Midpoints and areas of sub-cells of side at most ``scale / refine``.

        The cut-off layer has width ``scale``, so large outer cells are split
        to resolve it. Every cell is split at least ``min_split`` times per
        side: at a cell's own center only its bump is active, so dbar
        vanishes there and lives in the overlap bands near the cell edges.
        """
        pts, areas = [], []
        hq = self.scale / refine
        for cell in self.cells:
            g = max(min_split, int(np.ceil(cell.half / hq)))
            s = 2 * cell.half / g
            off = -cell.half + s * (np.arange(g) + 0.5)
            sub = cell.center + off[None, :] + 1j * off[:, None]
            pts.append(sub.ravel())
            areas.append(np.full(g * g, s * s))
        if not pts:
            return np.zeros(0, dtype=complex), np.zeros(0)
        return np.concatenate(pts), np.concatenate(areas)

    def cell_table(self) -> list[dict]:
        c = np.array([cell.center for cell in self.cells])
        db = self.dbar(c) if len(c) else np.zeros(0)
        return [{"center": [cell.center.real, cell.center.imag], "d": cell.dist,
                 "half": cell.half, "dbar": float(abs(v))} for cell, v in zip(self.cells, db)]


def cell_diagnostics(ext: ExtensionField, resolution: int = 12) -> list[dict]:
    """Per-cell ``|dbar F|`` against ``omega_{F,k,z*}(23 d) / d``.

    Boundary cells (no separation from E) get ``bound = ratio = nan``.
    """
    from .approx import local_modulus
    rows = ext.cell_table()
    for cell, row in zip(ext.cells, rows):
        if cell.boundary or cell.dist <= 0:
            row["bound"] = row["ratio"] = float("nan")
            continue
        delta = min(WINDOW_FACTOR * cell.dist, 0.99 * ext.E.diameter)
        om = local_modulus(ext.F, ext.E, ext.order, cell.nearest, delta, resolution)
        row["bound"] = float(om / cell.dist)
        row["ratio"] = float(row["dbar"] / row["bound"]) if om > 0 else float("nan")
    return rows


def _jet(F: FunctionHandle, E: Continuum, cell: WhitneyCell, order: int) -> CPolynomial:
    """Taylor polynomial of F of degree ``<= order - 1`` at the cell's anchor.

    The expansion stops before the first derivative that is unavailable or
    not finite (e.g. at a branch point).
    """
    z0 = cell.center if cell.dist == 0 else cell.nearest
    at = np.array([z0])
    coef = [complex(F(at)[0])]
    fact = 1.0
    for l in range(1, min(order - 1, F.max_order) + 1):
        v = complex(F.derivative(l, at)[0])
        if not np.isfinite(v):
            break
        fact *= l
        coef.append(v * cell.half ** l / fact)
    return CPolynomial(np.array(coef), Frame(complex(z0), complex(cell.half), "monomial"))


def _fit_cell(F: FunctionHandle, E: Continuum, cell: WhitneyCell, order: int,
              resolution: int, cache: dict) -> CPolynomial:
    if cell.boundary:
        return _jet(F, E, cell, order)
    radius = WINDOW_FACTOR * cell.dist
    whole = radius >= 2 * E.diameter
    key = "whole" if whole else None
    if key in cache:
        return cache[key]
    center = E.centroid if whole else cell.nearest
    rad = min(radius, 2 * E.diameter)
    for _ in range(5):
        pts = window_samples(E, center, rad, resolution) if rad < E.diameter else _global_samples(E, resolution)
        if len(pts) > order:
            break
        rad *= 2
    else:
        raise ConstructionFailure("empty fit window", {"center": [center.real, center.imag]})
    pts = np.unique(np.round(pts, 14))
    fr = Frame(complex(center), complex(rad), "monomial")
    poly = lawson(pts, F(pts), order - 1, fr, tol=1e-2, maxiter=60).poly
    if key:
        cache[key] = poly
    return poly


def _global_samples(E: Continuum, resolution: int) -> np.ndarray:
    z, _, _ = E.sample_boundary(8 * resolution)
    return np.r_[z, E.interior_grid(resolution)]


def extend(F: FunctionHandle, E: Continuum, k: int, max_depth: int = 7,
           resolution: int = 12) -> ExtensionField:
    """Whitney extension of F using local fits of degree ``k - 1``.

    Parameters
    ----------
    k : int
        Order of the local modulus controlling the extension; fits on
        ``E ∩ D(z*, 23 d)`` have degree ``k - 1``.
    max_depth : int
        Quadtree depth; the unresolved strip next to E has width about
        ``4 diam(E) / 2**max_depth``.
    """
    if k < 1:
        raise InvalidArgument("extension order must be >= 1")
    scale = E.diameter / 2
    cells = whitney_cells(E, 3 * scale, max_depth)
    cache: dict = {}
    for cell in cells:
        cell.poly = _fit_cell(F, E, cell, k, resolution, cache)
    return ExtensionField(E, F, k, scale, cells, max_depth)


# -- area integral ------------------------------------------------------------

def _far_weight(r: float, degree: int, lo: float = 2.0, hi: float = 4.0) -> float:
    """Smooth step in the number of digits ``(degree + 1) log10 r`` of the Faber tail."""
    if r <= 1:
        return 0.0
    t = np.clip(((degree + 1) * np.log10(r) - lo) / (hi - lo), 0.0, 1.0)
    return float(3 * t ** 2 - 2 * t ** 3)


def cell_kernel(emap: ExteriorMap, n: int, zeta: complex, power: int = 1) -> CPolynomial:
    """Degree ``<= n`` kernel with pole ``zeta``.

    Near L the kernel is damped (convex E with interior) or powered. Far
    from L, where the Faber tail ``r^-(n+1)`` drops below ``1e-2``, it is
    blended into the truncated Faber expansion of ``1/(zeta - z)``, which is
    geometrically accurate there.
    """
    r = float(np.abs(np.asarray(emap.phi(np.array([zeta])))[0]))
    lam = _far_weight(r, n)
    far = truncated_cauchy_kernel(emap, n, zeta) if lam > 0 else None
    if lam == 1.0:
        return far
    near = correction_kernel(emap, n, zeta, power)
    if far is None:
        return near
    return near * (1 - lam) + far * lam


def area_integral_tn(ext: ExtensionField, emap: ExteriorMap, n: int, power: int = 1,
                     refine: float = 16.0, min_split: int = 4, max_work: float = 5e9) -> CPolynomial:
    """``t_n = -(1/pi) sum dbar F(zeta_c) Q(zeta_c, .)^2 area_c`` (midpoint rule on sub-cells)."""
    if n < 2:
        raise InvalidArgument("t_n needs n >= 2")
    centers, area = ext.quadrature_points(refine, min_split)
    if len(centers) * n * n > max_work:
        raise ResourceError(f"{len(centers)} quadrature points at degree {n} exceed the work budget")
    weights = -(1 / np.pi) * ext.dbar(centers) * area
    live = np.abs(weights) > 1e-16 * max(np.max(np.abs(weights), initial=0.0), 1e-300)
    centers, weights = centers[live], weights[live]
    frame = frame_for(ext.E)
    acc = np.zeros(n + 1, dtype=complex)
    half = n // 2
    for zeta, wgt in zip(centers, weights):
        if wgt == 0:
            continue
        Q = cell_kernel(emap, half, complex(zeta), power)
        sq = (Q * Q).coef
        acc[: len(sq)] += wgt * sq
    return CPolynomial(acc, frame)
