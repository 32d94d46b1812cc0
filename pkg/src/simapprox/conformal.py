"""Exterior conformal maps Phi: Omega -> {|w| > 1} and their inverses.

Disks, ellipses and segments have closed forms (the Joukowski family).
Polygons use the exterior Schwarz-Christoffel representation

    Psi'(w) = C * prod_k (1 - w_k / w) ** mu_k,   mu_k = turning angle / pi,

whose prevertices ``w_k`` on the unit circle are found by solving the
parameter problem in log-gap coordinates. Integrals start at a prevertex and
use Gauss-Jacobi rules to absorb the corner singularity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree
from scipy.special import roots_jacobi, roots_legendre

from .errors import ConstructionFailure, DomainError, InvalidArgument
from .geometry import Continuum

GOLDEN = (np.sqrt(5) - 1) / 2


@lru_cache(maxsize=None)
def _jacobi01(n: int, mu: float):
    """Nodes/weights for int_0^1 t**mu g(t) dt."""
    x, w = roots_jacobi(n, 0.0, mu)
    return (x + 1) / 2, w / 2 ** (1 + mu)


@lru_cache(maxsize=None)
def _legendre01(n: int):
    x, w = roots_legendre(n)
    return (x + 1) / 2, w / 2


class ExteriorMap:
    """Base class: subclasses provide ``psi``, ``dpsi`` and ``_phi``."""

    domain: Continuum
    capacity: float

    def psi(self, w):
        raise NotImplementedError

    def dpsi(self, w):
        raise NotImplementedError

    def _phi(self, z):
        raise NotImplementedError

    def phi(self, z):
        """Phi(z) for z in the closure of Omega (vectorized)."""
        z = np.asarray(z, dtype=complex)
        if np.any(self.domain.classify_many(z) == "interior"):
            raise DomainError("phi is defined only on the closure of the complement of E")
        w = np.asarray(self._phi(z), dtype=complex)
        r = np.abs(w)
        # boundary points land on |w| = 1 up to round-off
        return np.where(r < 1, w / np.where(r > 0, r, 1), w)

    def psi_checked(self, w):
        w = np.asarray(w, dtype=complex)
        if np.any(np.abs(w) < 1 - 1e-12):
            raise DomainError("psi needs |w| >= 1")
        return self.psi(w)

    def laurent(self, nmax: int) -> np.ndarray:
        """Coefficients ``[C, c_0, c_1, ..., c_nmax]`` of Psi = C w + sum c_j w^-j."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.domain.kind, "capacity": self.capacity,
                "domain": self.domain.to_dict()}


class DiskMap(ExteriorMap):
    def __init__(self, E: Continuum):
        self.domain = E
        self.c = E.params["center"]
        self.capacity = E.params["radius"]

    def psi(self, w):
        return self.c + self.capacity * np.asarray(w, dtype=complex)

    def dpsi(self, w):
        return np.full(np.shape(w), self.capacity, dtype=complex)

    def _phi(self, z):
        return (z - self.c) / self.capacity

    def laurent(self, nmax):
        out = np.zeros(nmax + 2, dtype=complex)
        out[0], out[1] = self.capacity, self.c
        return out


class JoukowskiMap(ExteriorMap):
    """Psi(w) = c + alpha w + gamma / w for ellipses and segments."""

    def __init__(self, E: Continuum):
        self.domain = E
        p = E.params
        if E.kind == "ellipse":
            a, b, ang = p["a"], p["b"], p["angle"]
            self.c = p["center"]
        else:
            half = (p["b"] - p["a"]) / 2
            a, b, ang = abs(half), 0.0, float(np.angle(half))
            self.c = (p["a"] + p["b"]) / 2
        self.alpha = (a + b) / 2
        self.gamma = (a - b) / 2 * np.exp(2j * ang)
        self.capacity = self.alpha

    def psi(self, w):
        w = np.asarray(w, dtype=complex)
        return self.c + self.alpha * w + self.gamma / w

    def dpsi(self, w):
        w = np.asarray(w, dtype=complex)
        return self.alpha - self.gamma / w ** 2

    def _phi(self, z):
        u = np.asarray(z, dtype=complex) - self.c
        disc = np.sqrt(u * u - 4 * self.alpha * self.gamma)
        w1 = (u + disc) / (2 * self.alpha)
        w2 = (u - disc) / (2 * self.alpha)
        r1, r2 = np.abs(w1), np.abs(w2)
        # on the slit both roots have modulus one; prefer the upper prime end
        tie = np.isclose(r1, r2, rtol=1e-12, atol=0)
        pick1 = np.where(tie, w1.imag >= w2.imag, r1 > r2)
        return np.where(pick1, w1, w2)

    def laurent(self, nmax):
        out = np.zeros(nmax + 2, dtype=complex)
        out[0], out[1] = self.alpha, self.c
        if nmax >= 1:
            out[2] = self.gamma
        return out


class PolygonMap(ExteriorMap):
    """Numerically constructed exterior Schwarz-Christoffel map."""

    NODES = 32

    def __init__(self, E: Continuum, tol: float = 1e-6):
        self.domain = E
        v = E.vertices
        self.vertices = v
        turns = np.angle((np.roll(v, -1) - v) / (v - np.roll(v, 1)))
        self.mu = turns / np.pi
        lengths = np.abs(np.roll(v, -1) - v)
        with np.errstate(invalid="ignore", divide="ignore"):
            self._solve(lengths)
        self.residual = self._side_residual()
        if self.residual > tol * E.diameter:
            raise ConstructionFailure(
                "Schwarz-Christoffel parameter problem did not converge",
                {"boundary_residual": self.residual, "prevertex_angles": self.angles.tolist()})
        self._init_inverse()

    # -- integrals ------------------------------------------------------
    def _prod(self, xi, skip: int | None = None):
        out = np.ones_like(xi)
        for j, (wj, mj) in enumerate(zip(self.w, self.mu)):
            if j != skip:
                out = out * (1 - wj / xi) ** mj
        return out

    def _arc_half(self, k: int, h, sign: float):
        """int of Psi'/C along the unit circle from prevertex k over angle sign*h."""
        h = np.atleast_1d(np.asarray(h, dtype=float))
        t, wt = _jacobi01(self.NODES, float(self.mu[k]))
        tt = h[:, None] * t[None, :]
        xi = self.w[k] * np.exp(1j * sign * tt)
        g = -np.expm1(-1j * sign * tt) / tt  # (1 - w_k/xi) / t
        f = g ** self.mu[k] * self._prod(xi, skip=k) * 1j * sign * xi
        return h ** (1 + self.mu[k]) * (f @ wt)

    def _side_integrals(self, angles):
        """I_k = int of Psi'/C from w_k to w_{k+1} along the circle."""
        n = len(angles)
        gaps = np.mod(np.diff(np.r_[angles, angles[0]]), 2 * np.pi)
        out = np.empty(n, dtype=complex)
        for k in range(n):
            h = gaps[k] / 2
            left = self._arc_half(k, h, +1.0)[0]
            right = self._arc_half((k + 1) % n, h, -1.0)[0]
            out[k] = left - right
        return out

    def _solve(self, lengths):
        n = len(lengths)
        mu = self.mu

        def angles_of(y):
            e = np.exp(np.r_[0.0, y] - np.max(np.r_[0.0, y]))
            gaps = 2 * np.pi * e / e.sum()
            return np.r_[0.0, np.cumsum(gaps)[:-1]]

        def residual(y):
            ang = angles_of(y)
            self.w = np.exp(1j * ang)
            res = np.sum(mu * self.w)
            out = [res.real, res.imag]
            if n > 3:
                I = self._side_integrals(ang)
                out.extend(np.log(np.abs(I[1:n - 2]) / np.abs(I[0])) - np.log(lengths[1:n - 2] / lengths[0]))
            return np.asarray(out)

        y0 = np.log(lengths[1:] / lengths[0])
        # central differences keep the Jacobian accurate enough for the
        # closure residual to reach round-off
        sol = least_squares(residual, y0, method="trf", jac="3-point", xtol=1e-15,
                            ftol=1e-15, gtol=1e-15, max_nfev=4000)
        y = sol.x
        self.solver_cost = float(0.5 * np.sum(residual(y) ** 2))
        ang = angles_of(y)
        self.w = np.exp(1j * ang)
        I = self._side_integrals(ang)
        A = (self.vertices[1] - self.vertices[0]) / I[0]
        # rotate prevertices so that the leading coefficient is real positive
        self.angles = np.mod(ang + np.angle(A), 2 * np.pi)
        self.w = np.exp(1j * self.angles)
        self.capacity = float(abs(A))

    def _side_residual(self) -> float:
        I = self._side_integrals(self.angles)
        v = self.vertices
        return float(np.max(np.abs(v + self.capacity * I - np.roll(v, -1))))

    # -- evaluation -----------------------------------------------------
    def _nearest_prevertex(self, w):
        ang = np.angle(w)
        d = np.abs(np.angle(np.exp(1j * (ang[:, None] - self.angles[None, :]))))
        return np.argmin(d, axis=1)

    FAR = 2.0

    def psi(self, w):
        w = np.asarray(w, dtype=complex)
        flat = np.atleast_1d(w).ravel()
        far = np.abs(flat) > self.FAR
        if not np.any(far):
            return self._psi_near(flat).reshape(w.shape)
        out = np.empty_like(flat)
        out[~far] = self._psi_near(flat[~far])
        out[far] = self._psi_far(flat[far])
        return out.reshape(w.shape)

    def _psi_far(self, w):
        # continue radially from |w| = FAR in s = 1/xi, where
        # (prod(1/s) - 1) / s**2 stays bounded because sum mu_j w_j = 0
        w0 = self.FAR * w / np.abs(w)
        s0, s1 = 1 / w0, 1 / w
        tl, wl = _legendre01(self.NODES)
        s = s0[:, None] + tl[None, :] * (s1 - s0)[:, None]
        g = (self._prod(1 / s) - 1) / s ** 2
        tail = -((g @ wl) * (s1 - s0))
        return self._psi_near(w0) + self.capacity * (w - w0 + tail)

    def _psi_near(self, flat):
        out = np.empty_like(flat)
        ks = self._nearest_prevertex(flat)
        n = self.NODES
        tl, wl = _legendre01(n)
        for k in np.unique(ks):
            sel = ks == k
            wk = self.w[k]
            d = flat[sel] - wk
            mu = float(self.mu[k])
            tj, wj = _jacobi01(n, mu)
            # first half: singular factor t**mu absorbed by the Jacobi weight
            t1 = 0.5 * tj
            xi = wk + t1[None, :] * d[:, None]
            g = (d[:, None] / xi) ** mu
            f1 = g * self._prod(xi, skip=k)
            part1 = 0.5 ** (1 + mu) * (f1 @ wj)
            # second half: smooth
            t2 = 0.5 + 0.5 * tl
            xi = wk + t2[None, :] * d[:, None]
            part2 = 0.5 * (self._prod(xi) @ wl)
            val = self.vertices[k] + self.capacity * d * (part1 + part2)
            val = np.where(d == 0, self.vertices[k], val)
            out[sel] = val
        return out

    def dpsi(self, w):
        w = np.asarray(w, dtype=complex)
        return self.capacity * self._prod(w)

    def _init_inverse(self):
        radii = np.array([1.0, 1.002, 1.01, 1.03, 1.07, 1.15, 1.3, 1.6, 2.0, 2.7, 3.6, 5.0])
        th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        wg = (radii[:, None] * np.exp(1j * th[None, :])).ravel()
        zg = self.psi(wg)
        self._table_w = wg
        self._tree = cKDTree(np.c_[zg.real, zg.imag])
        self._zmax = np.max(np.abs(zg - self.domain.centroid))
        self._c0 = self.laurent(0)[1]

    def _phi(self, z):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self._phi_newton(z)

    def _phi_newton(self, z):
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        _, idx = self._tree.query(np.c_[flat.real, flat.imag])
        w = self._table_w[idx]
        far = np.abs(flat - self.domain.centroid) > self._zmax
        w = np.where(far, (flat - self._c0) / self.capacity, w)
        scale = self.domain.diameter
        err = self.psi(w) - flat
        for _ in range(80):
            active = np.abs(err) > 1e-15 * scale
            if not np.any(active):
                break
            step = err / self.dpsi(w)
            lam = np.ones(len(w))
            for _ in range(30):
                wn = w - lam * step
                en = self.psi(wn) - flat
                bad = active & (np.abs(en) >= np.abs(err)) & (lam > 1e-9)
                if not np.any(bad):
                    break
                lam = np.where(bad, lam / 2, lam)
            improve = active & (np.abs(en) < np.abs(err))
            w = np.where(improve, wn, w)
            err = np.where(improve, en, err)
            if not np.any(improve):
                break
        # exact prevertices for vertices
        dv = np.abs(flat[:, None] - self.vertices[None, :])
        hit = np.min(dv, axis=1) <= self.domain.tol
        w = np.where(hit, self.w[np.argmin(dv, axis=1)], w)
        return w.reshape(z.shape)

    def laurent(self, nmax: int) -> np.ndarray:
        r0 = 1.0 + 4.0 / max(nmax, 8)
        M = max(4096, 16 * (nmax + 2))
        th = 2 * np.pi * np.arange(M) / M
        vals = self.psi(r0 * np.exp(1j * th))
        X = np.fft.fft(vals) / M  # X[m] is the coefficient of exp(i m th)
        out = np.zeros(nmax + 2, dtype=complex)
        out[0] = X[1] / r0
        j = np.arange(nmax + 1)
        out[1:] = X[(-j) % M] * r0 ** j
        return out

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["prevertex_angles"] = self.angles.tolist()
        d["exponents"] = self.mu.tolist()
        d["boundary_residual"] = self.residual
        return d


def build_map(E: Continuum) -> ExteriorMap:
    """Exterior map of E normalized by Phi(inf) = inf, Phi'(inf) > 0."""
    cache = E.__dict__.setdefault("_cache", {})
    if "map" not in cache:
        if E.kind == "disk":
            cache["map"] = DiskMap(E)
        elif E.kind in ("ellipse", "segment"):
            cache["map"] = JoukowskiMap(E)
        elif E.kind == "polygon":
            cache["map"] = PolygonMap(E)
        else:
            raise InvalidArgument(f"no exterior map for kind {E.kind!r}")
    return cache["map"]


def phi(m: ExteriorMap, z):
    return m.phi(z)


def psi(m: ExteriorMap, w):
    return m.psi_checked(w)


@dataclass
class LevelCurve:
    delta: float
    theta: np.ndarray
    points: np.ndarray


def level_curve(m: ExteriorMap, delta: float, M: int = 256) -> LevelCurve:
    """Points Psi((1 + delta) e^{i theta}) on a uniform theta grid."""
    if not (0 < delta <= 10):
        raise InvalidArgument("delta must lie in (0, 10]")
    if M < 64:
        raise InvalidArgument("level curve needs M >= 64")
    th = 2 * np.pi * np.arange(M) / M
    return LevelCurve(float(delta), th, m.psi((1 + delta) * np.exp(1j * th)))


def rho_delta(m: ExteriorMap, z, delta: float, M: int = 1024):
    """dist(z, L_delta), vectorized over z.

    Dense sampling of the level curve followed by golden-section refinement
    on theta around the closest sample. Disks use the exact formula.
    """
    z = np.asarray(z, dtype=complex)
    if isinstance(m, DiskMap):
        return np.abs(np.abs(z - m.c) - m.capacity * (1 + delta))
    flat = np.atleast_1d(z).ravel()
    lc = level_curve(m, delta, M)
    r = 1 + delta
    h = 2 * np.pi / M
    out = np.empty(len(flat))
    for start in range(0, len(flat), 256):
        zz = flat[start:start + 256]
        i = np.argmin(np.abs(zz[:, None] - lc.points[None, :]), axis=1)
        a = lc.theta[i] - h
        b = lc.theta[i] + h

        def dist(t):
            return np.abs(m.psi(r * np.exp(1j * t)) - zz)

        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = dist(c), dist(d)
        for _ in range(70):
            left = fc < fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            d_new = np.where(left, c, a + GOLDEN * (b - a))
            c_new = np.where(left, b - GOLDEN * (b - a), d)
            fd_new = np.where(left, fc, np.nan)
            fc_new = np.where(left, np.nan, fd)
            c, d = c_new, d_new
            need_c = np.isnan(fc_new)
            need_d = np.isnan(fd_new)
            if np.any(need_c):
                fc_new[need_c] = dist(c)[need_c]
            if np.any(need_d):
                fd_new[need_d] = dist(d)[need_d]
            fc, fd = fc_new, fd_new
        best = np.minimum(np.minimum(fc, fd), np.abs(lc.points[i] - zz))
        out[start:start + 256] = best
    return out.reshape(z.shape)


def distortion_exponent(m: ExteriorMap, deltas=(0.1, 0.05, 0.02, 0.01), M: int = 48,
                        radii=(1.02, 1.1, 1.3, 1.7, 2.5)) -> dict:
    """Fit ``log(rho_delta(z)/|z - zeta|) ~ log C + alpha log(delta/|Phi(z) - Phi(zeta)|)``.

    Pairs are boundary samples ``z`` and exterior points ``zeta = Psi(r e^{it})``
    with ``|z - zeta| >= rho_delta(z)``. ``alpha`` is the least-squares slope
    and ``C`` the smallest constant making the fitted line an upper bound.
    """
    z, _, _ = m.domain.sample_boundary(M)
    z = np.unique(np.round(z, 14))
    wz = m.phi(z)
    th = 2 * np.pi * np.arange(M) / M
    w = np.concatenate([r * np.exp(1j * th) for r in radii])
    zeta = m.psi(w)
    xs, ys = [], []
    for d in deltas:
        rho = np.asarray(rho_delta(m, z, d), dtype=float)
        dist = np.abs(z[:, None] - zeta[None, :])
        keep = dist >= rho[:, None]
        xs.append(np.log(d / np.abs(wz[:, None] - w[None, :]))[keep])
        ys.append(np.log(rho[:, None] / dist)[keep])
    x, y = np.concatenate(xs), np.concatenate(ys)
    alpha, _ = np.polyfit(x, y, 1)
    logC = float(np.max(y - alpha * x))
    return {"alpha": float(alpha), "C": float(np.exp(logC)), "pairs": int(len(x))}
