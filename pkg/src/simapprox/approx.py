"""Near-best complex uniform approximation and k-th moduli of continuity.

The discrete minimax problem ``min_p max_i |f(z_i) - p(z_i)|`` is solved by
Lawson's iteratively reweighted least squares on a basis orthonormalized
against the sample points (Vandermonde with Arnoldi). The weighted
least-squares residual is a certified lower bound for the discrete minimax
value, so every returned error comes with a gap ``error / lower_bound``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .functions import FunctionHandle
from .geometry import Continuum
from .polynomial import CPolynomial, Frame, _BASES, frame_for


@dataclass
class NearBestResult:
    poly: CPolynomial
    error: float
    lower_bound: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {"coefficients": self.poly.to_dict(), "error": self.error,
                "lower_bound": self.lower_bound, "iterations": self.iterations,
                "converged": self.converged}


def _arnoldi(zh: np.ndarray, n: int, mulx) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis values Q (M x n+1) and their coefficients C (n+1 x n+1)."""
    M = len(zh)
    Q = np.zeros((M, n + 1), dtype=complex)
    C = np.zeros((n + 1, n + 1), dtype=complex)
    Q[:, 0] = 1.0
    C[0, 0] = 1.0
    for j in range(n):
        v = zh * Q[:, j]
        c = np.zeros(n + 1, dtype=complex)
        c[: j + 2] = mulx(C[: j + 1, j])[: j + 2]
        # classical Gram-Schmidt, twice
        for _ in range(2):
            h = Q[:, : j + 1].conj().T @ v / M
            v = v - Q[:, : j + 1] @ h
            c = c - C[:, : j + 1] @ h
        nrm = np.linalg.norm(v) / np.sqrt(M)
        if nrm == 0 or not np.isfinite(nrm):
            raise InvalidArgument("sample set too small for the requested degree")
        Q[:, j + 1] = v / nrm
        C[:, j + 1] = c / nrm
    return Q, C


def lawson(z, fvals, n: int, frame: Frame, tol: float = 1e-3, maxiter: int = 200) -> NearBestResult:
    """Discrete complex minimax of degree ``n`` on the points ``z``."""
    z = np.asarray(z, dtype=complex).ravel()
    fvals = np.asarray(fvals, dtype=complex).ravel()
    if not np.all(np.isfinite(fvals)):
        raise InvalidArgument("function is not finite on the sample set")
    n = int(n)
    mulx = _BASES[frame.basis][5]
    Q, C = _arnoldi(frame.local(z), n, mulx)
    M = len(z)
    floor = 1e-13 * max(1.0, float(np.max(np.abs(fvals))))
    w = np.full(M, 1.0 / M)
    best = (np.inf, None, 0.0)
    converged = False
    it = 0
    for it in range(1, maxiter + 1):
        if n == 0:
            # weighted mean; Q is the constant column
            coef = np.array([np.sum(w * fvals)])
        else:
            sw = np.sqrt(w)
            coef, *_ = np.linalg.lstsq(Q * sw[:, None], fvals * sw, rcond=None)
        r = np.abs(fvals - Q @ coef)
        upper = float(r.max())
        lower = float(np.sqrt(np.sum(w * r ** 2)))
        if upper < best[0]:
            best = (upper, coef, max(lower, best[2]))
        else:
            best = (best[0], best[1], max(lower, best[2]))
        if upper <= (1 + tol) * lower or upper <= floor:
            converged = True
            break
        w = w * r
        s = w.sum()
        if s == 0:
            converged = True
            break
        w /= s
    upper, coef, lower = best
    poly = CPolynomial(C @ coef, frame)
    return NearBestResult(poly, upper, lower, it, converged)


def near_best(f: FunctionHandle, E: Continuum, n: int, M: int | None = None,
              tol: float = 1e-3, maxiter: int = 200, frame: Frame | None = None) -> NearBestResult:
    """Near-best uniform approximant of degree ``n`` from boundary samples.

    By the maximum principle the sup of ``f - p`` over E is attained on the
    boundary, so only boundary samples are used.

    Parameters
    ----------
    M : int, optional
        Number of boundary samples; defaults to ``max(8(n+1), 256)``.
    tol : float
        Relative gap between the returned error and the certified lower
        bound at which iteration stops.
    """
    if n < 0:
        raise InvalidArgument("degree must be nonnegative")
    if M is None:
        M = max(8 * (n + 1), 256)
    if M < 8 * (n + 1):
        raise InvalidArgument("need at least 8(n+1) samples")
    z, _, _ = E.sample_boundary(M)
    return lawson(z, f(z), n, frame or frame_for(E), tol, maxiter)


# -- moduli of continuity -----------------------------------------------------

def window_samples(E: Continuum, z: complex, delta: float, resolution: int = 32) -> np.ndarray:
    """Sample points of ``E ∩ D(z, delta)``.

    Boundary arcs inside the disk are resampled at spacing ``delta/resolution``,
    the part of the circle ``|ζ - z| = delta`` inside E is added, and, when E
    has interior, a ``resolution x resolution`` polar grid clipped to E.
    """
    z = complex(z)
    per = E.perimeter
    # coarse scan: any boundary point of the window is within delta + h/2 of a sample
    M0 = 2048
    t0 = np.arange(M0) / M0
    b0 = E.boundary_point(t0)
    h = per / M0
    near = np.abs(b0 - z) <= delta + h
    pts = []
    if np.any(near):
        idx = np.nonzero(near)[0]
        # contiguous circular runs of flagged indices
        breaks = np.nonzero(np.diff(idx) > 1)[0]
        starts = np.r_[idx[0], idx[breaks + 1]]
        ends = np.r_[idx[breaks], idx[-1]]
        runs = list(zip(starts, ends))
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == M0 - 1:
            last_start, _ = runs.pop()
            _, first_end = runs.pop(0)
            runs.append((last_start, first_end + M0))
        for s, e in runs:
            ta, tb = (s - 1) / M0, (e + 1) / M0
            count = int(np.ceil((tb - ta) * per / (delta / resolution))) + 2
            tt = np.linspace(ta, tb, count)
            bb = E.boundary_point(tt)
            pts.append(bb[np.abs(bb - z) <= delta])
    if E.kind == "polygon":
        v = E.vertices
        pts.append(v[np.abs(v - z) <= delta])
    if E.has_interior:
        th = 2 * np.pi * np.arange(4 * resolution) / (4 * resolution)
        circ = z + delta * np.exp(1j * th)
        pts.append(circ[E.contains(circ)])
        rr = delta * np.arange(1, resolution + 1) / resolution
        tg = 2 * np.pi * np.arange(resolution) / resolution
        grid = (z + rr[:, None] * np.exp(1j * tg[None, :])).ravel()
        pts.append(grid[E.contains(grid)])
    if bool(E.contains(np.array([z]))[0]):
        pts.append(np.array([z]))
    out = np.concatenate(pts) if pts else np.zeros(0, dtype=complex)
    return out


def local_modulus(f: FunctionHandle, E: Continuum, k: int, z: complex, delta: float,
                  resolution: int = 32, tol: float = 1e-3) -> float:
    """Discrete ``E_{k-1}(f, E ∩ D(z, delta))``."""
    if k < 1:
        raise InvalidArgument("order k must be >= 1")
    if not (0 < delta < E.diameter):
        raise InvalidArgument("delta must lie in (0, diam E)")
    pts = window_samples(E, z, delta, resolution)
    if len(pts) == 0:
        raise InvalidArgument("E ∩ D(z, delta) is empty")
    pts = np.unique(np.round(pts, 14))
    fv = f(pts)
    if len(pts) <= k:
        return 0.0
    fr = Frame(complex(z), complex(delta), "monomial")
    return lawson(pts, fv, k - 1, fr, tol=tol).error


@dataclass
class ModulusProfile:
    """Tabulated ``omega_k(delta)`` with a Dini-type constant."""

    k: int
    deltas: np.ndarray
    omegas: np.ndarray
    tail_exponent: float
    dini_constant: float | None = None
    raw: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_table(cls, k: int, deltas, omegas, tail_exponent: float | None = None) -> "ModulusProfile":
        d = np.asarray(deltas, dtype=float)
        w = np.asarray(omegas, dtype=float)
        if np.any(np.diff(d) <= 0):
            raise InvalidArgument("delta grid must be strictly ascending")
        raw = w.copy()
        w = np.maximum.accumulate(w)
        if tail_exponent is None:
            tail_exponent = _fitted_tail(d, w, k)
        prof = cls(k, d, w, float(tail_exponent), None, raw)
        prof.dini_constant = prof._dini()
        return prof

    def __call__(self, delta):
        """Log-log interpolation; power-law tail below the grid, flat above."""
        delta = np.asarray(delta, dtype=float)
        d, w = self.deltas, self.omegas
        if np.all(w <= 0):
            return np.zeros_like(delta)
        lw = np.log(np.maximum(w, 1e-300))
        out = np.exp(np.interp(np.log(np.maximum(delta, 1e-300)), np.log(d), lw))
        below = delta < d[0]
        out = np.where(below, w[0] * (np.maximum(delta, 0) / d[0]) ** self.tail_exponent, out)
        return out

    def _dini(self) -> float | None:
        d, w = self.deltas, self.omegas
        if np.all(w <= 0):
            return None
        tail = w[0] / self.tail_exponent
        lt = np.log(d)
        cum = np.r_[0.0, np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(lt))]
        vals = (tail + cum) / np.where(w > 0, w, np.inf)
        return float(np.max(vals))

    def slope(self) -> float:
        """Least-squares slope of log omega against log delta."""
        keep = self.omegas > 0
        return float(np.polyfit(np.log(self.deltas[keep]), np.log(self.omegas[keep]), 1)[0])

    def to_dict(self) -> dict:
        return {"k": self.k, "deltas": self.deltas.tolist(), "omegas": self.omegas.tolist(),
                "tail_exponent": self.tail_exponent, "dini_constant": self.dini_constant}


def _fitted_tail(d, w, k) -> float:
    keep = w > 0
    if keep.sum() < 2:
        return float(k)
    s = np.polyfit(np.log(d[keep][:3]), np.log(w[keep][:3]), 1)[0]
    return float(np.clip(s, 0.05, k))


def _tail_from_tag(f: FunctionHandle, k: int) -> float | None:
    if f.smoothness == "analytic":
        return float(k)
    if f.smoothness == "holder" and f.beta is not None and f.beta > 0:
        return float(min(f.beta, k))
    return None


def modulus_centers(E: Continuum, Mz: int) -> np.ndarray:
    """Boundary samples plus, when E has interior, a coarse interior grid."""
    if Mz < 16:
        raise InvalidArgument("need at least 16 centres")
    z, _, _ = E.sample_boundary(Mz)
    if E.has_interior:
        z = np.r_[z, E.interior_grid(6)]
    return z


def global_modulus_profile(f: FunctionHandle, E: Continuum, k: int, deltas, Mz: int = 32,
                           resolution: int = 32, centers=None) -> ModulusProfile:
    """``omega_{f,k,E}(delta) = sup_z omega_{f,k,z,E}(delta)`` on a delta grid."""
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) <= 0):
        raise InvalidArgument("delta grid must be strictly ascending")
    zc = modulus_centers(E, Mz) if centers is None else np.asarray(centers, dtype=complex)
    om = np.zeros(len(deltas))
    for i, d in enumerate(deltas):
        om[i] = max(local_modulus(f, E, k, c, d, resolution) for c in zc)
    return ModulusProfile.from_table(k, deltas, om, _tail_from_tag(f, k))


def default_deltas(E: Continuum, n_max: int, count: int = 14) -> np.ndarray:
    """Geometric delta grid covering the scales ``rho_{1/n}`` can take."""
    lo = E.diameter * min(1e-3, 0.1 / n_max ** 2)
    hi = 0.9 * E.diameter
    return np.geomspace(lo, hi, count)
