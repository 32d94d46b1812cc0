"""Grid-restricted Fekete points and the node diagnostics built on them.

Fekete points maximize ``sum_{i<j} log |z_i - z_j|``; for a continuum they
lie on the outer boundary, so the search runs over boundary candidates.
Greedy Leja seeding is followed by single-point exchanges, and the
candidate grid is doubled until the energy stops improving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .conformal import ExteriorMap
from .errors import InvalidArgument
from .geometry import Continuum

ENERGY_GAIN_TOL = 1e-8
MAX_DOUBLINGS = 4


@dataclass
class FeketeSet:
    """Approximate Fekete points with their log-energy.

    Parameters
    ----------
    points : ndarray of complex
    energy : float
        ``sum_{i<j} log |z_i - z_j|``.
    method : {"exact-small", "leja+exchange"}
        ``exact-small`` marks sets cross-checked by randomized restarts.
    """

    points: np.ndarray
    energy: float
    method: str
    grid: int
    restart_energies: list = field(default_factory=list)
    history: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {"points": [[float(z.real), float(z.imag)] for z in self.points],
                "energy": self.energy, "method": self.method, "grid": self.grid,
                "restart_energies": list(self.restart_energies)}


def log_energy(z) -> float:
    """``sum_{i<j} log |z_i - z_j|`` (``-inf`` for coincident points)."""
    z = np.asarray(z, dtype=complex)
    i, j = np.triu_indices(len(z), 1)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.abs(z[i] - z[j]))))


def _candidates(E: Continuum, M: int) -> np.ndarray:
    # segments get M + 1 endpoints-inclusive samples so that grids nest on doubling
    z, _, _ = E.sample_boundary(M + 1 if E.kind == "segment" else M)
    return np.unique(np.round(z, 15))


def _leja(cand: np.ndarray, N: int, start: int) -> np.ndarray:
    idx = [start]
    logsum = np.zeros(len(cand))
    for _ in range(1, N):
        with np.errstate(divide="ignore"):
            logsum += np.log(np.abs(cand - cand[idx[-1]]))
        score = logsum.copy()
        score[idx] = -np.inf
        idx.append(int(np.argmax(score)))
    return np.array(idx)


def _exchange(cand: np.ndarray, idx: np.ndarray, history: list) -> np.ndarray:
    """Single-point moves in fixed order until none increases the energy."""
    idx = idx.copy()
    pts = cand[idx]
    with np.errstate(divide="ignore"):
        L = np.log(np.abs(cand[:, None] - pts[None, :]))  # (M, N)
    energy = log_energy(pts)
    history.append(energy)
    improved = True
    while improved:
        improved = False
        for i in range(len(idx)):
            others = np.delete(np.arange(len(idx)), i)
            score = L[:, others].sum(axis=1)
            score[idx[others]] = -np.inf
            cur = score[idx[i]]
            best = int(np.argmax(score))
            if score[best] > cur + 1e-13 * max(1.0, abs(cur)):
                idx[i] = best
                with np.errstate(divide="ignore"):
                    L[:, i] = np.log(np.abs(cand - cand[best]))
                new = log_energy(cand[idx])
                assert new >= energy - 1e-9 * max(1.0, abs(energy)), "exchange decreased the energy"
                energy = new
                history.append(energy)
                improved = True
    return idx


def _search(E: Continuum, N: int, grid: int, start_point: complex | None, history: list):
    M = grid
    cand = _candidates(E, M)
    start = 0 if start_point is None else int(np.argmin(np.abs(cand - start_point)))
    if start_point is None:
        start = int(np.argmax(np.abs(cand - E.centroid)))
    idx = _exchange(cand, _leja(cand, N, start), history)
    pts = cand[idx]
    energy = log_energy(pts)
    for _ in range(MAX_DOUBLINGS):
        M *= 2
        cand = np.unique(np.r_[_candidates(E, M), pts])
        idx = np.array([int(np.argmin(np.abs(cand - p))) for p in pts])
        idx = _exchange(cand, idx, history)
        new_pts = cand[idx]
        new = log_energy(new_pts)
        gain = new - energy
        pts, energy = new_pts, new
        if gain < ENERGY_GAIN_TOL:
            break
    return pts, energy, M


def fekete_points(E: Continuum, N: int, grid: int | None = None, restarts: int = 4,
                  seed: int = 0) -> FeketeSet:
    """Approximate Fekete points of E on a boundary grid.

    Parameters
    ----------
    N : int
        Number of points, ``N >= 2``.
    grid : int, optional
        Initial number of boundary candidates, at least ``32 N``.
    restarts : int
        Randomized Leja starts used to cross-check sets with ``N <= 8``.
    """
    if N < 2:
        raise InvalidArgument("need at least two Fekete points")
    grid = 32 * N if grid is None else int(grid)
    if grid < 32 * N:
        raise InvalidArgument("candidate grid must have at least 32 N points")
    history: list = []
    pts, energy, M = _search(E, N, grid, None, history)
    method = "leja+exchange"
    energies: list = []
    if N <= 8 and restarts > 0:
        rng = np.random.default_rng(seed)
        cand = _candidates(E, grid)
        for _ in range(restarts):
            start = complex(cand[rng.integers(len(cand))])
            p2, e2, M2 = _search(E, N, grid, start, [])
            energies.append(e2)
            if e2 > energy + 1e-12:
                pts, energy, M = p2, e2, M2
        method = "exact-small"
    order = np.lexsort((pts.imag, pts.real))
    return FeketeSet(pts[order], energy, method, M, energies, history)


# -- diagnostics --------------------------------------------------------------

def _boundary_angles(emap: ExteriorMap, points) -> np.ndarray:
    E = emap.domain
    z = np.asarray(points, dtype=complex)
    if not np.all(E.classify_many(z) == "boundary"):
        raise InvalidArgument("all points must lie on the boundary")
    return np.sort(np.mod(np.angle(emap.phi(z)), 2 * np.pi))


@dataclass
class SpacingTable:
    theta: np.ndarray
    gaps: np.ndarray
    ratio: float
    scaled_min: float
    scaled_max: float

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "gaps": self.gaps.tolist(), "ratio": self.ratio,
                "N_gap_min": self.scaled_min, "N_gap_max": self.scaled_max}


def spacing_diagnostic(emap: ExteriorMap, S) -> SpacingTable:
    """Sorted ``theta_j = arg Phi(z_j)`` and their cyclic gaps.

    ``scaled_min`` and ``scaled_max`` are the extreme gaps times ``N``. On a
    segment both sides of the slit map to the same points, so the angles
    fill ``[0, pi]`` and the gaps are taken without wrap-around.
    """
    pts = S.points if isinstance(S, FeketeSet) else S
    th = _boundary_angles(emap, pts)
    if emap.domain.kind == "segment":
        gaps = np.diff(th)
    else:
        gaps = np.diff(np.r_[th, th[0] + 2 * np.pi])
    N = len(th)
    return SpacingTable(th, gaps, float(gaps.max() / gaps.min()), float(N * gaps.min()),
                        float(N * gaps.max()))


def equilibrium_diagnostic(emap: ExteriorMap, S) -> float:
    """Kolmogorov distance between the node distribution and equilibrium.

    For a Jordan boundary the pushforward of the equilibrium measure under
    Phi is uniform in ``theta / 2 pi``. For a segment the comparison is
    made in z-space against the arcsine law.
    """
    pts = np.asarray(S.points if isinstance(S, FeketeSet) else S, dtype=complex)
    E = emap.domain
    if E.kind == "segment":
        if not np.all(E.classify_many(pts) == "boundary"):
            raise InvalidArgument("all points must lie on the segment")
        a, b = E.params["a"], E.params["b"]
        x = np.clip(np.real((pts - (a + b) / 2) / ((b - a) / 2)), -1, 1)
        return float(stats.kstest(x, stats.arcsine(loc=-1, scale=2).cdf).statistic)
    th = _boundary_angles(emap, pts)
    return float(stats.kstest(th / (2 * np.pi), "uniform").statistic)
