"""Acceptance criteria as callable checks.

Each ``criterion_<i>`` runs its experiment and returns a
:class:`CriterionResult`. Pipeline outputs produced along the way are
collected so that the max-modulus check (criterion 12) can be applied to
every run of a session.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .approx import default_deltas, global_modulus_profile, near_best, ModulusProfile
from .conformal import build_map, rho_delta
from .constructions import (Compact, PipelineResult, sweep_theorem1, sweep_theorem3,
                            theorem1_pipeline, theorem2d_pipeline, theorem3_pipeline,
                            walsh_correct)
from .fekete import fekete_points, log_energy, spacing_diagnostic
from .functions import branch, pole
from .geometry import builtin_domain
from .kernels import KernelSpec, damping, kernel_decay, powered_kernel

BUILTIN_DOMAINS = ("disk", "ellipse", "segment", "square", "lshape")


@dataclass
class CriterionResult:
    """Outcome of one acceptance criterion."""

    id: int
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0
    runs: list = field(default_factory=list, repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.id:2d} {status}  {self.name}: value={self.value:.6g} "
                f"threshold={self.threshold:.6g} ({self.seconds:.1f} s)")

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": bool(self.passed),
                "value": float(self.value), "threshold": float(self.threshold),
                "detail": self.detail, "seconds": self.seconds}


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _outside_pole(E) -> complex:
    return complex(E.centroid + 1.5 * E.diameter)


def _boundary_nodes(E, N: int) -> np.ndarray:
    z, _, _ = E.sample_boundary(4 * N)
    z = np.unique(np.round(z, 14))
    return z[np.linspace(0, len(z) - 1, N).round().astype(int)]


@_timed
def criterion_1() -> CriterionResult:
    """Node residuals of every pipeline stay below ``1e-9 (1 + |f^(l)(z_j)|)``."""
    worst = 0.0
    detail = {}
    runs = []
    for name in BUILTIN_DOMAINS:
        E = builtin_domain(name)
        emap = build_map(E)
        f = pole(_outside_pole(E))
        # interpolation does not depend on the profile; one coarse profile per domain
        prof = global_modulus_profile(f, E, 1, default_deltas(E, 64, 8), Mz=16, resolution=16)
        K = [Compact(E.centroid, 0.1 * E.diameter)] if E.has_interior else []
        for N in (4, 16):
            z = _boundary_nodes(E, N)
            runs.append(theorem1_pipeline(f, E, 1, z, 2 * N + 8, compacts=K, profile=prof, emap=emap))
        z = _boundary_nodes(E, 4)
        for r in (1, 2):
            runs.append(theorem2d_pipeline(f, E, 1, r, z, 8 * (r + 1), compacts=K, profile=prof,
                                           emap=emap))
        runs.append(theorem3_pipeline(f, E, 1, 8, 0.25, compacts=K, profile=prof, emap=emap))
        ratios = [r.residual_ratio for r in runs[-5:]]
        detail[name] = max(ratios)
        worst = max(worst, max(ratios))
    D = builtin_domain("disk")
    runs.append(theorem1_pipeline(branch(0.5, 1.0, D), D, 1, [1, 1j, -1, -1j], 32,
                                  compacts=[Compact(0, 0.5)]))
    worst = max(worst, runs[-1].residual_ratio)
    return CriterionResult(1, "interpolation exactness", worst <= 1e-9, worst, 1e-9, detail, runs=runs)


@_timed
def criterion_2() -> CriterionResult:
    """Boundary ratio against ``omega(rho_{1/n})`` is stable across degrees."""
    D = builtin_domain("disk")
    sw = sweep_theorem1(branch(0.5, 1.0, D), D, 1, [1, 1j, -1, -1j], [16, 32, 64, 128],
                        compacts=[Compact(0, 0.5)])
    drift = sw.ratio_drift()
    return CriterionResult(2, "ratio stability", drift <= 3, drift, 3,
                           {"max_ratios": sw.max_ratios().tolist(), "c1": sw.fits["c1"]},
                           runs=sw.results)


@_timed
def criterion_3() -> CriterionResult:
    """Walsh correction stays within ten times the best approximation error."""
    D = builtin_domain("disk")
    f = pole(2.0)
    z = np.exp(1j * np.array([0.3, 1.4, 2.5, 3.9, 5.2]))
    n = 20
    nb = near_best(f, D, n)
    p = walsh_correct(nb.poly, f, z, n)
    zb, _, _ = D.sample_boundary(4096)
    err = float(np.max(np.abs(p(zb) - f(zb))))
    # best approximation error of 1/(z - a) on the unit disk
    En = 1.0 / (2.0 ** n * (4.0 - 1.0))
    ratio = err / En
    return CriterionResult(3, "Walsh bound", ratio <= 10, ratio, 10,
                           {"error": err, "E_n": En, "near_best_error": nb.error})


@_timed
def criterion_4(n: int = 128) -> CriterionResult:
    """Powered kernels decay like ``|zeta - z|^-(k+1)`` and stay bounded."""
    detail = {}
    ok = True
    margin = -np.inf
    for name in ("disk", "segment"):
        emap = build_map(builtin_domain(name))
        for k in (2, 3):
            Q = powered_kernel(emap, KernelSpec.for_budget(n, k), 1.0)
            dec = kernel_decay(emap, Q, 1.0, n, k)
            detail[f"{name}/k={k}"] = {"slope": dec.slope, "bound": dec.bound}
            ok &= dec.slope <= -(k + 1) + 0.5 and dec.bound <= 50
            margin = max(margin, dec.slope + (k + 1) - 0.5)
    return CriterionResult(4, "kernel decay contract", bool(ok), margin, 0.0, detail)


@_timed
def criterion_5() -> CriterionResult:
    """Damping factor is bounded by one on E and decays on an interior disk."""
    D = builtin_domain("disk")
    zb, _, _ = D.sample_boundary(4096)
    K = Compact(0, 0.5).points(512)
    Ns = np.array([4, 8, 16, 32])
    sup_E = max(float(np.max(np.abs(damping(D, 1.0, N)(zb)))) for N in Ns)
    logs = [np.log(np.max(np.abs(damping(D, 1.0, N)(K)))) for N in Ns]
    rate = float(np.polyfit(Ns, logs, 1)[0])
    ok = sup_E <= 1 + 1e-9 and rate <= -0.25
    return CriterionResult(5, "interior damping", ok, rate, -0.25, {"sup_E": sup_E})


@_timed
def criterion_6(constructive: bool = True) -> CriterionResult:
    """Interior errors decay faster than boundary errors."""
    D = builtin_domain("disk")
    f = pole(2.0)
    nodes = [1, 1j, -1, -1j]
    K = Compact(0, 0.5)
    sw = sweep_theorem1(f, D, 1, nodes, list(range(8, 65, 8)), compacts=[K])
    fit = sw.fits[K.label]
    ratio = fit["log_slope"] / sw.fits["boundary_log_slope"]
    detail = {"boundary_log_slope": sw.fits["boundary_log_slope"],
              "interior_log_slope": fit["log_slope"]}
    runs = list(sw.results)
    ok = ratio >= 1.5
    if constructive:
        cs = sweep_theorem1(f, D, 3, nodes, [8, 16, 24, 32], mode="constructive", compacts=[K])
        cfit = cs.fits[K.label]
        detail["constructive"] = {"c4": cfit["c"], "alpha": cfit["alpha"], "r2": cfit["r2"],
                                  "interior_errors": [r.interior[K.label] for r in cs.results]}
        ok = ok and np.isfinite(cfit["c"]) and cfit["alpha"] >= 0.5
        runs += cs.results
    return CriterionResult(6, "interior superconvergence", bool(ok), ratio, 1.5, detail, runs=runs)


@_timed
def criterion_7() -> CriterionResult:
    """Closed forms of ``rho_delta`` on the disk and at a segment endpoint."""
    D = build_map(builtin_domain("disk"))
    S = build_map(builtin_domain("segment"))
    zb, _, _ = D.domain.sample_boundary(64)
    worst_disk = 0.0
    worst_seg = 0.0
    for d in (1e-1, 1e-2, 1e-3):
        worst_disk = max(worst_disk, float(np.max(np.abs(rho_delta(D, zb, d) - d))))
        exact = d * d / (2 * (1 + d))
        worst_seg = max(worst_seg, abs(float(np.asarray(rho_delta(S, np.array([1.0]), d))[0]) - exact))
    ok = worst_disk <= 1e-10 and worst_seg <= 1e-8
    return CriterionResult(7, "rho closed forms", ok, max(worst_disk, worst_seg), 1e-8,
                           {"disk": worst_disk, "segment": worst_seg})


@_timed
def criterion_8(M: int = 128) -> CriterionResult:
    """Doubling bound and neighbour comparability of ``rho_delta``."""
    detail = {}
    ok = True
    for name in ("disk", "segment", "square"):
        emap = build_map(builtin_domain(name))
        z, _, _ = emap.domain.sample_boundary(M)
        dbl = 0.0
        lo, hi = np.inf, 0.0
        for j in range(1, 11):
            d = 2.0 ** -j
            r1 = np.asarray(rho_delta(emap, z, d))
            r2 = np.asarray(rho_delta(emap, z, 2 * d))
            dbl = max(dbl, float(np.max(r2 / r1)))
            near = np.abs(z[:, None] - z[None, :]) <= r1[:, None]
            q = (r1[None, :] / r1[:, None])[near]
            lo, hi = min(lo, float(q.min())), max(hi, float(q.max()))
        detail[name] = {"doubling": dbl, "neighbour_min": lo, "neighbour_max": hi}
        ok &= dbl <= 8 and lo >= 0.1 and hi <= 10
    worst = max(v["doubling"] for v in detail.values())
    return CriterionResult(8, "rho properties", bool(ok), worst, 8, detail)


def brute_force_fekete(cand: np.ndarray, N: int) -> tuple[np.ndarray, float]:
    """Exhaustive maximizer of the log-energy over ``N``-subsets of ``cand``."""
    best, best_e = None, -np.inf
    for combo in itertools.combinations(range(len(cand)), N):
        e = log_energy(cand[list(combo)])
        if e > best_e:
            best, best_e = combo, e
    return cand[list(best)], best_e


@_timed
def criterion_9() -> CriterionResult:
    """Fekete points: segment and circle recovery, square spacing."""
    seg = builtin_domain("segment")
    S3 = fekete_points(seg, 3)
    grid = np.linspace(-1, 1, 41).astype(complex)
    bf, _ = brute_force_fekete(grid, 3)
    seg_err = float(np.max(np.abs(np.sort(S3.points.real) - np.sort(bf.real))))
    seg_exact = float(np.max(np.abs(np.sort(S3.points.real) - np.array([-1.0, 0.0, 1.0]))))
    disk = builtin_domain("disk")
    S5 = fekete_points(disk, 5)
    th = np.sort(np.mod(np.angle(S5.points), 2 * np.pi))
    gaps = np.diff(np.r_[th, th[0] + 2 * np.pi])
    gap_err = float(np.max(np.abs(gaps - 2 * np.pi / 5)))
    sq = builtin_domain("square")
    sp = spacing_diagnostic(build_map(sq), fekete_points(sq, 16))
    grid_tol = 2.0 / (32 * 3)
    ok = seg_err <= grid_tol and seg_exact <= grid_tol and gap_err <= 1e-4 and sp.ratio <= 3
    return CriterionResult(9, "Fekete recovery", ok, sp.ratio, 3,
                           {"segment_vs_brute_force": seg_err, "segment_vs_exact": seg_exact,
                            "circle_gap_error": gap_err, "square_gap_ratio": sp.ratio})


@_timed
def criterion_10() -> CriterionResult:
    """Error ratio of the Fekete interpolant is stable as N doubles."""
    D = builtin_domain("disk")
    eps = 0.25
    counts = [16, 32, 64]
    sw = sweep_theorem3(branch(0.5, 1.0, D), D, 1, counts, eps, compacts=[Compact(0, 0.5)])
    er = np.array(sw.fits["error_ratios"])
    drift = float(np.max(np.maximum(er[1:] / er[:-1], er[:-1] / er[1:])))
    deg_ok = all(r.degree <= (1 + eps) * N + 1 for r, N in zip(sw.results, counts))
    return CriterionResult(10, "Fekete interpolation stability", drift <= 2 and deg_ok, drift, 2,
                           {"error_ratios": er.tolist(), "degrees": [r.degree for r in sw.results]},
                           runs=sw.results)


@_timed
def criterion_11() -> CriterionResult:
    """Doubling property of computed moduli and the Dini constant of ``delta^1/2``."""
    D = builtin_domain("disk")
    k = 1
    worst = 0.0
    detail = {}
    for label, f in (("branch", branch(0.5, 1.0, D)), ("pole", pole(2.0))):
        prof = global_modulus_profile(f, D, k, default_deltas(D, 64))
        d, w = prof.deltas, prof.omegas
        for t in (2, 4, 8):
            inside = d * t <= d[-1]
            q = prof(t * d[inside]) / (t ** k * w[inside])
            worst = max(worst, float(np.max(q)))
        detail[label] = {"slope": prof.slope(), "dini": prof.dini_constant}
    d = np.geomspace(1e-6, 1.0, 60)
    dini = ModulusProfile.from_table(1, d, np.sqrt(d), 0.5).dini_constant
    detail["dini_sqrt"] = dini
    ok = worst <= 16 and abs(dini - 2) <= 0.2
    return CriterionResult(11, "modulus property", ok, worst, 16, detail)


def criterion_12(runs: list | None = None) -> CriterionResult:
    """Interior compact errors never exceed the boundary sup error."""
    t0 = time.perf_counter()
    if not runs:
        D = builtin_domain("disk")
        K = [Compact(0, 0.5), Compact(0.3j, 0.4)]
        runs = [theorem1_pipeline(pole(2.0), D, 1, [1, 1j, -1, -1j], n, compacts=K)
                for n in (8, 16, 32)]
        runs.append(theorem3_pipeline(branch(0.5, 1.0, D), D, 1, 8, 0.25, compacts=K))
    worst = max(max(r.interior.values(), default=-np.inf) - r.boundary_error for r in runs)
    ok = all(r.max_modulus_ok for r in runs)
    return CriterionResult(12, "max-modulus sanity", ok, float(worst), 1e-12,
                           {"runs": len(runs)}, time.perf_counter() - t0)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
            11: criterion_11}


def run_criteria(ids=None, quick: bool = False) -> list[CriterionResult]:
    """Run the selected criteria in order; criterion 12 checks every run collected."""
    ids = sorted(ids or list(CRITERIA) + [12])
    out = []
    runs: list[PipelineResult] = []
    for i in ids:
        if i == 12:
            continue
        res = criterion_6(constructive=not quick) if i == 6 else CRITERIA[i]()
        runs += res.runs
        out.append(res)
    if 12 in ids:
        out.append(criterion_12(runs))
    return out
