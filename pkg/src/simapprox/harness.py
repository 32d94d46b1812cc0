"""Experiment configuration, sweep execution and report files.

A run reads an :class:`ExperimentConfig`, executes the matching sweep and
returns an :class:`ApproxReport`. Reports serialize to JSON (schema 1), a
ratio CSV and, optionally, log-log SVG plots written as plain text.

Config files are INI-style with a single ``[experiment]`` section::

    [experiment]
    domain = disk                 ; builtin name, disk:cx,cy,r, ... or JSON
    function = branch:0.5,1       ; pole:a | branch:beta,z0 | logfac:z0 | entire
    theorem = 1                   ; 1 | 2d | 3
    k = 1
    r = 0                         ; derivative order for theorem 2d
    eps = 0.25                    ; degree excess for theorem 3
    nodes = equispaced:4          ; equispaced:N | fekete:N | boundary:N | list:z1;z2;...
    degrees = 16, 32, 64, 128     ; node counts N for theorem 3
    samples = 0                   ; boundary samples for the ratio table, 0 = automatic
    compacts = disk:0,0,0.5       ; semicolon-separated interior disks
    mode = fast                   ; fast | constructive (theorem 1)
    output = out
    seed = 0
    plots = yes
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import traceback
from xml.sax.saxutils import escape
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .conformal import build_map
from .constructions import (RESIDUAL_TOL, Compact, Sweep, sweep_theorem1, sweep_theorem2d,
                            sweep_theorem3)
from .errors import InvalidArgument
from .fekete import fekete_points
from .functions import parse_function
from .geometry import parse_domain

SCHEMA = 1
THEOREMS = ("1", "2d", "3")
RATIO_DRIFT_MAX = 3.0
ERROR_RATIO_DRIFT_MAX = 2.0


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one sweep."""

    domain: str = "disk"
    function: str = "branch:0.5,1"
    theorem: str = "1"
    k: int = 1
    r: int = 0
    eps: float = 0.25
    nodes: str = "equispaced:4"
    degrees: tuple = (16, 32, 64, 128)
    samples: int = 0
    compacts: tuple = ("disk:0,0,0.5",)
    mode: str = "fast"
    output: str = "out"
    seed: int = 0
    plots: bool = True

    def __post_init__(self):
        self.theorem = str(self.theorem)
        self.k, self.r, self.samples, self.seed = int(self.k), int(self.r), int(self.samples), int(self.seed)
        self.eps = float(self.eps)
        self.degrees = tuple(int(d) for d in self.degrees)
        self.compacts = tuple(self.compacts)

    def validate(self) -> None:
        """Check ids and ranges; raises :class:`InvalidArgument`."""
        if self.theorem not in THEOREMS:
            raise InvalidArgument(f"unknown theorem {self.theorem!r}; choose from {THEOREMS}")
        if not self.degrees:
            raise InvalidArgument("degree list is empty")
        if any(b <= a for a, b in zip(self.degrees, self.degrees[1:])):
            raise InvalidArgument("degree list must be strictly ascending")
        if self.k < 1 or self.r < 0:
            raise InvalidArgument("need k >= 1 and r >= 0")
        if self.mode not in ("fast", "constructive"):
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        E = parse_domain(self.domain)
        parse_function(self.function, E)
        for c in self.compacts:
            K = Compact.parse(c)
            if np.any(E.classify_many(K.points(64)) != "interior"):
                raise InvalidArgument(f"compact {c!r} must lie inside E")
        _node_source(self.nodes)

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        out = {}
        for key, val in data.items():
            if isinstance(val, str):
                val = _parse_value(key, val)
            out[key] = val
        return cls(**out)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(path) as fh:
            parser.read_file(fh)
        if not parser.has_section("experiment"):
            raise InvalidArgument("config needs an [experiment] section")
        return cls.from_mapping(dict(parser["experiment"]))

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_mapping(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degrees"] = list(self.degrees)
        d["compacts"] = list(self.compacts)
        return d


def _parse_value(key: str, text: str):
    text = text.strip()
    if key == "degrees":
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    if key == "compacts":
        return tuple(x.strip() for x in text.split(";") if x.strip())
    if key == "plots":
        return text.lower() in ("1", "yes", "true", "on")
    if key in ("k", "r", "samples", "seed"):
        return int(text)
    if key == "eps":
        return float(text)
    return text


def _node_source(text: str) -> tuple[str, object]:
    kind, _, arg = text.partition(":")
    if kind in ("equispaced", "fekete", "boundary"):
        try:
            N = int(arg)
        except ValueError:
            raise InvalidArgument(f"node source {text!r} needs an integer count") from None
        if N < 1:
            raise InvalidArgument("node count must be positive")
        return kind, N
    if kind == "list":
        try:
            return kind, [complex(x.replace(" ", "")) for x in arg.split(";") if x.strip()]
        except ValueError:
            raise InvalidArgument(f"cannot parse node list {arg!r}") from None
    raise InvalidArgument(f"unknown node source {text!r}")


def resolve_nodes(text: str, E, emap, seed: int = 0) -> np.ndarray:
    """Node array for a node-source string."""
    kind, arg = _node_source(text)
    if kind == "list":
        return np.asarray(arg, dtype=complex)
    N = arg
    if kind == "equispaced":
        if E.kind == "segment":
            # Chebyshev extreme points: images of equispaced angles on the upper circle
            w = np.exp(1j * np.pi * np.arange(N) / max(N - 1, 1))
        else:
            w = np.exp(2j * np.pi * np.arange(N) / N)
        return np.asarray(emap.psi(w), dtype=complex)
    if kind == "boundary":
        z, _, _ = E.sample_boundary(4 * N)
        z = np.unique(np.round(z, 14))
        return z[np.linspace(0, len(z) - 1, N).round().astype(int)]
    return fekete_points(E, N, seed=seed).points


# -- report ---------------------------------------------------------------------

def _finite(obj):
    """Replace non-finite floats by ``None`` so the JSON stays standard."""
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ApproxReport:
    """Serializable outcome of a run.

    ``data`` holds the JSON document; ``sweep`` keeps the in-memory
    results (not serialized) for CSV and plot generation.
    """

    data: dict
    sweep: Sweep | None = field(default=None, repr=False)

    @property
    def status(self) -> str:
        return self.data["status"]

    @property
    def exit_code(self) -> int:
        """0 when every asserted rule passes, 2 on a numerical failure, 1 on an error."""
        if self.status == "failed":
            return 1
        return 0 if all(c["passed"] for c in self.data.get("criteria", [])) else 2

    def to_json(self, include_timestamp: bool = True) -> str:
        data = dict(self.data)
        if not include_timestamp:
            data.pop("timestamp", None)
        return json.dumps(_finite(data), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ApproxReport":
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise InvalidArgument(f"unsupported report schema {data.get('schema')!r}")
        return cls(data)

    def ratio_rows(self) -> list[dict]:
        return self.data.get("ratio_rows", [])

    def write(self, outdir=None) -> dict:
        """Write ``report.json``, ``ratios.csv`` and plots; returns the paths."""
        out = Path(outdir or self.data["config"]["output"])
        out.mkdir(parents=True, exist_ok=True)
        paths = {"json": out / "report.json"}
        paths["json"].write_text(self.to_json(), newline="\n")
        if self.status == "ok":
            paths["csv"] = out / "ratios.csv"
            paths["csv"].write_text(ratio_csv(self.ratio_rows()), newline="\n")
            if self.data["config"].get("plots", True):
                for name, svg in report_plots(self.data).items():
                    paths[name] = out / f"{name}.svg"
                    paths[name].write_text(svg, newline="\n")
        return {k: str(v) for k, v in paths.items()}


RATIO_COLUMNS = ("n", "order", "re", "im", "rho", "error", "omega", "ratio")


def ratio_csv(rows) -> str:
    """Comma-separated table with 17 significant digits and LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATIO_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in RATIO_COLUMNS])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if v is None:
        return "nan"
    return f"{float(v):.17g}"


def _ratio_rows(sweep: Sweep) -> list[dict]:
    rows = []
    for res in sweep.results:
        for order, table in sorted(res.boundary.items()):
            for z, e, om, rho, ratio in zip(table.z, table.error, table.omega, table.rho, table.ratio):
                rows.append({"n": res.n, "order": int(order), "re": float(z.real), "im": float(z.imag),
                             "rho": float(rho), "error": float(e), "omega": float(om),
                             "ratio": float(ratio)})
    return rows


def _criteria(cfg: ExperimentConfig, sweep: Sweep) -> list[dict]:
    runs = sweep.results
    res_ratio = max(r.residual_ratio for r in runs)
    crit = [{"name": "interpolation exactness", "passed": res_ratio <= RESIDUAL_TOL,
             "value": res_ratio, "threshold": RESIDUAL_TOL},
            {"name": "max-modulus sanity", "passed": all(r.max_modulus_ok for r in runs),
             "value": max((v - r.boundary_error for r in runs for v in r.interior.values()),
                          default=float("-inf")), "threshold": 1e-12}]
    if len(runs) > 1 and cfg.theorem in ("1", "2d"):
        drift = sweep.ratio_drift()
        crit.append({"name": "ratio drift", "passed": drift <= RATIO_DRIFT_MAX, "value": drift,
                     "threshold": RATIO_DRIFT_MAX})
    if cfg.theorem == "3":
        er = np.array(sweep.fits["error_ratios"])
        if len(er) > 1:
            drift = float(np.max(np.maximum(er[1:] / er[:-1], er[:-1] / er[1:])))
            crit.append({"name": "error ratio drift", "passed": drift <= ERROR_RATIO_DRIFT_MAX,
                         "value": drift, "threshold": ERROR_RATIO_DRIFT_MAX})
        bound = max(r.degree - ((1 + cfg.eps) * N + 1) for r, N in zip(runs, cfg.degrees))
        crit.append({"name": "degree bound", "passed": bound <= 0, "value": bound, "threshold": 0})
    return crit


def _per_degree(sweep: Sweep) -> list[dict]:
    out = []
    for r in sweep.results:
        d = r.to_dict()
        d["node_residuals"] = r.node_residuals.tolist()
        out.append(d)
    return out


def _execute(cfg: ExperimentConfig) -> Sweep:
    E = parse_domain(cfg.domain)
    emap = build_map(E)
    f = parse_function(cfg.function, E)
    compacts = [Compact.parse(c) for c in cfg.compacts]
    if cfg.theorem == "3":
        node_sets = None
        if not cfg.nodes.startswith("fekete"):
            node_sets = {N: resolve_nodes(f"{cfg.nodes.split(':')[0]}:{N}", E, emap, cfg.seed)
                         for N in cfg.degrees}
        return sweep_theorem3(f, E, cfg.k, cfg.degrees, cfg.eps, compacts, emap, node_sets)
    nodes = resolve_nodes(cfg.nodes, E, emap, cfg.seed)
    if cfg.theorem == "2d":
        return sweep_theorem2d(f, E, cfg.k, cfg.r, nodes, cfg.degrees, compacts, emap)
    return sweep_theorem1(f, E, cfg.k, nodes, cfg.degrees, cfg.mode, compacts, emap,
                          M=cfg.samples or None)


def _error_chain(exc: BaseException) -> list[dict]:
    chain = []
    while exc is not None:
        chain.append({"type": type(exc).__name__, "message": str(exc)})
        exc = exc.__cause__ or (None if exc.__suppress_context__ else exc.__context__)
    return chain


def run(config: ExperimentConfig) -> ApproxReport:
    """Execute a config; any error yields a report with ``status = "failed"``."""
    data = {"schema": SCHEMA, "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "config": config.to_dict()}
    try:
        config.validate()
        sweep = _execute(config)
    except Exception as exc:  # report every failure instead of crashing the CLI
        data.update(status="failed", errors=_error_chain(exc),
                    traceback=traceback.format_exception_only(type(exc), exc)[-1].strip())
        return ApproxReport(data)
    fits = dict(sweep.fits)
    if sweep.profile is not None:
        fits["dini_c2"] = sweep.profile.dini_constant
        fits["profile"] = sweep.profile.to_dict()
    data.update(status="ok", degrees=list(config.degrees), runs=_per_degree(sweep), fits=fits,
                criteria=_criteria(config, sweep), ratio_rows=_ratio_rows(sweep))
    return ApproxReport(_finite(data), sweep)


# -- SVG ------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def loglog_svg(series: dict, title: str, xlabel: str, ylabel: str, logx: bool = True,
               width: int = 480, height: int = 360) -> str:
    """Text SVG of one or more ``(x, y)`` polylines on log axes."""
    pts = {k: (np.asarray(x, float), np.asarray(y, float)) for k, (x, y) in series.items()}
    pts = {k: (x[(y > 0) & (x > 0)], y[(y > 0) & (x > 0)]) for k, (x, y) in pts.items()}
    pts = {k: v for k, v in pts.items() if len(v[0])}
    left, right, top, bottom = 70, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>\n')
    if not pts:
        return head + "</svg>\n"
    fx = np.log10 if logx else (lambda v: np.asarray(v, float))
    xs = np.concatenate([fx(x) for x, _ in pts.values()])
    ys = np.concatenate([np.log10(y) for _, y in pts.values()])
    x0, x1 = xs.min(), xs.max()
    y0, y1 = math.floor(ys.min()), math.ceil(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y1 = y0 + 1

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (y1 - v) / (y1 - y0) * ph

    parts = [head, f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>\n']
    step = max(1, int(math.ceil((y1 - y0) / 8)))
    for e in range(int(y0), int(y1) + 1, step):
        y = sy(e)
        parts.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>\n')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>\n')
    xticks = sorted({float(v) for x, _ in pts.values() for v in x})
    for v in xticks:
        x = sx(fx(v))
        parts.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 4}" stroke="black"/>\n')
        parts.append(f'<text x="{x:.2f}" y="{top + ph + 16}" text-anchor="middle">{v:g}</text>\n')
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>\n')
    parts.append(f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {top + ph / 2:.1f})">{escape(ylabel)}</text>\n')
    for i, (name, (x, y)) in enumerate(pts.items()):
        color = PALETTE[i % len(PALETTE)]
        path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(fx(x), np.log10(y)))
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>\n')
        for a, b in zip(fx(x), np.log10(y)):
            parts.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2.5" fill="{color}"/>\n')
        ly = top + 14 + 14 * i
        parts.append(f'<text x="{left + pw - 6}" y="{ly}" text-anchor="end" fill="{color}">{escape(str(name))}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def report_plots(data: dict) -> dict:
    """SVG documents for the error and ratio plots of a successful report."""
    runs = data.get("runs", [])
    if not runs:
        return {}
    ns = [r["n"] for r in runs]
    errors = {"boundary": (ns, [r["boundary_error"] or 0 for r in runs])}
    for label in runs[0]["interior"]:
        errors[label] = (ns, [r["interior"][label] or 0 for r in runs])
    ratios = {f"order {o}": (ns, [r["boundary"][o]["max_ratio"] or 0 for r in runs])
              for o in runs[0]["boundary"]}
    return {"errors": loglog_svg(errors, "sup errors", "degree n", "error"),
            "ratios": loglog_svg(ratios, "max boundary ratio", "degree n", "ratio")}
