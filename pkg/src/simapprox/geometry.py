"""Planar continua: disk, ellipse, segment and polygon.

A :class:`Continuum` bundles the boundary parameterization, membership tests
and nearest-point queries that the rest of the package relies on. All
tolerances are relative to ``diameter`` so results do not depend on scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import shapely
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import InvalidArgument

KINDS = ("disk", "ellipse", "segment", "polygon")
BOUNDARY_RTOL = 1e-10


class BoundaryPoint(NamedTuple):
    location: complex
    parameter: float
    tangent: complex


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass(frozen=True, eq=False)
class Continuum:
    """Compact connected set E with connected complement.

    Use the ``disk``/``ellipse``/``segment``/``polygon`` constructors rather
    than instantiating directly.
    """

    kind: str
    params: dict = field(default_factory=dict)
    convex: bool = True

    # -- constructors -----------------------------------------------------
    @classmethod
    def disk(cls, center: complex = 0.0, radius: float = 1.0) -> "Continuum":
        if radius <= 0:
            raise InvalidArgument("disk radius must be positive")
        return cls("disk", {"center": complex(center), "radius": float(radius)}, True)

    @classmethod
    def ellipse(cls, center: complex = 0.0, a: float = 1.0, b: float = 0.5,
                angle: float = 0.0) -> "Continuum":
        """Ellipse with semi-axes ``a >= b > 0`` rotated by ``angle``."""
        if not (a >= b > 0):
            raise InvalidArgument("ellipse needs a >= b > 0")
        return cls("ellipse", {"center": complex(center), "a": float(a), "b": float(b),
                               "angle": float(angle)}, True)

    @classmethod
    def segment(cls, a: complex = -1.0, b: complex = 1.0) -> "Continuum":
        a, b = complex(a), complex(b)
        if a == b:
            raise InvalidArgument("segment endpoints coincide (diam E = 0)")
        return cls("segment", {"a": a, "b": b}, True)

    @classmethod
    def polygon(cls, vertices) -> "Continuum":
        v = np.asarray([_as_complex(x) for x in vertices], dtype=complex)
        if len(v) < 3:
            raise InvalidArgument("polygon needs at least 3 vertices")
        diam = np.max(np.abs(v[:, None] - v[None, :]))
        gaps = np.abs(v - np.roll(v, -1))
        if np.min(gaps) <= 1e-12 * diam:
            raise InvalidArgument("polygon has repeated vertices")
        poly = shapely.Polygon(np.c_[v.real, v.imag])
        if not poly.is_valid or poly.area <= 0:
            raise InvalidArgument("polygon vertex list is not a simple closed curve")
        # signed area fixes the orientation
        area2 = np.sum(v.real * np.roll(v.imag, -1) - np.roll(v.real, -1) * v.imag)
        if area2 < 0:
            v = v[::-1]
        turns = np.angle((np.roll(v, -1) - v) / (v - np.roll(v, 1)))
        if np.any(np.abs(turns) < 1e-12):
            raise InvalidArgument("polygon has collinear consecutive edges")
        convex = bool(np.all(turns > 0))
        return cls("polygon", {"vertices": v}, convex)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        p = {}
        for key, val in self.params.items():
            if key == "vertices":
                p[key] = [_pair(z) for z in val]
            elif isinstance(val, complex):
                p[key] = _pair(val)
            else:
                p[key] = val
        return {"kind": self.kind, "params": p, "convex": self.convex}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Continuum":
        kind = d.get("kind")
        p = dict(d.get("params", {}))
        if kind == "disk":
            return cls.disk(_as_complex(p.get("center", 0)), p.get("radius", 1.0))
        if kind == "ellipse":
            return cls.ellipse(_as_complex(p.get("center", 0)), p["a"], p["b"], p.get("angle", 0.0))
        if kind == "segment":
            return cls.segment(_as_complex(p["a"]), _as_complex(p["b"]))
        if kind == "polygon":
            return cls.polygon(p["vertices"])
        raise InvalidArgument(f"unknown domain kind {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "Continuum":
        return cls.from_dict(json.loads(text))

    # -- basic geometry ---------------------------------------------------
    @property
    def vertices(self) -> np.ndarray:
        return self.params["vertices"]

    @property
    def diameter(self) -> float:
        p = self.params
        if self.kind == "disk":
            return 2.0 * p["radius"]
        if self.kind == "ellipse":
            return 2.0 * p["a"]
        if self.kind == "segment":
            return abs(p["b"] - p["a"])
        v = p["vertices"]
        return float(np.max(np.abs(v[:, None] - v[None, :])))

    @property
    def centroid(self) -> complex:
        p = self.params
        if self.kind in ("disk", "ellipse"):
            return p["center"]
        if self.kind == "segment":
            return (p["a"] + p["b"]) / 2
        c = self._shape.centroid
        return complex(c.x, c.y)

    @property
    def has_interior(self) -> bool:
        return self.kind != "segment"

    @property
    def perimeter(self) -> float:
        p = self.params
        if self.kind == "disk":
            return 2 * np.pi * p["radius"]
        if self.kind == "segment":
            return 2 * abs(p["b"] - p["a"])  # both sides of the slit
        if self.kind == "ellipse":
            t = np.linspace(0, 2 * np.pi, 4097)
            z = self._ellipse_point(t)
            return float(np.sum(np.abs(np.diff(z))))
        return float(np.sum(np.abs(np.diff(np.r_[self.vertices, self.vertices[:1]]))))

    @property
    def tol(self) -> float:
        return BOUNDARY_RTOL * self.diameter

    @property
    def _shape(self):
        # shapely objects are cheap to rebuild but caching avoids repeated GEOS setup
        cache = self.__dict__.setdefault("_cache", {})
        if "shape" not in cache:
            v = self.vertices
            poly = shapely.Polygon(np.c_[v.real, v.imag])
            shapely.prepare(poly)
            ring = poly.exterior
            shapely.prepare(ring)
            cache["shape"] = poly
            cache["ring"] = ring
        return cache["shape"]

    @property
    def _ring(self):
        self._shape
        return self.__dict__["_cache"]["ring"]

    def _ellipse_point(self, t):
        p = self.params
        return p["center"] + np.exp(1j * p["angle"]) * (p["a"] * np.cos(t) + 1j * p["b"] * np.sin(t))

    # -- boundary parameterization -----------------------------------------
    def sample_boundary(self, M: int):
        """Return arrays ``(z, t, tangent)`` of ``M`` boundary samples."""
        if M < 4:
            raise InvalidArgument("need at least 4 boundary samples")
        p = self.params
        if self.kind == "disk":
            t = np.arange(M) / M
            z = p["center"] + p["radius"] * np.exp(2j * np.pi * t)
            tan = 1j * np.exp(2j * np.pi * t)
        elif self.kind == "ellipse":
            t = np.arange(M) / M
            z = self._ellipse_point(2 * np.pi * t)
            d = np.exp(1j * p["angle"]) * (-p["a"] * np.sin(2 * np.pi * t) + 1j * p["b"] * np.cos(2 * np.pi * t))
            tan = d / np.abs(d)
        elif self.kind == "segment":
            # one pass along the slit; parameter is that of the doubled (closed) traversal
            s = np.arange(M) / (M - 1)
            t = s / 2
            z = p["a"] + (p["b"] - p["a"]) * s
            tan = np.full(M, (p["b"] - p["a"]) / abs(p["b"] - p["a"]))
        else:
            z, t, tan = self._polygon_samples(M)
        return z, t, tan

    def _polygon_samples(self, M: int):
        v = self.vertices
        nv = len(v)
        if M < nv:
            raise InvalidArgument("polygon sampling needs at least one point per vertex")
        edges = np.roll(v, -1) - v
        lengths = np.abs(edges)
        total = lengths.sum()
        # largest-remainder allocation with at least one segment per edge
        ideal = M * lengths / total
        counts = np.maximum(1, np.floor(ideal).astype(int))
        while counts.sum() > M:
            i = np.argmax(np.where(counts > 1, counts - ideal, -np.inf))
            counts[i] -= 1
        while counts.sum() < M:
            i = np.argmax(ideal - counts)
            counts[i] += 1
        zs, ts, tans = [], [], []
        start = 0.0
        for k in range(nv):
            s = np.arange(counts[k]) / counts[k]
            zs.append(v[k] + edges[k] * s)
            ts.append((start + lengths[k] * s) / total)
            tans.append(np.full(counts[k], edges[k] / lengths[k]))
            start += lengths[k]
        return np.concatenate(zs), np.concatenate(ts), np.concatenate(tans)

    def boundary_point(self, t):
        """Boundary location at parameter ``t`` (taken modulo 1)."""
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        p = self.params
        if self.kind == "disk":
            return p["center"] + p["radius"] * np.exp(2j * np.pi * t)
        if self.kind == "ellipse":
            return self._ellipse_point(2 * np.pi * t)
        if self.kind == "segment":
            s = 1 - np.abs(1 - 2 * t)
            return p["a"] + (p["b"] - p["a"]) * s
        v = self.vertices
        edges = np.roll(v, -1) - v
        cum = np.r_[0.0, np.cumsum(np.abs(edges))]
        arc = t * cum[-1]
        k = np.clip(np.searchsorted(cum, arc, side="right") - 1, 0, len(v) - 1)
        return v[k] + edges[k] * (arc - cum[k]) / np.abs(edges[k])

    def boundary_samples(self, M: int) -> list[BoundaryPoint]:
        z, t, tan = self.sample_boundary(M)
        return [BoundaryPoint(complex(a), float(b), complex(c)) for a, b, c in zip(z, t, tan)]

    # -- distances and membership -----------------------------------------
    def _ellipse_local(self, z):
        p = self.params
        return np.exp(-1j * p["angle"]) * (np.asarray(z, dtype=complex) - p["center"])

    def _ellipse_nearest_param(self, w):
        """Parameter t of the boundary point nearest to local point(s) w."""
        a, b = self.params["a"], self.params["b"]
        w = np.atleast_1d(w)
        if w.size == 0:
            return np.zeros(0)
        grid = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        pts = a * np.cos(grid) + 1j * b * np.sin(grid)
        t = grid[np.argmin(np.abs(w[:, None] - pts[None, :]), axis=1)]
        x, y = w.real, w.imag
        for _ in range(30):
            c, s = np.cos(t), np.sin(t)
            g = (a * c - x) * (-a * s) + (b * s - y) * (b * c)
            dg = (a * s) ** 2 + (b * c) ** 2 + (a * c - x) * (-a * c) + (b * s - y) * (-b * s)
            step = np.where(dg > 0, g / np.where(dg > 0, dg, 1.0), 0.0)
            step = np.clip(step, -0.1, 0.1)
            t = t - step
            if np.max(np.abs(step)) < 1e-15:
                break
        return t

    def nearest_boundary_point(self, z):
        """Nearest point of L to each z (vectorized)."""
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        p = self.params
        if self.kind == "disk":
            d = flat - p["center"]
            ang = np.where(np.abs(d) > 0, np.angle(d), 0.0)
            out = p["center"] + p["radius"] * np.exp(1j * ang)
        elif self.kind == "ellipse":
            t = self._ellipse_nearest_param(self._ellipse_local(flat))
            out = self._ellipse_point(t)
        elif self.kind == "segment":
            a, b = p["a"], p["b"]
            s = np.clip(np.real((flat - a) * np.conj(b - a)) / abs(b - a) ** 2, 0, 1)
            out = a + (b - a) * s
        else:
            pts = shapely.points(flat.real, flat.imag)
            s = shapely.line_locate_point(self._ring, pts)
            q = shapely.line_interpolate_point(self._ring, s)
            out = shapely.get_x(q) + 1j * shapely.get_y(q)
        return out.reshape(z.shape)

    def boundary_distance(self, z):
        """dist(z, L), vectorized."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            p = self.params
            return np.abs(np.abs(z - p["center"]) - p["radius"])
        if self.kind == "polygon":
            flat = np.atleast_1d(z).ravel()
            d = shapely.distance(self._ring, shapely.points(flat.real, flat.imag))
            return np.asarray(d).reshape(z.shape)
        return np.abs(z - self.nearest_boundary_point(z))

    def _inside_open(self, z):
        """Strict interior test ignoring the boundary tolerance."""
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.kind == "disk":
            return np.abs(z - p["center"]) < p["radius"]
        if self.kind == "ellipse":
            w = self._ellipse_local(z)
            return (w.real / p["a"]) ** 2 + (w.imag / p["b"]) ** 2 < 1
        if self.kind == "segment":
            return np.zeros(z.shape, dtype=bool)
        flat = np.atleast_1d(z).ravel()
        return np.asarray(shapely.contains_xy(self._shape, flat.real, flat.imag)).reshape(z.shape)

    def classify(self, z) -> str:
        """Return ``'interior'``, ``'boundary'`` or ``'exterior'`` for a single point."""
        return str(self.classify_many(np.array([z]))[0])

    def classify_many(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        on_l = self.boundary_distance(z) <= self.tol
        inside = self._inside_open(z)
        out = np.where(on_l, "boundary", np.where(inside, "interior", "exterior"))
        return out

    def contains(self, z) -> np.ndarray:
        """Membership in E (boundary included, within tolerance)."""
        z = np.asarray(z, dtype=complex)
        return self._inside_open(z) | (self.boundary_distance(z) <= self.tol)

    def distance(self, z):
        """d(z, E): zero on E."""
        z = np.asarray(z, dtype=complex)
        return np.where(self._inside_open(z), 0.0, self.boundary_distance(z))

    def nearest_point(self, z):
        """A closest point z* of E (z itself when z is in E)."""
        z = np.asarray(z, dtype=complex)
        return np.where(self._inside_open(z), z, self.nearest_boundary_point(z))

    def outward_normal(self, zeta: complex) -> complex:
        """Unit outward normal at a boundary point; vertex normals bisect the edge normals."""
        p = self.params
        zeta = complex(zeta)
        if self.kind == "disk":
            d = zeta - p["center"]
            return d / abs(d)
        if self.kind == "ellipse":
            t = float(self._ellipse_nearest_param(self._ellipse_local(zeta))[0])
            n = np.exp(1j * p["angle"]) * (p["b"] * np.cos(t) + 1j * p["a"] * np.sin(t))
            return complex(n / abs(n))
        if self.kind == "segment":
            tdir = (p["b"] - p["a"]) / abs(p["b"] - p["a"])
            if abs(zeta - p["b"]) <= self.tol:
                return tdir
            if abs(zeta - p["a"]) <= self.tol:
                return -tdir
            return -1j * tdir
        v = self.vertices
        edges = np.roll(v, -1) - v
        normals = -1j * edges / np.abs(edges)  # CCW polygon: outward is -i * tangent
        vd = np.abs(v - zeta)
        k = int(np.argmin(vd))
        if vd[k] <= self.tol:
            n = normals[k] + normals[k - 1]
            return complex(n / abs(n))
        pts = shapely.points([zeta.real], [zeta.imag])
        dists = [shapely.distance(shapely.LineString([(v[i].real, v[i].imag),
                                                      (v[(i + 1) % len(v)].real, v[(i + 1) % len(v)].imag)]),
                                  pts)[0] for i in range(len(v))]
        return complex(normals[int(np.argmin(dists))])

    def curvature_radius(self, zeta: complex) -> float:
        """Radius of curvature of L at zeta (inf on straight pieces, 0 at corners)."""
        p = self.params
        if self.kind == "disk":
            return p["radius"]
        if self.kind == "ellipse":
            a, b = p["a"], p["b"]
            t = float(self._ellipse_nearest_param(self._ellipse_local(zeta))[0])
            return float(((a * np.sin(t)) ** 2 + (b * np.cos(t)) ** 2) ** 1.5 / (a * b))
        if self.kind == "segment":
            return 0.0 if min(abs(zeta - p["a"]), abs(zeta - p["b"])) <= self.tol else np.inf
        if np.min(np.abs(self.vertices - zeta)) <= self.tol:
            return 0.0
        return np.inf

    def interior_grid(self, n: int) -> np.ndarray:
        """Points of an n x n bounding-box grid lying strictly inside E."""
        if not self.has_interior:
            return np.zeros(0, dtype=complex)
        z, _, _ = self.sample_boundary(max(64, 4 * n))
        x = np.linspace(z.real.min(), z.real.max(), n + 2)[1:-1]
        y = np.linspace(z.imag.min(), z.imag.max(), n + 2)[1:-1]
        g = (x[None, :] + 1j * y[:, None]).ravel()
        keep = self._inside_open(g) & (self.boundary_distance(g) > self.tol)
        return g[keep]


# -- arc-joining constant -----------------------------------------------------

def _visible_matrix(E: Continuum, pts: np.ndarray) -> np.ndarray:
    n = len(pts)
    vis = np.zeros((n, n), dtype=bool)
    buffered = E._shape.buffer(1e-9 * E.diameter)
    shapely.prepare(buffered)
    for i in range(n):
        j = np.arange(i + 1, n)
        if len(j) == 0:
            continue
        lines = shapely.linestrings(
            np.stack([np.c_[np.full(len(j), pts[i].real), np.full(len(j), pts[i].imag)],
                      np.c_[pts[j].real, pts[j].imag]], axis=1))
        ok = shapely.covers(buffered, lines)
        vis[i, j] = ok
        vis[j, i] = ok
    return vis


def h_constant(E: Continuum, M: int = 64, grid: int = 0) -> float:
    """Upper estimate of the arc-joining constant c(E).

    For convex E straight chords lie in E and the constant is 1. Otherwise
    geodesic lengths come from a visibility graph over boundary samples and
    polygon vertices (plus ``grid``-per-diameter interior points if given);
    the value is the maximum of geodesic/|z - zeta| over all sampled pairs.
    """
    if M < 16:
        raise InvalidArgument("h_constant needs M >= 16")
    if E.convex:
        return 1.0
    z, _, _ = E.sample_boundary(M)
    pts = np.r_[E.vertices, z]
    if grid:
        pts = np.r_[pts, E.interior_grid(grid)]
    # drop duplicates (vertices are also samples)
    _, idx = np.unique(np.round(pts / E.tol).astype(np.complex128), return_index=True)
    pts = pts[np.sort(idx)]
    vis = _visible_matrix(E, pts)
    w = np.where(vis, np.abs(pts[:, None] - pts[None, :]), 0.0)
    geo = shortest_path(csr_matrix(w), method="D", directed=False)
    chord = np.abs(pts[:, None] - pts[None, :])
    mask = chord > E.tol
    return float(max(1.0, np.max(geo[mask] / chord[mask])))


# -- built-in catalogue -------------------------------------------------------

L_SHAPE = [0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j]


def builtin_domain(name: str) -> Continuum:
    """Named domains used by the CLI and the acceptance suite."""
    table = {
        "disk": lambda: Continuum.disk(0, 1),
        "ellipse": lambda: Continuum.ellipse(0, 1.0, 0.6),
        "segment": lambda: Continuum.segment(-1, 1),
        "square": lambda: Continuum.polygon([0.5 + 0.5j, -0.5 + 0.5j, -0.5 - 0.5j, 0.5 - 0.5j]),
        "lshape": lambda: Continuum.polygon(L_SHAPE),
    }
    try:
        return table[name]()
    except KeyError:
        raise InvalidArgument(f"unknown domain {name!r}; choose from {sorted(table)}") from None


def parse_domain(spec: str) -> Continuum:
    """Parse ``name``, ``disk:cx,cy,r`` or a JSON descriptor."""
    spec = spec.strip()
    if spec.startswith("{"):
        return Continuum.from_json(spec)
    if ":" in spec:
        kind, args = spec.split(":", 1)
        vals = [float(x) for x in args.split(",")]
        if kind == "disk" and len(vals) == 3:
            return Continuum.disk(complex(vals[0], vals[1]), vals[2])
        if kind == "segment" and len(vals) == 4:
            return Continuum.segment(complex(vals[0], vals[1]), complex(vals[2], vals[3]))
        if kind == "ellipse" and len(vals) in (4, 5):
            return Continuum.ellipse(complex(vals[0], vals[1]), *vals[2:])
        if kind == "polygon" and len(vals) >= 6 and len(vals) % 2 == 0:
            return Continuum.polygon([complex(x, y) for x, y in zip(vals[::2], vals[1::2])])
        raise InvalidArgument(f"cannot parse domain {spec!r}")
    return builtin_domain(spec)
