"""Sampled curves, affine maps and curve-level transformations."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import CurveInputError, DegenerateGeometryError, ParseError

GROUP_KINDS = ("special", "full", "special_euclidean")
CLOSED_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Curve:
    """An ordered sample of a planar (dim 2) or spatial (dim 3) curve.

    ``params`` defaults to a uniform grid on [0, 1].
    """

    points: np.ndarray
    params: np.ndarray | None = None
    label: str | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise CurveInputError(f"points must have shape (N, 2) or (N, 3), got {pts.shape}")
        if pts.shape[0] < 2:
            raise CurveInputError("a curve needs at least 2 samples")
        if not np.all(np.isfinite(pts)):
            raise CurveInputError("curve samples must be finite")
        if self.params is None:
            params = np.linspace(0.0, 1.0, pts.shape[0])
        else:
            params = np.asarray(self.params, dtype=float).ravel()
            if params.shape[0] != pts.shape[0]:
                raise CurveInputError("params length does not match the number of samples")
            if not np.all(np.isfinite(params)) or np.any(np.diff(params) <= 0):
                raise CurveInputError("params must be finite and strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "params", _frozen(params))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def scale(self) -> float:
        """Bounding-box diagonal."""
        return float(np.linalg.norm(np.ptp(self.points, axis=0)))

    @property
    def is_closed(self) -> bool:
        s = self.scale
        gap = np.linalg.norm(self.points[0] - self.points[-1])
        return bool(s > 0 and gap <= CLOSED_TOL * s)

    def with_points(self, points: np.ndarray) -> "Curve":
        return Curve(points, self.params, self.label)


@dataclass(frozen=True)
class AffineMap:
    """x -> linear @ x + translation, tagged with the group it belongs to."""

    linear: np.ndarray
    translation: np.ndarray = None
    kind: str = "full"

    def __post_init__(self):
        A = np.asarray(self.linear, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (2, 3):
            raise CurveInputError(f"linear part must be 2x2 or 3x3, got {A.shape}")
        b = np.zeros(A.shape[0]) if self.translation is None else np.asarray(self.translation, float)
        if b.shape != (A.shape[0],):
            raise CurveInputError("translation length does not match the dimension")
        if self.kind not in GROUP_KINDS:
            raise CurveInputError(f"unknown group kind {self.kind!r}")
        det = np.linalg.det(A)
        if self.kind == "full" and abs(det) < 1e-12:
            raise CurveInputError("linear part is singular")
        if self.kind in ("special", "special_euclidean") and abs(det - 1.0) > 1e-5:
            raise CurveInputError(f"special map needs det = 1, got {det:.12g}")
        if self.kind == "special_euclidean" and not np.allclose(A @ A.T, np.eye(A.shape[0]), atol=1e-9):
            raise CurveInputError("special_euclidean map must be a rotation")
        object.__setattr__(self, "linear", _frozen(A))
        object.__setattr__(self, "translation", _frozen(b))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, float) @ self.linear.T + self.translation

    def compose(self, other: "AffineMap") -> "AffineMap":
        """Return self after other."""
        if other.dim != self.dim:
            raise CurveInputError("cannot compose maps of different dimension")
        kinds = {self.kind, other.kind}
        kind = "full" if "full" in kinds else ("special" if "special" in kinds else "special_euclidean")
        return AffineMap(self.linear @ other.linear, self.linear @ other.translation + self.translation, kind)

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.translation, self.kind)

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim), np.zeros(dim), "special_euclidean")


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise CurveInputError("sigma must be a finite non-negative number")


# ---------------------------------------------------------------- I/O


def _parse_float(text: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", row) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value: {text!r}", row)
    return value


def _load_csv(path: Path, param_column: bool | None) -> Curve:
    rows: list[tuple[int, list[str]]] = []
    header = None
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in raw]
            if not cells or all(c == "" for c in cells):
                continue
            if cells[0].startswith("#"):
                continue
            if header is None and not rows and not _looks_numeric(cells[0]):
                header = [c.lower() for c in cells]
                continue
            rows.append((lineno, cells))
    if not rows:
        raise ParseError("no data rows")
    if header is not None:
        coords = [h for h in header if h in ("x", "y", "z")]
        if coords not in (["x", "y"], ["x", "y", "z"]):
            raise ParseError(f"unrecognised header {header}", 1)
        has_param = len(header) == len(coords) + 1
        if param_column is not None and param_column != has_param:
            raise ParseError("header does not agree with param_column", 1)
    else:
        has_param = bool(param_column)
    width = len(rows[0][1])
    dim = width - 1 if has_param else width
    if dim not in (2, 3):
        raise ParseError(f"expected 2 or 3 coordinates, found {dim}", rows[0][0])
    data = np.empty((len(rows), width))
    for k, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(f"expected {width} columns, found {len(cells)}", lineno)
        data[k] = [_parse_float(c, lineno) for c in cells]
    params = data[:, 0] if has_param else None
    points = data[:, 1:] if has_param else data
    if len(points) < 2:
        raise ParseError("a curve needs at least 2 samples")
    return Curve(points, params, label=path.stem)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _load_json(path: Path) -> Curve:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict) or "points" not in doc:
        raise ParseError("JSON curve needs a 'points' field")
    try:
        points = np.asarray(doc["points"], dtype=float)
    except (TypeError, ValueError):
        raise ParseError("'points' must be a list of numeric rows") from None
    if points.ndim != 2:
        raise ParseError("'points' must be a list of equal-length rows")
    if "dim" in doc and doc["dim"] != points.shape[1]:
        raise ParseError(f"declared dim {doc['dim']} but rows have {points.shape[1]} coordinates")
    bad = np.flatnonzero(~np.all(np.isfinite(points), axis=1))
    if bad.size:
        raise ParseError("non-finite coordinate", int(bad[0]) + 1)
    return Curve(points, doc.get("params"), doc.get("label", path.stem))


def load_curve(path: str | Path, format: str | None = None, param_column: bool | None = None) -> Curve:
    """Read a curve from CSV (``x,y[,z]`` with optional header/param column) or JSON."""
    path = Path(path)
    if not path.exists():
        raise CurveInputError(f"no such file: {path}")
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt == "json":
        return _load_json(path)
    if fmt in ("csv", "txt"):
        return _load_csv(path, param_column)
    raise CurveInputError(f"unsupported curve format {fmt!r}")


def save_curve(curve: Curve, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        doc = {"dim": curve.dim, "points": curve.points.tolist(), "params": curve.params.tolist()}
        if curve.label is not None:
            doc["label"] = curve.label
        path.write_text(json.dumps(doc))
        return
    names = ["t", "x", "y", "z"][: curve.dim + 1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for t, p in zip(curve.params, curve.points):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in p])


# ---------------------------------------------------------------- generators


def _gamma2d(t):
    return np.column_stack([0.5 * np.sin(t) - np.cos(t) + 1, np.sin(t) ** 2 + np.cos(t) - 1])


def _beta3d(t):
    return np.column_stack(
        [np.sin(t) - 0.2 * np.cos(t) ** 2 + 0.2, 0.5 * np.sin(t) - np.cos(t) + 1, np.sin(t) ** 2 + np.cos(t) - 1]
    )


EXAMPLES: dict[str, Callable[[np.ndarray], np.ndarray]] = {"gamma2d": _gamma2d, "beta3d": _beta3d}


def generate_example(name: str, n_samples: int) -> Curve:
    """Closed example curves on t in [0, 2 pi]; params are rescaled to [0, 1]."""
    if name not in EXAMPLES:
        raise CurveInputError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    if n_samples < 2:
        raise CurveInputError("n_samples must be >= 2")
    t = np.linspace(0.0, 2 * np.pi, n_samples)
    pts = EXAMPLES[name](t)
    pts[-1] = pts[0]
    return Curve(pts, t / (2 * np.pi), name)


# ---------------------------------------------------------------- transformations


def apply_affine(curve: Curve, g: AffineMap) -> Curve:
    if g.dim != curve.dim:
        raise CurveInputError(f"map dimension {g.dim} does not match curve dimension {curve.dim}")
    return curve.with_points(g.apply(curve.points))


def random_affine(dim: int, kind: str = "special", seed: int | np.random.Generator | None = None) -> AffineMap:
    """Random map of the requested group.

    special/full: entries uniform on [-3, 3], redrawn while det is too close
    to zero (or negative, for special), then special maps are scaled to det 1.
    special_euclidean: a random rotation. Translations are uniform on [-3, 3].
    """
    if dim not in (2, 3):
        raise CurveInputError("dim must be 2 or 3")
    if kind not in GROUP_KINDS:
        raise CurveInputError(f"unknown group kind {kind!r}")
    rng = np.random.default_rng(seed)
    if kind == "special_euclidean":
        q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        A = q
    else:
        while True:
            A = rng.uniform(-3.0, 3.0, (dim, dim))
            det = np.linalg.det(A)
            if kind == "special" and det > 0.1:
                A = A / det ** (1.0 / dim)
                break
            if kind == "full" and abs(det) > 0.1:
                break
    return AffineMap(A, rng.uniform(-3.0, 3.0, dim), kind)


def add_noise(curve: Curve, spec: NoiseSpec) -> Curve:
    """i.i.d. Gaussian noise on every coordinate; a closed curve stays closed."""
    rng = np.random.default_rng(spec.seed)
    noisy = curve.points + spec.sigma * rng.standard_normal(curve.points.shape)
    if curve.is_closed:
        noisy[-1] = noisy[0]
    return curve.with_points(noisy)


class _Polyline:
    """Arc-length bookkeeping for walking along a polyline."""

    def __init__(self, points: np.ndarray):
        self.p = points
        self.seg = np.diff(points, axis=0)
        self.seglen = np.linalg.norm(self.seg, axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(self.seglen)])
        self.length = self.cum[-1]

    def walk(self, chord: float, steps: int) -> tuple[float, list[tuple[int, float]]]:
        """Take ``steps`` equal-chord steps from the start.

        Returns the arc position reached (length + remaining chord if the walk
        ran off the end) and the visited (segment, fraction) locations.
        """
        p, seg, n = self.p, self.seg, len(self.seglen)
        i, u = 0, 0.0
        cur = p[0]
        visited = []
        c2 = chord * chord
        for k in range(steps):
            found = False
            while i < n:
                a, d = p[i], seg[i]
                dd = d @ d
                if dd == 0.0:
                    i, u = i + 1, 0.0
                    continue
                w = a - cur
                # |w + s d|^2 = c^2 for s in [u, 1]
                b = w @ d
                cc = w @ w - c2
                disc = b * b - dd * cc
                if disc >= 0.0:
                    s = (-b + math.sqrt(disc)) / dd
                    if u <= s <= 1.0:
                        u, found = s, True
                        break
                i, u = i + 1, 0.0
            if not found:
                return self.length + (steps - k) * chord, visited
            cur = p[i] + u * seg[i]
            visited.append((i, u))
        i, u = visited[-1] if visited else (0, 0.0)
        return self.cum[i] + u * self.seglen[i] if i < n else self.length, visited


def resample_arclength(curve: Curve, m: int) -> Curve:
    """Resample to ``m`` points with equal Euclidean chords along the polyline.

    Endpoints are preserved. The common chord is found by a 1-D root search so
    that the last step lands exactly on the final sample.
    """
    if m < 2:
        raise CurveInputError("m must be >= 2")
    poly = _Polyline(curve.points)
    if poly.length <= 0:
        raise DegenerateGeometryError("curve has zero length")
    if m == 2:
        return Curve(curve.points[[0, -1]], None, curve.label)

    def residual(c):
        reached, _ = poly.walk(c, m - 1)
        return reached - poly.length

    hi = poly.length / (m - 1)
    lo = hi * 1e-3
    while residual(lo) >= 0:
        lo *= 0.1
    if residual(hi) < 0:
        # chords never exceed arcs, so hi overshoots unless rounding interferes
        hi *= 1.0 + 1e-9
    chord = brentq(residual, lo, hi, xtol=1e-15 * poly.length, rtol=4 * np.finfo(float).eps, maxiter=200)
    _, visited = poly.walk(chord, m - 2)
    inner = [poly.p[i] + u * poly.seg[i] for i, u in visited]
    pts = np.vstack([curve.points[:1], np.array(inner).reshape(-1, curve.dim), curve.points[-1:]])
    return Curve(pts, None, curve.label)


def _normalised_warp(warp: Callable[[np.ndarray], np.ndarray]):
    w0, w1 = float(warp(np.array([0.0]))[0]), float(warp(np.array([1.0]))[0])
    if not (math.isfinite(w0) and math.isfinite(w1)) or w0 == w1:
        raise CurveInputError("warp must take distinct finite values at 0 and 1")
    return lambda s: (np.asarray(warp(s), float) - w0) / (w1 - w0)


WARPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda s: s,
    "sqrt": lambda s: np.sqrt(s + 1.0),
    "square": lambda s: s**2,
}


def reparameterize(curve: Curve, warp: str | Callable[[np.ndarray], np.ndarray]) -> Curve:
    """Resample the same geometric curve at warped parameter values.

    ``warp`` is a strictly monotone map of [0, 1] (a name from WARPS or a
    callable); it is affinely normalised to send 0 to 0 and 1 to 1. Sample
    k of the result is the interpolant at parameter w(s_k).
    """
    fn = WARPS.get(warp) if isinstance(warp, str) else warp
    if fn is None:
        raise CurveInputError(f"unknown warp {warp!r}")
    w = _normalised_warp(fn)
    t = curve.params
    s = (t - t[0]) / (t[-1] - t[0])
    probe = np.union1d(s, np.linspace(0.0, 1.0, 4097))
    wp = w(probe)
    if not np.all(np.isfinite(wp)) or np.any(np.diff(wp) <= 0):
        raise CurveInputError("warp is not strictly monotone on [0, 1]")
    target = t[0] + w(s) * (t[-1] - t[0])
    target[0], target[-1] = t[0], t[-1]
    pts = np.column_stack([np.interp(target, t, curve.points[:, j]) for j in range(curve.dim)])
    return Curve(pts, t, curve.label)


def shift_start(curve: Curve, k: int) -> Curve:
    """Start a closed curve at sample ``k``.

    A closed polyline repeats its first point at the end, so its period is
    N - 1 samples; the closure is re-imposed on the result.
    """
    if not curve.is_closed:
        raise CurveInputError("shift_start needs a closed curve (first sample equal to last)")
    n = len(curve)
    if not 0 <= k < n:
        raise CurveInputError(f"start index must satisfy 0 <= k < {n}")
    unique = curve.points[:-1]
    rolled = np.roll(unique, -(k % (n - 1)), axis=0)
    return Curve(np.vstack([rolled, rolled[:1]]), curve.params, curve.label)


def bbox_diagonal(points: np.ndarray) -> float:
    return float(np.linalg.norm(np.ptp(np.asarray(points), axis=0)))


__all__ = [
    "Curve",
    "AffineMap",
    "NoiseSpec",
    "load_curve",
    "save_curve",
    "generate_example",
    "apply_affine",
    "random_affine",
    "add_noise",
    "resample_arclength",
    "reparameterize",
    "shift_start",
    "bbox_diagonal",
    "EXAMPLES",
    "WARPS",
]
