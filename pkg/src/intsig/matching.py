"""Distances between traces and signatures, and nearest-neighbour classification."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .curves import bbox_diagonal
from .errors import CurveInputError, DegenerateGeometryError
from .invariants2d import InvariantTrace
from .signatures import SignatureCurve

DISTANCE_KINDS = ("trace_l2", "global_sig", "local_sig")
GLOBAL_SAMPLES = 200


def _values(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, InvariantTrace) else x, dtype=float)


def _resample_index(v: np.ndarray, n: int) -> np.ndarray:
    if len(v) == n:
        return v
    return np.interp(np.linspace(0, len(v) - 1, n), np.arange(len(v)), v)


def trace_distance(a: InvariantTrace | np.ndarray, b: InvariantTrace | np.ndarray) -> float:
    """RMS of the sample-wise difference over samples where both are defined.

    Traces of different length are linearly resampled in index to the longer
    length first.
    """
    u, v = _values(a), _values(b)
    if u.size == 0 or v.size == 0:
        raise CurveInputError("cannot compare empty traces")
    n = max(len(u), len(v))
    u, v = _resample_index(u, n), _resample_index(v, n)
    ok = np.isfinite(u) & np.isfinite(v)
    if not ok.any():
        raise CurveInputError("traces have no commonly defined samples")
    return float(np.sqrt(np.mean((u[ok] - v[ok]) ** 2)))


def chord_resample(points: np.ndarray, k: int = GLOBAL_SAMPLES) -> np.ndarray:
    """k points evenly spaced in cumulative chord length along a polyline."""
    pts = np.asarray(points, float)
    if len(pts) < 2:
        raise DegenerateGeometryError("a signature needs at least 2 points")
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    if s[-1] <= 0:
        raise DegenerateGeometryError("signature has zero length")
    keep = np.concatenate([[True], np.diff(s) > 0])
    s, pts = s[keep], pts[keep]
    u = np.linspace(0.0, s[-1], k)
    return np.column_stack([np.interp(u, s, pts[:, j]) for j in range(pts.shape[1])])


def _common_scale(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(bbox_diagonal(a), bbox_diagonal(b))
    if scale <= 0:
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    return scale if scale > 0 else 1.0


def resampled_rms(ra: np.ndarray, rb: np.ndarray) -> float:
    s = _common_scale(ra, rb)
    return float(np.sqrt(np.mean(np.sum((ra - rb) ** 2, axis=1))) / s)


def discrete_frechet(a: np.ndarray, b: np.ndarray) -> float:
    """Discrete Frechet distance between two polylines (O(len(a) len(b)))."""
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    prev = np.maximum.accumulate(d[0])
    for i in range(1, len(a)):
        reach = np.minimum(prev, np.concatenate([[np.inf], prev[:-1]]))
        row = np.empty(len(b))
        row[0] = max(d[i, 0], prev[0])
        for j in range(1, len(b)):
            row[j] = max(d[i, j], min(reach[j], row[j - 1]))
        prev = row
    return float(prev[-1])


def global_signature_distance(
    a: SignatureCurve, b: SignatureCurve, method: str = "rms", k: int = GLOBAL_SAMPLES
) -> float:
    """Distance between two global signature curves.

    Both are resampled to ``k`` points by cumulative chord length and divided
    by a common scale (the larger bounding-box diagonal). ``rms`` compares
    corresponding points; ``frechet`` uses the discrete Frechet distance.
    """
    ra, rb = chord_resample(a.points, k), chord_resample(b.points, k)
    if method == "rms":
        return resampled_rms(ra, rb)
    if method == "frechet":
        s = _common_scale(ra, rb)
        return discrete_frechet(ra / s, rb / s)
    raise CurveInputError(f"unknown method {method!r}")


def chamfer(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Chamfer distance (mean of both directed means), jointly normalised."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if len(a) == 0 or len(b) == 0:
        raise CurveInputError("cannot compare empty point sets")
    s = _common_scale(a, b)
    a, b = a / s, b / s
    return float(0.5 * (cKDTree(b).query(a)[0].mean() + cKDTree(a).query(b)[0].mean()))


def local_signature_distance(a: SignatureCurve, b: SignatureCurve) -> float:
    return chamfer(a.points, b.points)


DISTANCES: dict[str, Callable[[Any, Any], float]] = {
    "trace_l2": trace_distance,
    "global_sig": global_signature_distance,
    "local_sig": local_signature_distance,
}


@dataclass
class ClassificationReport:
    predicted: list[Hashable]
    true: list[Hashable]
    confusion: dict[Hashable, dict[Hashable, int]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.predicted) != len(self.true):
            raise CurveInputError("predicted and true labels differ in length")
        if not self.confusion:
            counts = Counter(zip(self.true, self.predicted))
            for (t, p), n in sorted(counts.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
                self.confusion.setdefault(t, {})[p] = n

    @property
    def errors(self) -> int:
        return sum(p != t for p, t in zip(self.predicted, self.true))

    @property
    def error_rate(self) -> float:
        return self.errors / len(self.true) if self.true else 0.0

    def to_dict(self) -> dict:
        return {
            "error_rate": self.error_rate,
            "items": [{"true": t, "predicted": p} for t, p in zip(self.true, self.predicted)],
            "confusion": {str(t): {str(p): n for p, n in row.items()} for t, row in self.confusion.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def nearest_index(distances: np.ndarray) -> int:
    """Index of the smallest distance; ties go to the lowest index."""
    return int(np.argmin(distances))


def nn_classify(
    train: Sequence[tuple[Hashable, Any]],
    test: Sequence[tuple[Hashable, Any]],
    distance: str | Callable[[Any, Any], float] = "global_sig",
) -> ClassificationReport:
    """1-nearest-neighbour labels for ``test`` items against ``train`` items."""
    if not train:
        raise CurveInputError("training set is empty")
    fn = DISTANCES[distance] if isinstance(distance, str) else distance
    predicted, true = [], []
    for label, item in test:
        d = np.array([fn(item, ref) for _, ref in train])
        predicted.append(train[nearest_index(d)][0])
        true.append(label)
    return ClassificationReport(predicted, true)
