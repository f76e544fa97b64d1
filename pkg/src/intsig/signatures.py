"""Global signature curves, the equi-affine partition and local signatures."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .curves import Curve, shift_start
from .errors import CurveInputError, DegenerateGeometryError, PartitionError
from .invariants2d import InvariantTrace, a2_invariants, check_nondegenerate, sa2_invariants
from .invariants3d import a3_invariants, sa3_invariants
from .potentials import potential_table, segment_tables

DEFAULT_M = {2: 1_000_000, 3: 10_000_000}
TIE = 1e-9  # relative gap below which two peak arcs count as equal


@dataclass(frozen=True)
class SignatureCurve:
    points: np.ndarray
    group: str
    source_dim: int
    kind: str = "global"

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> str:
        return json.dumps({"type": self.kind, "group": self.group, "points": self.points.tolist()})


@dataclass(frozen=True)
class Partition:
    """Breakpoints of an equi-affine partition.

    ``offsets`` are strictly increasing sample positions counted from
    ``anchor``. Open curves have anchor 0. Closed curves are cut starting at
    the anchor and wrap around, so ``breakpoints`` (indices into the input
    samples) are taken modulo the period.
    """

    offsets: np.ndarray
    delta: float
    M: int
    tol_part: float
    anchor: int = 0
    period: int | None = None

    @property
    def n_segments(self) -> int:
        return len(self.offsets) - 1

    @property
    def breakpoints(self) -> np.ndarray:
        if self.period is None:
            return self.offsets + self.anchor
        return (self.offsets + self.anchor) % self.period

    def aligned(self, curve: Curve) -> Curve:
        """The curve re-started at the anchor, which ``offsets`` index."""
        return shift_start(curve, self.anchor) if self.anchor else curve


@dataclass(frozen=True)
class LocalSignature(SignatureCurve):
    partition: Partition | None = None
    reduced: bool = False


def _check_group(group: str) -> None:
    if group not in ("special", "full"):
        raise CurveInputError(f"signatures exist for the special or full affine group, not {group!r}")


def _traces(curve: Curve) -> dict[str, InvariantTrace]:
    table = potential_table(curve)
    return sa2_invariants(table) if curve.dim == 2 else sa3_invariants(table)


def global_signature(curve: Curve, group: str = "special") -> SignatureCurve:
    """The planar curve traced by the first two invariants.

    special: (I1, I2) or (J1, J2). full: the curve-normalised pair
    (|I1|/max|I1|, |I2|/max I1^2) or (|J1|/max|J1|, J2/max J1^2).
    """
    _check_group(group)
    t = _traces(curve)
    if group == "special":
        a, b = (t["I1"], t["I2"]) if curve.dim == 2 else (t["J1"], t["J2"])
    elif curve.dim == 2:
        n = a2_invariants(t, curve.scale)
        a, b = n["I1_tilde"], n["I2_tilde"]
    else:
        n = a3_invariants(t, curve.scale)
        a, b = n["J1_tilde"], n["J2_tilde"]
    pts = np.column_stack([a.values, b.values])
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    return SignatureCurve(pts, group, curve.dim, "global")


def _first_invariant(window: np.ndarray) -> np.ndarray:
    """I1 (planar) or J1 (spatial) of a window re-centred at its first sample."""
    c = window - window[0]
    d = np.diff(c, axis=0)
    mid = (c[:-1] + c[1:]) / 2  # order-1 integrands are linear: the midpoint rule is exact

    def run(a, i):
        out = np.zeros(len(c))
        out[1:] = np.cumsum(mid[:, a] * d[:, i])
        return out

    if c.shape[1] == 2:
        X, Y = c.T
        return run(0, 1) - X * Y / 2
    X, Y, Z = c.T
    n1 = Y * Z / 2 - run(1, 2)
    n2 = X * Y / 2 - run(0, 1)
    n3 = X * Z / 2 - run(0, 2)
    return n1 * X + n2 * Z - n3 * Y


class _ArcValues:
    """First invariant of the arcs [s, s + j] for given starts s and offsets j.

    Prefix sums of the order-1 potentials of the whole sequence are built
    once, so each block of arcs costs one vectorised evaluation.
    """

    def __init__(self, points: np.ndarray):
        c = points - points.mean(axis=0)
        d = np.diff(c, axis=0)
        mid = (c[:-1] + c[1:]) / 2

        def prefix(a, i):
            out = np.zeros(len(c))
            out[1:] = np.cumsum(mid[:, a] * d[:, i])
            return out

        self.c = c
        pairs = [(0, 1)] if c.shape[1] == 2 else [(1, 2), (0, 1), (0, 2)]
        self.q = [prefix(a, i) for a, i in pairs]

    def __call__(self, starts: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        c = self.c
        idx = starts[:, None] + offsets[None, :]
        s = starts[:, None]
        dx = c[idx] - c[s]
        if c.shape[1] == 2:
            (q,) = self.q
            return q[idx] - q[s] - c[s, 0] * dx[..., 1] - dx[..., 0] * dx[..., 1] / 2
        X, Y, Z = dx[..., 0], dx[..., 1], dx[..., 2]
        q_yz, q_xy, q_xz = self.q
        n1 = Y * Z / 2 - (q_yz[idx] - q_yz[s] - c[s, 1] * Z)
        n2 = X * Y / 2 - (q_xy[idx] - q_xy[s] - c[s, 0] * Y)
        n3 = X * Z / 2 - (q_xz[idx] - q_xz[s] - c[s, 0] * Z)
        return n1 * X + n2 * Z - n3 * Y


def first_invariant_peak(curve: Curve) -> float:
    """The scale used for Delta.

    Open curves: max_t |I1(t)| (|J1| in 3-D) measured from the first sample.
    Closed curves: the largest |I1| over all arcs of the closed curve, which
    does not depend on where the samples start.
    """
    return peak_arc(curve)[0]


def peak_arc(curve: Curve) -> tuple[float, int]:
    """The peak of :func:`first_invariant_peak` and the sample where its arc starts.

    For closed curves a coarse scan over (start, length) pairs picks up to
    eight well-separated starting cells, each refined by a full-resolution
    climb. Arcs within TIE of the peak (symmetric curves have several) are
    resolved to the smallest start index. Open curves report start 0.
    """
    pts = curve.points
    if not curve.is_closed:
        return float(np.max(np.abs(_first_invariant(pts)))), 0
    period = len(pts) - 1
    ring = np.vstack([pts[:-1], pts[:-1], pts[:1]])
    s_step = max(1, period // 96)
    o_step = max(1, period // 384)
    starts = np.arange(0, period, s_step)
    offsets = np.arange(0, period + 1, o_step)
    arcs = _ArcValues(ring)
    vals = np.abs(arcs(starts, offsets))
    seeds: list[tuple[int, int]] = []
    for flat in np.argsort(vals, axis=None)[::-1]:
        i, j = np.unravel_index(flat, vals.shape)
        if all(min((i - k) % len(starts), (k - i) % len(starts)) > 2 for k, _ in seeds):
            seeds.append((int(i), int(j)))
            if len(seeds) == 8:
                break
    found = []
    for i, j in seeds:
        s0, o0, value = int(starts[i]), int(offsets[j]), -1.0
        # climb at full resolution until the window maximum stops moving
        while True:
            s = np.arange(s0 - s_step, s0 + s_step + 1) % period
            o = np.arange(max(0, o0 - o_step), min(period, o0 + o_step) + 1)
            window = np.abs(arcs(s, o))
            a, b = np.unravel_index(np.argmax(window), window.shape)
            if window[a, b] <= value:
                break
            s0, o0, value = int(s[a]), int(o[b]), float(window[a, b])
        found.append((value, s0))
    best = max(v for v, _ in found)
    return best, min(s for v, s in found if v >= best * (1 - TIE))


def equi_affine_partition(curve: Curve, M: int | None = None, delta: float | None = None) -> Partition:
    """Greedy split into arcs whose first invariant has magnitude Delta = peak / M.

    ``peak`` is :func:`first_invariant_peak` unless ``delta`` is given. From
    each breakpoint the scan advances to the first sample where the
    re-centred |I1| (|J1| in 3-D) reaches Delta; the incomplete tail is
    dropped. Open curves are cut from their first sample. Closed curves are
    cut from the start of the peak arc, so the partition does not depend on
    where the samples start. The arc invariants shrink like a high power of arc length
    (cube in the plane, sixth power in space), so the number of segments
    grows only like M^(1/3) or M^(1/6).
    """
    M = DEFAULT_M[curve.dim] if M is None else M
    if int(M) != M or M < 2:
        raise CurveInputError("M must be an integer >= 2")
    floor = 1e-10 * curve.scale ** (2 if curve.dim == 2 else 3)
    peak, anchor = peak_arc(curve)
    peak = check_nondegenerate(np.array([peak]), floor)
    delta = peak / M if delta is None else float(delta)
    period = len(curve) - 1 if curve.is_closed else None
    pts = shift_start(curve, anchor).points if anchor else curve.points
    n = len(pts)
    breaks = [0]
    overshoot = 0.0
    guess = max(4, 2 * n // M)
    p = 0
    while p < n - 1:
        width = guess
        while True:
            end = min(n, p + width + 1)
            vals = np.abs(_first_invariant(pts[p:end]))
            hit = np.flatnonzero(vals >= delta)
            if hit.size or end == n:
                break
            width *= 2
        if not hit.size:
            break
        k = int(hit[0])
        overshoot = max(overshoot, abs(vals[k] - vals[k - 1]) / delta)
        p += k
        breaks.append(p)
        guess = max(4, 2 * k)
    if len(breaks) < 3:
        raise PartitionError(
            f"partition produced {len(breaks) - 1} segment(s); need at least 2 (lower M or densify sampling)"
        )
    return Partition(np.array(breaks), float(delta), int(M), float(overshoot), anchor, period)


def local_signature(
    curve: Curve, M: int | None = None, group: str = "special", delta: float | None = None
) -> LocalSignature:
    """One point (I2, I3) or (J2, J3) per partition segment.

    full: the coordinates are divided by peak^2 and |peak|^3 (planar) or by
    peak^2 and peak^4 (spatial), with peak from :func:`first_invariant_peak`.
    """
    _check_group(group)
    part = equi_affine_partition(curve, M, delta)
    seg = segment_tables(part.aligned(curve), part.offsets)
    if curve.dim == 2:
        sa = sa2_invariants(seg)
        a, b = sa["I2"].values, sa["I3"].values
    else:
        sa = sa3_invariants(seg)
        a, b = sa["J2"].values, sa["J3"].values
    if group == "full":
        m = first_invariant_peak(curve)
        a = a / m**2
        b = b / (m**3 if curve.dim == 2 else m**4)
    pts = np.column_stack([a, b])
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if len(pts) == 0:
        raise DegenerateGeometryError("no segment has defined invariants")
    return LocalSignature(pts, group, curve.dim, "local", part, group == "full")
