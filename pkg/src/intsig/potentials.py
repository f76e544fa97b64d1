"""Integral variables (potentials) of a centred sampled curve.

A potential is the running integral  P(t) = int_0^t C^alpha dC_i  of a
monomial of the centred curve C = x - x(0) against one coordinate
differential. On sampled data every potential is integrated exactly along
the piecewise-linear interpolant, so integration-by-parts relations and the
action of linear maps hold to rounding error.

Multi-index positions and targets are 0-based internally; the string form
uses the coordinate letter of the target, e.g. ``Y[1,0]`` is int X dY and
``Z[0,1,1]`` is int Y Z dZ.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .curves import Curve
from .errors import CurveInputError

LETTERS = "XYZ"
SUPPORTED_ORDERS = {2: 3, 3: 2}

Poly = dict  # exponent tuple -> coefficient


@dataclass(frozen=True, order=True)
class MultiIndex:
    alphas: tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))
        if any(a < 0 for a in self.alphas):
            raise CurveInputError("exponents must be non-negative")
        if not 0 <= self.target < len(self.alphas):
            raise CurveInputError("target coordinate out of range")

    @property
    def dim(self) -> int:
        return len(self.alphas)

    @property
    def order(self) -> int:
        return sum(self.alphas)

    @property
    def leading(self) -> int | None:
        """Position of the first non-zero exponent (None for the zero index)."""
        return next((j for j, a in enumerate(self.alphas) if a), None)

    @property
    def is_canonical(self) -> bool:
        j = self.leading
        return j is not None and self.target > j

    def __str__(self) -> str:
        return f"{LETTERS[self.target]}[{','.join(map(str, self.alphas))}]"

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        m = re.fullmatch(r"\s*([XYZ])\s*\[([\d,\s]+)\]\s*", text)
        if not m:
            raise CurveInputError(f"cannot parse multi-index {text!r}")
        alphas = tuple(int(a) for a in m.group(2).split(","))
        return cls(alphas, LETTERS.index(m.group(1)))


def _mi(key: "MultiIndex | str") -> MultiIndex:
    return MultiIndex.parse(key) if isinstance(key, str) else key


def exponents(dim: int, max_order: int, min_order: int = 0) -> list[tuple[int, ...]]:
    out = [a for a in itertools.product(range(max_order + 1), repeat=dim) if min_order <= sum(a) <= max_order]
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def canonical_indices(dim: int, order: int) -> list[MultiIndex]:
    """All canonical multi-indices with 1 <= |alpha| <= order."""
    out = []
    for a in exponents(dim, order, 1):
        mi0 = MultiIndex(a, 0)
        for i in range(mi0.leading + 1, dim):
            out.append(MultiIndex(a, i))
    return sorted(out, key=lambda m: (m.order, m.target, tuple(-x for x in m.alphas)))


def count_independent(n: int, order: int) -> int:
    """Number of algebraically independent potentials of order <= ``order`` in R^n."""
    if n < 1 or order < 0:
        raise CurveInputError("need n >= 1 and order >= 0")
    total = (n - 1) * math.comb(n + order, n)
    return total - sum(math.comb(n - m + order, n - m) for m in range(1, n))


# The 3-D variables used by the invariant formulas. Only Y[1,0,0], Z[1,0,0],
# Z[0,1,0] and the Z[...] of order 2 are canonical; the rest are tied to the
# canonical set by one integration by parts each.
BASIS_3D = tuple(
    MultiIndex.parse(s)
    for s in (
        "Y[1,0,0]", "Z[1,0,0]", "Z[0,1,0]",
        "X[1,1,0]", "X[1,0,1]", "X[0,2,0]", "Y[1,0,1]",
        "Z[0,1,1]", "Z[0,2,0]", "Z[1,0,1]", "Z[1,1,0]",
    )
)


def basis(dim: int, order: int) -> tuple[MultiIndex, ...]:
    if dim not in SUPPORTED_ORDERS:
        raise CurveInputError("dimension must be 2 or 3")
    if not 1 <= order <= SUPPORTED_ORDERS[dim]:
        raise CurveInputError(f"order must be between 1 and {SUPPORTED_ORDERS[dim]} in dimension {dim}")
    if dim == 3:
        return tuple(m for m in BASIS_3D if m.order <= order)
    return tuple(canonical_indices(dim, order))


# ---------------------------------------------------------------- quadrature


@lru_cache(maxsize=None)
def _nodes(degree: int) -> tuple[np.ndarray, np.ndarray]:
    k = max(1, math.ceil((degree + 1) / 2))
    x, w = np.polynomial.legendre.leggauss(k)
    return (x + 1) / 2, w / 2


def _monomial(values: np.ndarray, alphas: tuple[int, ...]) -> np.ndarray:
    out = np.ones(values.shape[:-1])
    for j, a in enumerate(alphas):
        if a:
            out = out * values[..., j] ** a
    return out


def step_integrals(start: np.ndarray, step: np.ndarray, mi: MultiIndex) -> np.ndarray:
    """Exact integral of C^alpha dC_i over each straight step.

    ``start`` holds the centred coordinates at the beginning of each step
    and ``step`` the increments, both of shape (K, dim).
    """
    s, w = _nodes(mi.order)
    pts = start[:, None, :] + s[None, :, None] * step[:, None, :]
    return (_monomial(pts, mi.alphas) @ w) * step[:, mi.target]


def _cumulative(steps: np.ndarray) -> np.ndarray:
    # kept in extended precision: invariants cancel large products of potentials
    out = np.zeros(steps.shape[0] + 1, dtype=np.longdouble)
    out[1:] = np.cumsum(steps.astype(np.longdouble))
    return out


# ---------------------------------------------------------------- curves and tables


@dataclass(frozen=True)
class CenteredCurve:
    """Curve translated so that its first sample is the origin."""

    points: np.ndarray
    params: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def center(curve: "Curve | CenteredCurve") -> CenteredCurve:
    if isinstance(curve, CenteredCurve):
        return curve
    pts = np.array(curve.points, dtype=float)
    pts = pts - pts[0]
    pts.setflags(write=False)
    return CenteredCurve(pts, curve.params)


def potential(cc: CenteredCurve, mi: "MultiIndex | str") -> np.ndarray:
    """The running potential P(t_k), k = 0..N-1, with P(t_0) = 0."""
    mi = _mi(mi)
    if mi.dim != cc.dim:
        raise CurveInputError(f"{mi} does not match curve dimension {cc.dim}")
    p = cc.points
    return _cumulative(step_integrals(p[:-1], np.diff(p, axis=0), mi))


def _poly_value(poly: Poly, coords: np.ndarray) -> np.ndarray:
    out = np.zeros(coords.shape[0])
    for e, c in poly.items():
        if c:
            out = out + c * _monomial(coords, e)
    return out


@dataclass(frozen=True)
class Reduction:
    """A linear combination of stored potentials plus a polynomial in C."""

    terms: Mapping[MultiIndex, float]
    poly: Mapping[tuple[int, ...], float]

    def evaluate(self, entries: Mapping[MultiIndex, np.ndarray], coords: np.ndarray) -> np.ndarray:
        out = _poly_value(dict(self.poly), coords)
        for mi, c in self.terms.items():
            if c:
                out = out + c * entries[mi]
        return out


def _add(dst: dict, src: Mapping, scale: float) -> None:
    for k, v in src.items():
        dst[k] = dst.get(k, 0.0) + scale * v


def reduce_to_canonical(mi: MultiIndex) -> Reduction:
    """Rewrite int C^beta dC_c through canonical potentials by one integration by parts."""
    if mi.is_canonical:
        return Reduction({mi: 1.0}, {})
    b, c = list(mi.alphas), mi.target
    bc = b[c]
    e = b.copy()
    e[c] += 1
    poly = {tuple(e): 1.0 / (bc + 1)}
    terms: dict[MultiIndex, float] = {}
    for j, bj in enumerate(b):
        if j == c or bj == 0:
            continue
        g = b.copy()
        g[c] += 1
        g[j] -= 1
        sub = MultiIndex(tuple(g), j)
        # every such term is canonical because c <= leading(beta)
        assert sub.is_canonical
        terms[sub] = terms.get(sub, 0.0) - bj / (bc + 1)
    return Reduction(terms, poly)


@lru_cache(maxsize=None)
def _basis_inverse(basis_: tuple[MultiIndex, ...]):
    dim = basis_[0].dim
    order = max(m.order for m in basis_)
    canon = canonical_indices(dim, order)
    if len(canon) != len(basis_):
        raise CurveInputError("basis size does not match the number of canonical potentials")
    pos = {m: k for k, m in enumerate(canon)}
    T = np.zeros((len(basis_), len(canon)))
    polys = []
    for r, b in enumerate(basis_):
        red = reduce_to_canonical(b)
        for m, c in red.terms.items():
            T[r, pos[m]] += c
        polys.append(dict(red.poly))
    Tinv = np.linalg.inv(T)
    # canon = Tinv @ (basis - poly_basis)
    Tinv[np.abs(Tinv) < 1e-14] = 0.0
    return canon, pos, Tinv, polys


@lru_cache(maxsize=None)
def express(mi: MultiIndex, basis_: tuple[MultiIndex, ...]) -> Reduction:
    """Express any potential through a basis of stored potentials."""
    if mi in basis_:
        return Reduction({mi: 1.0}, {})
    if all(a == 0 for j, a in enumerate(mi.alphas) if j != mi.target):
        return reduce_to_canonical(mi)
    canon, pos, Tinv, polys = _basis_inverse(basis_)
    red = reduce_to_canonical(mi)
    terms: dict[MultiIndex, float] = {}
    poly: dict = dict(red.poly)
    for m, c in red.terms.items():
        row = Tinv[pos[m]]
        for r, b in enumerate(basis_):
            if row[r]:
                terms[b] = terms.get(b, 0.0) + c * row[r]
                _add(poly, polys[r], -c * row[r])
    return Reduction(terms, poly)


@dataclass(frozen=True)
class PotentialTable:
    """Stored potentials of one curve (or of a family of segments).

    ``coords`` are the centred coordinates at each evaluation point; they are
    needed to derive non-stored potentials through by-parts relations.
    """

    dim: int
    order: int
    entries: Mapping[MultiIndex, np.ndarray]
    coords: np.ndarray

    @property
    def keys(self) -> tuple[MultiIndex, ...]:
        return tuple(self.entries)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def __contains__(self, key) -> bool:
        return _mi(key) in self.entries

    def __getitem__(self, key: "MultiIndex | str") -> np.ndarray:
        mi = _mi(key)
        if mi in self.entries:
            return self.entries[mi]
        if mi.dim != self.dim or mi.order > self.order:
            raise KeyError(str(mi))
        return express(mi, tuple(self.entries)).evaluate(self.entries, self.coords)

    def coord(self, j: int) -> np.ndarray:
        return self.coords[:, j]

    def to_json(self) -> str:
        doc = {
            "dim": self.dim,
            "order": self.order,
            "entries": {str(k): np.asarray(v, float).tolist() for k, v in self.entries.items()},
        }
        return json.dumps(doc)


def potential_table(cc: "CenteredCurve | Curve", order: int | None = None) -> PotentialTable:
    cc = center(cc)
    order = SUPPORTED_ORDERS.get(cc.dim) if order is None else order
    keys = basis(cc.dim, order)
    p = cc.points
    start, step = p[:-1], np.diff(p, axis=0)
    entries = {mi: _cumulative(step_integrals(start, step, mi)) for mi in keys}
    return PotentialTable(cc.dim, order, entries, np.asarray(p, dtype=np.longdouble))


def segment_potential(curve: "Curve | CenteredCurve", p: int, q: int, mi: "MultiIndex | str") -> float:
    """Potential of samples p..q, centred at sample p, evaluated at q."""
    pts = np.asarray(curve.points)
    if not 0 <= p <= q < len(pts):
        raise CurveInputError(f"need 0 <= p <= q < {len(pts)}")
    loc = pts[p : q + 1] - pts[p]
    if q == p:
        return 0.0
    return float(np.sum(step_integrals(loc[:-1], np.diff(loc, axis=0), _mi(mi)).astype(np.longdouble)))


def segment_tables(curve: "Curve | CenteredCurve", breakpoints: Iterable[int], order: int | None = None) -> PotentialTable:
    """End-point potentials of consecutive segments [b_k, b_{k+1}].

    Each segment is centred at its own first sample. The result is a table
    whose k-th row describes segment k, so every invariant formula can be
    evaluated on all segments at once.
    """
    pts = np.asarray(curve.points, float)
    b = np.asarray(list(breakpoints), dtype=int)
    if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0) or b[0] < 0 or b[-1] >= len(pts):
        raise CurveInputError("breakpoints must be strictly increasing sample indices")
    dim = pts.shape[1]
    order = SUPPORTED_ORDERS[dim] if order is None else order
    keys = basis(dim, order)
    lo, hi = b[0], b[-1]
    seg_of_step = np.repeat(np.arange(b.size - 1), np.diff(b))
    origin = pts[b[:-1]][seg_of_step]
    start = pts[lo:hi] - origin
    step = np.diff(pts[lo : hi + 1], axis=0)
    offsets = b[:-1] - lo
    entries = {
        mi: np.add.reduceat(step_integrals(start, step, mi).astype(np.longdouble), offsets) for mi in keys
    }
    coords = (pts[b[1:]] - pts[b[:-1]]).astype(np.longdouble)
    return PotentialTable(dim, order, entries, coords)


def by_parts_report(table: PotentialTable, cc: CenteredCurve) -> dict[str, float]:
    """Max |direct quadrature - by-parts value| for every derived potential."""
    out = {}
    for a in exponents(table.dim, table.order, 0):
        for i in range(table.dim):
            mi = MultiIndex(a, i)
            if mi in table.entries:
                continue
            out[str(mi)] = float(np.max(np.abs(potential(cc, mi) - table[mi])))
    return out


def by_parts_residuals(table: PotentialTable, cc: CenteredCurve) -> float:
    return max(by_parts_report(table, cc).values())


# ---------------------------------------------------------------- linear action


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return out


def _linear_power(A: np.ndarray, alphas: tuple[int, ...]) -> Poly:
    """Expand prod_j (A C)_j^alpha_j as a polynomial in C."""
    dim = len(alphas)
    unit = [tuple(int(k == j) for k in range(dim)) for j in range(dim)]
    out: Poly = {(0,) * dim: 1.0}
    for j, a in enumerate(alphas):
        row = {unit[k]: float(A[j, k]) for k in range(dim) if A[j, k] != 0}
        for _ in range(a):
            out = _poly_mul(out, row)
    return out


def prolonged_action(table: PotentialTable, A: np.ndarray) -> PotentialTable:
    """Potentials of the curve C -> A C, computed from the potentials of C alone."""
    A = np.asarray(A, float)
    if A.shape != (table.dim, table.dim):
        raise CurveInputError("matrix size does not match the table dimension")
    keys = table.keys
    entries = {}
    for mi in keys:
        total = np.zeros(len(table))
        for e, c in _linear_power(A, mi.alphas).items():
            for k in range(table.dim):
                coef = c * A[mi.target, k]
                if coef:
                    total = total + coef * table[MultiIndex(e, k)]
        entries[mi] = total
    return PotentialTable(table.dim, table.order, entries, table.coords @ A.T)


def prolonged_action_2d(table: PotentialTable, A: np.ndarray) -> dict[str, np.ndarray]:
    """Closed-form action of a 2x2 matrix on the six planar potentials.

    Hand-expanded counterpart of :func:`prolonged_action`, kept as an
    independent cross-check.
    """
    if table.dim != 2 or table.order < 3:
        raise CurveInputError("needs a planar table of order 3")
    (a11, a12), (a21, a22) = np.asarray(A, float)
    det = a11 * a22 - a12 * a21
    X, Y = table.coords[:, 0], table.coords[:, 1]
    y10, y11, y12 = table["Y[1,0]"], table["Y[1,1]"], table["Y[1,2]"]
    y20, y21, y30 = table["Y[2,0]"], table["Y[2,1]"], table["Y[3,0]"]
    return {
        "Y[1,0]": det * y10 + a11 * a21 * X**2 / 2 + a12 * a21 * X * Y + a12 * a22 * Y**2 / 2,
        "Y[1,1]": det * (a22 * y11 + a21 * y20 / 2)
        + a21**2 * a11 * X**3 / 3
        + a21 * (a11 * a22 + a12 * a21) * X**2 * Y / 2
        + a21 * a12 * a22 * X * Y**2
        + a22**2 * a12 * Y**3 / 3,
        "Y[2,0]": det * (a11 * y20 + 2 * a12 * y11)
        + a11**2 * a21 * X**3 / 3
        + a11 * a12 * a21 * X**2 * Y
        + a12**2 * a21 * X * Y**2
        + a12**2 * a22 * Y**3 / 3,
        "Y[1,2]": det * (a22**2 * y12 + a21**2 * y30 / 3 + a21 * a22 * y21)
        + a11 * a21**3 * X**4 / 4
        + a21**2 * (2 * a11 * a22 + a12 * a21) * X**3 * Y / 3
        + a21 * a22 * (2 * a12 * a21 + a11 * a22) * X**2 * Y**2 / 2
        + a12 * a21 * a22**2 * X * Y**3
        + a12 * a22**3 * Y**4 / 4,
        "Y[2,1]": det * ((a11 * a22 + a12 * a21) * y21 + 2 * a12 * a22 * y12 + 2 / 3 * a11 * a21 * y30)
        + a11**2 * a21**2 * X**4 / 4
        + a11 * a21 * (a11 * a22 + 2 * a12 * a21) * X**3 * Y / 3
        + a12 * a21 * (2 * a11 * a22 + a12 * a21) * X**2 * Y**2 / 2
        + a12**2 * a21 * a22 * X * Y**3
        + a12**2 * a22**2 * Y**4 / 4,
        "Y[3,0]": det * (a11**2 * y30 + 3 * a12**2 * y12 + 3 * a11 * a12 * y21)
        + a11**3 * a21 * X**4 / 4
        + a11**2 * a12 * a21 * X**3 * Y
        + 1.5 * a11 * a12**2 * a21 * X**2 * Y**2
        + a12**3 * a21 * X * Y**3
        + a12**3 * a22 * Y**4 / 4,
    }
