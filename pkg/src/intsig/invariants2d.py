"""Rigid-motion, special-affine and full-affine invariants of planar curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve, bbox_diagonal
from .errors import CurveInputError, DegenerateGeometryError
from .potentials import CenteredCurve, PotentialTable, center, potential_table, segment_potential
from .transcriptions import FORMULAS, FormulaSet

# samples where a denominator falls below this fraction of its maximum are
# treated as undefined
REL_UNDEFINED = 1e-8


@dataclass(frozen=True)
class InvariantTrace:
    """Invariant values along a curve; NaN marks samples where it is undefined."""

    name: str
    values: np.ndarray
    group: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SegmentInvariants2D:
    i1: float
    i2: float
    i3: float


def compact(mi) -> str:
    return str(mi).replace("[", "").replace("]", "").replace(",", "")


def env_2d(table: PotentialTable) -> dict[str, np.ndarray]:
    if table.dim != 2 or table.order < 3:
        raise CurveInputError("planar invariants need a dim-2 table of order 3")
    X, Y = table.coords[:, 0], table.coords[:, 1]
    env = {"X": X, "Y": Y, "r": np.hypot(X, Y)}
    env.update({compact(k): v for k, v in table.entries.items()})
    return env


def _small(v: np.ndarray) -> np.ndarray:
    m = np.max(np.abs(v)) if v.size else 0.0
    return np.abs(v) <= REL_UNDEFINED * m


def se2_invariants(table: PotentialTable, formulas: FormulaSet = FORMULAS) -> dict[str, InvariantTrace]:
    """Potentials seen from the rotated frame that puts the current point on the x-axis.

    Where r = 0 (the start point, or returns to it) the value is set to 0,
    the limit along a smooth curve leaving the origin.
    """
    env = env_2d(table)
    at_origin = env["r"] <= REL_UNDEFINED * max(np.max(env["r"]), 1e-300)
    out = {}
    for ex in formulas.rotation_2d.values():
        v = np.asarray(ex.evaluate(env), float) * np.ones(len(table))
        v = np.where(at_origin, 0.0, v)
        out[ex.name] = InvariantTrace(ex.name, v, "SE")
    return out


def se2_numerators(table: PotentialTable, formulas: FormulaSet = FORMULAS) -> dict[str, InvariantTrace]:
    """The same expressions without their powers of r; still rotation invariant."""
    env = env_2d(table)
    out = {}
    for ex in formulas.rotation_2d.values():
        num = type(ex)(ex.name, ex.scale, (), ex.terms)
        out[ex.name] = InvariantTrace(ex.name, np.asarray(num.evaluate(env), float) * np.ones(len(table)), "SE")
    return out


def sa2_invariants(table: PotentialTable) -> dict[str, InvariantTrace]:
    """I1, I2, I3 as polynomials in the coordinates and potentials."""
    env = env_2d(table)
    X, Y = env["X"], env["Y"]
    y10, y11, y20 = env["Y10"], env["Y11"], env["Y20"]
    y12, y21, y30 = env["Y12"], env["Y21"], env["Y30"]
    i1 = y10 - X * Y / 2
    i2 = y11 * X - y20 * Y / 2 - X**2 * Y**2 / 6
    i3 = y12 * X**2 - y21 * X * Y + y30 * Y**2 / 3 - X**3 * Y**3 / 12
    return {n: InvariantTrace(n, v, "SA") for n, v in (("I1", i1), ("I2", i2), ("I3", i3))}


def sa2_chain(table: PotentialTable, formulas: FormulaSet = FORMULAS) -> dict[str, InvariantTrace]:
    """Special-affine invariants composed from the rigid-motion ones.

    Gives I1..I3 a second time (as a cross-check of the polynomial forms) and
    two further quotient invariants that are undefined where Y_SE[1,1] or r
    vanishes.
    """
    se = {k: t.values for k, t in se2_invariants(table, formulas).items()}
    x, y11, y20 = se["X_SE"], se["Y_SE[1,1]"], se["Y_SE[2,0]"]
    y12, y21, y30 = se["Y_SE[1,2]"], se["Y_SE[2,1]"], se["Y_SE[3,0]"]
    bad = _small(y11) | _small(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = y20 / y11
        a21 = y21 - q * y12
        a31 = (y30 - 1.5 * q * y21 + 0.75 * q**2 * y12) / x**2
    a21[bad] = np.nan
    a31[bad] = np.nan
    out = {
        "I1": se["Y_SE[1,0]"],
        "I2": x * y11,
        "I3": y12 * x**2,
        "Y_SA[2,1]": a21,
        "Y_SA[3,1]": a31,
    }
    return {k: InvariantTrace(k, v, "SA") for k, v in out.items()}


def i2_area_decomposition(table: PotentialTable) -> np.ndarray:
    """I2 written through the two signed areas  X^2 Y^2 - 3 X Y[1,1]  and  X^2 Y^2 - 3 Y X[1,1]."""
    X, Y = table.coords[:, 0], table.coords[:, 1]
    x11 = table["X[1,1]"]
    return -((X**2 * Y**2 - 3 * X * table["Y[1,1]"]) + (X**2 * Y**2 - 3 * Y * x11)) / 3


def check_nondegenerate(first: np.ndarray, floor: float) -> float:
    """max|first invariant|, or DegenerateGeometryError if it is not above ``floor``."""
    m = float(np.nanmax(np.abs(first)))
    if not m > floor:
        raise DegenerateGeometryError("signature does not exist: the first invariant vanishes identically")
    return m


def a2_invariants(traces: dict[str, InvariantTrace], length: float = 0.0) -> dict[str, InvariantTrace]:
    """Full-affine quantities built from I1..I3.

    Returns the point-wise ratios I2/I1^2 and I3/I1^3 (undefined where I1 is
    close to zero) and the curve-normalised |I1|/max|I1|, |I2|/max I1^2.
    ``length`` is the curve size; I1 counts as identically zero when it
    stays below 1e-10 length^2.
    """
    i1, i2, i3 = (traces[k].values for k in ("I1", "I2", "I3"))
    m = check_nondegenerate(i1, 1e-10 * length**2)
    bad = _small(i1)
    with np.errstate(divide="ignore", invalid="ignore"):
        i2a = np.where(bad, np.nan, i2 / i1**2)
        i3a = np.where(bad, np.nan, i3 / i1**3)
    return {
        "I2_A": InvariantTrace("I2_A", i2a, "A"),
        "I3_A": InvariantTrace("I3_A", i3a, "A"),
        "I1_tilde": InvariantTrace("I1_tilde", np.abs(i1) / m, "A"),
        "I2_tilde": InvariantTrace("I2_tilde", np.abs(i2) / m**2, "A"),
    }


def invariants_2d(curve: Curve | CenteredCurve, group: str = "special") -> dict[str, InvariantTrace]:
    """All traces of one group for a planar curve."""
    cc = center(curve)
    if cc.dim != 2:
        raise CurveInputError("expected a planar curve")
    table = potential_table(cc)
    if group == "euclidean":
        return se2_invariants(table)
    sa = sa2_invariants(table)
    if group == "special":
        return sa
    if group == "full":
        return {**sa, **a2_invariants(sa, bbox_diagonal(cc.points))}
    raise CurveInputError(f"unknown group {group!r}")


def segment_invariants_2d(curve: Curve | CenteredCurve, p: int, q: int) -> SegmentInvariants2D:
    """I1..I3 of samples p..q re-centred at sample p, evaluated at q."""
    pts = np.asarray(curve.points)
    if not 0 <= p <= q < len(pts):
        raise CurveInputError(f"need 0 <= p <= q < {len(pts)}")
    sub = pts[p : q + 1] - pts[p]
    X, Y = sub[-1]
    v = {k: segment_potential(curve, p, q, k) for k in ("Y[1,0]", "Y[1,1]", "Y[2,0]", "Y[1,2]", "Y[2,1]", "Y[3,0]")}
    return SegmentInvariants2D(
        v["Y[1,0]"] - X * Y / 2,
        v["Y[1,1]"] * X - v["Y[2,0]"] * Y / 2 - X**2 * Y**2 / 6,
        v["Y[1,2]"] * X**2 - v["Y[2,1]"] * X * Y + v["Y[3,0]"] * Y**2 / 3 - X**3 * Y**3 / 12,
    )
