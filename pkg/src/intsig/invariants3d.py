"""Rigid-motion, special-affine and full-affine invariants of space curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve, bbox_diagonal
from .errors import CurveInputError
from .invariants2d import REL_UNDEFINED, InvariantTrace, check_nondegenerate, compact
from .potentials import CenteredCurve, PotentialTable, center, potential_table, segment_tables
from .transcriptions import FORMULAS, FormulaSet


@dataclass(frozen=True)
class SegmentInvariants3D:
    j1: float
    j2: float
    j3: float


@dataclass(frozen=True)
class EuclideanAux:
    """Potentials after rotating the current point onto the x-axis.

    ``env`` holds everything the transcribed formulas refer to: coordinates,
    raw potentials, r, R, the eleven rotated values (``R_Z020`` ...) and D.
    ``origin`` flags samples at the start point, where values are set to 0.
    """

    env: dict[str, np.ndarray]
    origin: np.ndarray

    def __getitem__(self, key: str) -> np.ndarray:
        return self.env[key]


def _tiny(v: np.ndarray) -> np.ndarray:
    m = float(np.max(np.abs(v))) if v.size else 0.0
    return np.abs(v) <= REL_UNDEFINED * m


def env_3d(table: PotentialTable) -> dict[str, np.ndarray]:
    if table.dim != 3 or table.order < 2:
        raise CurveInputError("spatial invariants need a dim-3 table of order 2")
    X, Y, Z = table.coords.T
    env = {"X": X, "Y": Y, "Z": Z, "r": np.hypot(X, Y), "R": np.sqrt(X * X + Y * Y + Z * Z)}
    env.update({compact(k): v for k, v in table.entries.items()})
    return env


def euclidean_aux(table: PotentialTable, formulas: FormulaSet = FORMULAS) -> EuclideanAux:
    env = env_3d(table)
    origin = _tiny(env["R"])
    for key, ex in formulas.rotation_aux_3d.items():
        v = np.asarray(ex.evaluate(env), float)
        env["R_" + key] = np.where(origin, 0.0, v)
    env["D"] = env["R_Z020"] ** 2 + 4 * env["R_Z011"] ** 2
    return EuclideanAux(env, origin)


def undefined_mask(aux: EuclideanAux) -> np.ndarray:
    """Samples (away from the start) where the moving frame is not determined."""
    env = aux.env
    bad = _tiny(env["r"]) | _tiny(env["D"])
    return bad & ~aux.origin


def se3_invariants(
    aux: EuclideanAux, formulas: FormulaSet = FORMULAS, completion: bool = False
) -> dict[str, InvariantTrace]:
    """The seven rigid-motion invariants (plus three completing components on request)."""
    exprs = list(formulas.rotation_3d.values())
    if completion:
        exprs += list(formulas.rotation_3d_completion.values())
    bad = undefined_mask(aux)
    n = len(aux.origin)
    out = {}
    for ex in exprs:
        v = np.asarray(ex.evaluate(aux.env), float) * np.ones(n)
        v = np.where(aux.origin, 0.0, v)
        if "D" in ex.symbols() or any(s.startswith("R_") for s in ex.symbols()):
            v = np.where(bad, np.nan, v)
        out[ex.name] = InvariantTrace(ex.name, v, "SE")
    return out


def normals(table: PotentialTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Signed areas of the projections onto the three coordinate planes."""
    env = env_3d(table)
    X, Y, Z = env["X"], env["Y"], env["Z"]
    n1 = Y * Z / 2 - env["Z010"]
    n2 = X * Y / 2 - env["Y100"]
    n3 = X * Z / 2 - env["Z100"]
    return n1, n2, n3


def j1_j2(table: PotentialTable) -> tuple[np.ndarray, np.ndarray]:
    """J1 and J2 as polynomials in the coordinates and potentials."""
    env = env_3d(table)
    X, Y, Z = env["X"], env["Y"], env["Z"]
    n1, n2, n3 = normals(table)
    j1 = n1 * X + n2 * Z - n3 * Y
    j2 = (
        2 * n2 * (X * Y * Z**2 - 3 * env["Z011"] * X + 3 * Y * env["Z101"] - Z * env["Z110"] - 2 * Z * env["Y101"])
        + n3 * (2 * X * Y**2 * Z + 3 * X * env["Z020"] - 3 * Z * env["X020"] - 4 * Y * env["Z110"] - 2 * Y * env["Y101"])
        - 2 * n1 * (3 * Y * env["X101"] - 3 * Z * env["X110"] + X * env["Z110"] - X * env["Y101"])
    )
    return j1, j2


def sa3_invariants(
    table: PotentialTable, aux: EuclideanAux | None = None, formulas: FormulaSet = FORMULAS
) -> dict[str, InvariantTrace]:
    """J1, J2 (polynomial forms) and J3 (through the rigid-motion invariants).

    J3 = 27/8 Z_SA[1,0,1] X_SA^3 with X_SA = Z_SE[0,1,0] X_SE; the cube of
    Z_SE[0,1,0] cancels, leaving 27/8 Z_SE[1,0,1] Z_SE[0,2,0]^2 X_SE^3, which
    is undefined only where the moving frame is.
    """
    aux = euclidean_aux(table, formulas) if aux is None else aux
    j1, j2 = j1_j2(table)
    se = se3_invariants(aux, formulas)
    j3 = 27 / 8 * se["Z_SE[1,0,1]"].values * se["Z_SE[0,2,0]"].values ** 2 * se["X_SE"].values ** 3
    return {
        "J1": InvariantTrace("J1", j1, "SA"),
        "J2": InvariantTrace("J2", j2, "SA"),
        "J3": InvariantTrace("J3", j3, "SA"),
    }


def j2_cross_check(table: PotentialTable, formulas: FormulaSet = FORMULAS) -> dict[str, np.ndarray]:
    """Compare the polynomial J2 with compositions of rigid-motion invariants.

    ``composed`` uses -4 (Y_SA[1,0,1] + 1/2) X_SA with every factor as
    tabulated. ``composed_frame`` flips Z_SE[0,1,0] inside Y_SA[1,0,1] to the
    sign the moving frame produces; it is a genuine invariant and equals
    -2 J2. Returned values are NaN where a quotient is undefined.
    """
    aux = euclidean_aux(table, formulas)
    se = {k: t.values for k, t in se3_invariants(aux, formulas, completion=True).items()}
    _, j2 = j1_j2(table)
    z010 = se["Z_SE[0,1,0]"]
    x_sa = z010 * se["X_SE"]
    bad = _tiny(z010)

    def y_sa101(z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (2 * se["Y_SE[1,0,1]"] * z - 2 * z * se["Z_SE[1,1,0]"] + 3 * se["Z_SE[0,2,0]"] * se["Z_SE[1,0,0]"]) / (
                2 * z
            ) - 0.5

    composed = np.where(bad, np.nan, -4 * (y_sa101(z010) + 0.5) * x_sa)
    composed_frame = np.where(bad, np.nan, -4 * (y_sa101(-z010) + 0.5) * x_sa)
    return {"J2": j2, "composed": composed, "composed_frame": composed_frame}


def a3_invariants(traces: dict[str, InvariantTrace], length: float = 0.0) -> dict[str, InvariantTrace]:
    """Full-affine quantities built from J1..J3.

    J1 and J2 carry determinant weights 1 and 2, J3 carries weight 4, so the
    point-wise full-affine invariants are J2/J1^2 and J3/J1^4. Normalised
    traces: |J1|/max|J1| and J2/max J1^2.
    """
    j1, j2, j3 = (traces[k].values for k in ("J1", "J2", "J3"))
    m = check_nondegenerate(j1, 1e-10 * length**3)
    bad = _tiny(j1)
    with np.errstate(divide="ignore", invalid="ignore"):
        j2a = np.where(bad, np.nan, j2 / j1**2)
        j3a = np.where(bad, np.nan, j3 / j1**4)
    return {
        "J2_A": InvariantTrace("J2_A", j2a, "A"),
        "J3_A": InvariantTrace("J3_A", j3a, "A"),
        "J1_tilde": InvariantTrace("J1_tilde", np.abs(j1) / m, "A"),
        "J2_tilde": InvariantTrace("J2_tilde", j2 / m**2, "A"),
    }


def invariants_3d(curve: Curve | CenteredCurve, group: str = "special") -> dict[str, InvariantTrace]:
    cc = center(curve)
    if cc.dim != 3:
        raise CurveInputError("expected a space curve")
    table = potential_table(cc)
    aux = euclidean_aux(table)
    if group == "euclidean":
        return se3_invariants(aux)
    sa = sa3_invariants(table, aux)
    if group == "special":
        return sa
    if group == "full":
        return {**sa, **a3_invariants(sa, bbox_diagonal(cc.points))}
    raise CurveInputError(f"unknown group {group!r}")


def segment_invariants_3d(curve: Curve | CenteredCurve, p: int, q: int) -> SegmentInvariants3D:
    """J1..J3 of samples p..q re-centred at sample p, evaluated at q."""
    n = len(curve.points)
    if not 0 <= p < q < n:
        if 0 <= p == q < n:
            return SegmentInvariants3D(0.0, 0.0, 0.0)
        raise CurveInputError(f"need 0 <= p <= q < {n}")
    table = segment_tables(curve, [p, q])
    sa = sa3_invariants(table)
    return SegmentInvariants3D(*(float(sa[k].values[0]) for k in ("J1", "J2", "J3")))
