"""Hand-transcribed closed forms stored as coefficient tables.

Each expression is  scale * sum_k coef_k * monomial_k / prod(den_j ** pow_j),
with monomials written as space-separated tokens (``X^2 Y Z011``). Keeping
the formulas as data lets the verification battery re-derive every one of
them numerically and lets tests perturb single coefficients.

Token vocabulary
  X, Y, Z         centred coordinates at the evaluation point
  r, R            |(X, Y)| and |(X, Y, Z)|
  Y10, Z011, ...  potentials: target letter followed by the exponents
  R_Z020, ...     values of the rotation-normalised 3-D expressions below
  D               R_Z020^2 + 4 R_Z011^2
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import cached_property
from fractions import Fraction
from typing import Mapping

import numpy as np

_TOKEN = re.compile(r"^([A-Za-z_]+\d*)(?:\^(\d+))?$")


@dataclass(frozen=True)
class Expr:
    name: str
    scale: str
    denominator: tuple[tuple[str, float], ...]
    terms: tuple[tuple[str, str], ...]

    def evaluate(self, env: Mapping[str, np.ndarray]) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return self._evaluate(env)

    @cached_property
    def _compiled(self):
        terms = []
        for coef, mono in self.terms:
            factors = []
            for tok in mono.split():
                m = _TOKEN.match(tok)
                if m is None:
                    raise ValueError(f"bad token {tok!r} in {self.name}")
                factors.append((m.group(1), int(m.group(2) or 1)))
            terms.append((float(Fraction(coef)), factors))
        return float(Fraction(self.scale)), terms

    def _evaluate(self, env):
        scale, terms = self._compiled
        total = 0.0
        for value, factors in terms:
            for sym, power in factors:
                value = value * (env[sym] if power == 1 else env[sym] ** power)
            total = total + value
        den = 1.0
        for sym, power in self.denominator:
            den = den * env[sym] ** power
        return scale * total / den

    def symbols(self) -> set[str]:
        out = {s for s, _ in self.denominator}
        for _, mono in self.terms:
            out.update(_TOKEN.match(t).group(1) for t in mono.split())
        return out

    def perturbed(self, index: int, delta: float) -> "Expr":
        """Copy with the coefficient of term ``index`` changed by ``delta`` (relative)."""
        terms = list(self.terms)
        coef, mono = terms[index]
        old = Fraction(coef)
        new = old * (1 + Fraction(delta).limit_denominator(10**6)) if old else Fraction(delta)
        terms[index] = (str(new), mono)
        return replace(self, terms=tuple(terms))


def _e(name, scale, den, *terms):
    return Expr(name, scale, tuple(den), tuple(terms))


# Planar potentials rotated so the current point lies on the positive x-axis.
ROTATION_2D = {
    "X": _e("X_SE", "1", [], ("1", "r")),
    "Y10": _e("Y_SE[1,0]", "1", [], ("1", "Y10"), ("-1/2", "X Y")),
    "Y11": _e("Y_SE[1,1]", "1", [("r", 1)], ("1", "X Y11"), ("-1/2", "Y Y20"), ("-1/6", "X^2 Y^2")),
    "Y20": _e("Y_SE[2,0]", "1", [("r", 1)], ("1", "X Y20"), ("2", "Y Y11"), ("-1/3", "X^3 Y"), ("-2/3", "X Y^3")),
    "Y12": _e(
        "Y_SE[1,2]", "1", [("r", 2)],
        ("1", "X^2 Y12"), ("-1", "X Y Y21"), ("1/3", "Y^2 Y30"), ("-1/12", "X^3 Y^3"),
    ),
    # note the sign of the Y30 term: +2/3 would break rotation invariance
    "Y21": _e(
        "Y_SE[2,1]", "1", [("r", 2)],
        ("1", "X^2 Y21"), ("-1", "Y^2 Y21"), ("2", "X Y Y12"), ("-2/3", "X Y Y30"),
        ("-1/4", "X^2 Y^4"), ("-1/12", "X^4 Y^2"),
    ),
    "Y30": _e(
        "Y_SE[3,0]", "1", [("r", 2)],
        ("1", "X^2 Y30"), ("3", "Y^2 Y12"), ("3", "X Y Y21"),
        ("-1/4", "X^5 Y"), ("-3/4", "X^3 Y^3"), ("-3/4", "X Y^5"),
    ),
}

# Spatial potentials after the two rotations that send the current point to
# the positive x-axis (about z, then about y).
ROTATION_AUX_3D = {
    "Z010": Expr(
        "Z_R[0,1,0]", "-1/2", (("R", 1),),
        (
            ("1", "X Y Z"),
            ("-2", "X Z010"),
            ("2", "Y Z100"),
            ("-2", "Z Y100"),
        ),
    ),
    "Z100": Expr(
        "Z_R[1,0,0]", "-1/2", (("r", 1),),
        (
            ("1", "X^2 Z"),
            ("1", "Y^2 Z"),
            ("-2", "X Z100"),
            ("-2", "Y Z010"),
        ),
    ),
    "Y100": Expr(
        "Y_R[1,0,0]", "-1/2", (("r", 1), ("R", 1),),
        (
            ("1", "X Y^3"),
            ("1", "X^3 Y"),
            ("2", "X Z Z010"),
            ("-2", "X^2 Y100"),
            ("-2", "Y Z Z100"),
            ("-2", "Y^2 Y100"),
        ),
    ),
    # R enters squared here, unlike the other order-2 entries
    "Z011": Expr(
        "Z_R[0,1,1]", "-1/6", (("r", 1), ("R", 2),),
        (
            ("4", "X Y^3 Z^2"),
            ("2", "X^3 Y Z^2"),
            ("6", "X Y Z X101"),
            ("3", "X Y Z Z020"),
            ("-6", "X Y^2 Z011"),
            ("-6", "X Z^2 X110"),
            ("6", "X^2 Y Z101"),
            ("-6", "X^2 Z Y101"),
            ("-6", "X^3 Z011"),
            ("-3", "Y Z^2 X020"),
            ("-6", "Y^2 Z Y101"),
            ("-6", "Y^2 Z Z110"),
            ("6", "Y^3 Z101"),
        ),
    ),
    "Z020": Expr(
        "Z_R[0,2,0]", "-1/3", (("r", 1), ("R", 1),),
        (
            ("-2", "X^2 Y^2 Z"),
            ("6", "X Y Z110"),
            ("3", "X Z X020"),
            ("-3", "X^2 Z020"),
            ("-6", "Y Z X110"),
            ("6", "Y^2 X101"),
        ),
    ),
    "Z101": Expr(
        "Z_R[1,0,1]", "1/6", (("r", 2), ("R", 1),),
        (
            ("-2", "X^2 Y^2 Z^2"),
            ("-4", "X^4 Z^2"),
            ("-1", "Y^4 Z^2"),
            ("-6", "X Y Z Z110"),
            ("6", "X Y^2 Z101"),
            ("6", "X^2 Y Z011"),
            ("6", "X^2 Z X101"),
            ("6", "X^3 Z101"),
            ("-3", "Y^2 Z Z020"),
            ("6", "Y^3 Z011"),
        ),
    ),
    "Z110": Expr(
        "Z_R[1,1,0]", "1/6", (("r", 2), ("R", 2),),
        (
            ("-3", "X Y^3 Z^3"),
            ("1", "X Y^5 Z"),
            ("-6", "X^3 Y Z^3"),
            ("-3", "X^3 Y^3 Z"),
            ("-4", "X^5 Y Z"),
            ("6", "X Y Z^2 X101"),
            ("3", "X Y Z^2 Z020"),
            ("-6", "X Y^2 Z X110"),
            ("6", "X Y^2 Z Z011"),
            ("12", "X Y^3 X101"),
            ("6", "X Y^3 Z020"),
            ("-3", "X^2 Y Z X020"),
            ("-6", "X^2 Y Z Z101"),
            ("6", "X^2 Z^2 Y101"),
            ("6", "X^2 Z^2 Z110"),
            ("12", "X^3 Y X101"),
            ("6", "X^3 Y Z020"),
            ("-6", "X^3 Z X110"),
            ("6", "X^3 Z Z011"),
            ("6", "X^4 Z110"),
            ("6", "Y^2 Z^2 Y101"),
            ("-3", "Y^3 Z X020"),
            ("-6", "Y^3 Z Z101"),
            ("-6", "Y^4 Z110"),
        ),
    ),
    "Y101": Expr(
        "Y_R[1,0,1]", "-1/6", (("r", 2), ("R", 2),),
        (
            ("-3", "X Y^3 Z^3"),
            ("5", "X Y^5 Z"),
            ("9", "X^3 Y^3 Z"),
            ("4", "X^5 Y Z"),
            ("-6", "X Y Z^2 X101"),
            ("-3", "X Y Z^2 Z020"),
            ("-12", "X Y^2 Z X110"),
            ("12", "X Y^2 Z Z011"),
            ("6", "X Y^3 X101"),
            ("3", "X Y^3 Z020"),
            ("-6", "X^2 Y Z X020"),
            ("-12", "X^2 Y Z Z101"),
            ("-12", "X^2 Y^2 Y101"),
            ("-6", "X^2 Y^2 Z110"),
            ("6", "X^2 Z^2 Y101"),
            ("6", "X^3 Y X101"),
            ("3", "X^3 Y Z020"),
            ("-12", "X^3 Z X110"),
            ("12", "X^3 Z Z011"),
            ("-6", "X^4 Y101"),
            ("6", "Y^2 Z^2 Y101"),
            ("6", "Y^2 Z^2 Z110"),
            ("-6", "Y^3 Z X020"),
            ("-12", "Y^3 Z Z101"),
            ("-6", "Y^4 Y101"),
            ("-6", "Y^4 Z110"),
        ),
    ),
    "X110": Expr(
        "X_R[1,1,0]", "1/6", (("r", 1), ("R", 2),),
        (
            ("3", "X Y^3 Z^2"),
            ("-1", "X Y^5"),
            ("-3", "X^3 Y^3"),
            ("-2", "X^5 Y"),
            ("6", "X Y Z X101"),
            ("3", "X Y Z Z020"),
            ("6", "X Y^2 X110"),
            ("6", "X Z^2 Z011"),
            ("3", "X^2 Y X020"),
            ("-6", "X^2 Z Y101"),
            ("6", "X^3 X110"),
            ("-6", "Y Z^2 Z101"),
            ("-6", "Y^2 Z Y101"),
            ("-6", "Y^2 Z Z110"),
            ("3", "Y^3 X020"),
        ),
    ),
    "X101": Expr(
        "X_R[1,0,1]", "1/6", (("r", 1), ("R", 1),),
        (
            ("2", "X^2 Y^2 Z"),
            ("2", "X^2 Z^3"),
            ("-2", "X^4 Z"),
            ("2", "Y^2 Z^3"),
            ("1", "Y^4 Z"),
            ("-6", "X Y Z110"),
            ("-6", "X Z Z101"),
            ("6", "X^2 X101"),
            ("-6", "Y Z Z011"),
            ("-3", "Y^2 Z020"),
        ),
    ),
    "X020": Expr(
        "X_R[0,2,0]", "-1/3", (("r", 2), ("R", 1),),
        (
            ("-3", "X^2 Y^2 Z^2"),
            ("-1", "X^2 Y^4"),
            ("-1", "X^4 Y^2"),
            ("6", "X Y Z Z110"),
            ("-3", "X Y^2 X020"),
            ("6", "X^2 Y X110"),
            ("-3", "X^2 Z Z020"),
            ("-3", "X^3 X020"),
            ("6", "Y^2 Z X101"),
            ("6", "Y^3 X110"),
        ),
    ),
}


# Rigid-motion invariants: ROTATION_AUX_3D followed by the rotation about the
# x-axis that removes R_Z011.
ROTATION_3D = {
    "X": _e("X_SE", "1", [], ("1", "R")),
    # sign opposite to R_Z010; kept because J1 is built on this convention
    "Z010": _e("Z_SE[0,1,0]", "1/2", [("R", 1)], ("1", "X Y Z"), ("-2", "X Z010"), ("2", "Y Z100"), ("-2", "Z Y100")),
    "Y100": _e("Y_SE[1,0,0]", "1", [("D", 0.5)], ("1", "R_Z020 R_Y100"), ("2", "R_Z011 R_Z100")),
    "Y101": _e(
        "Y_SE[1,0,1]", "-1", [("D", 1)],
        ("-2", "R_Z020 R_Z011 R_Z101"), ("-1", "R_Z011 R_Z020 R_X020"),
        ("4", "R_Z011^2 R_Z110"), ("-1", "R_Z020^2 R_Y101"),
    ),
    "Z020": _e("Z_SE[0,2,0]", "1", [("D", -0.5)], ("1", "")),
    "Z101": _e(
        "Z_SE[1,0,1]", "-1", [("D", 1)],
        ("2", "R_Z020 R_Z011 R_Z110"), ("-1", "R_Z020^2 R_Z101"),
        ("2", "R_Z011^2 R_X020"), ("2", "R_Z011 R_Z020 R_Y101"),
    ),
    "Z110": _e(
        "Z_SE[1,1,0]", "1", [("D", 1)],
        ("2", "R_Z020 R_Z011 R_Z101"), ("1", "R_Z011 R_Z020 R_X020"),
        ("-4", "R_Z011^2 R_Y101"), ("1", "R_Z020^2 R_Z110"),
    ),
}

# Remaining components of the same x-axis rotation. Not needed by J1..J3 but
# they make every entry of ROTATION_AUX_3D feed some rigid-motion invariant.
ROTATION_3D_COMPLETION = {
    "Z100": _e("Z_SE[1,0,0]", "1", [("D", 0.5)], ("1", "R_Z020 R_Z100"), ("-2", "R_Z011 R_Y100")),
    "X110": _e("X_SE[1,1,0]", "1", [("D", 0.5)], ("1", "R_Z020 R_X110"), ("2", "R_Z011 R_X101")),
    "X101": _e("X_SE[1,0,1]", "1", [("D", 0.5)], ("-2", "R_Z011 R_X110"), ("1", "R_Z020 R_X101")),
}


@dataclass(frozen=True)
class FormulaSet:
    """The three tables used by the invariant code; swappable for testing."""

    rotation_2d: Mapping[str, Expr]
    rotation_aux_3d: Mapping[str, Expr]
    rotation_3d: Mapping[str, Expr]
    rotation_3d_completion: Mapping[str, Expr]

    def tables(self) -> dict[str, Mapping[str, Expr]]:
        return {
            "rotation_2d": self.rotation_2d,
            "rotation_aux_3d": self.rotation_aux_3d,
            "rotation_3d": self.rotation_3d,
            "rotation_3d_completion": self.rotation_3d_completion,
        }

    def find(self, name: str) -> tuple[str, str]:
        for table, exprs in self.tables().items():
            for key, ex in exprs.items():
                if ex.name == name:
                    return table, key
        raise KeyError(name)

    def with_expr(self, table: str, key: str, expr: Expr) -> "FormulaSet":
        tables = {k: dict(v) for k, v in self.tables().items()}
        tables[table][key] = expr
        return FormulaSet(**tables)

    def mutable_terms(self) -> list[tuple[str, str, int]]:
        """(table, key, term index) for every coefficient in a multi-term numerator."""
        out = []
        for table, exprs in self.tables().items():
            if table == "rotation_3d_completion":
                continue
            for key, ex in exprs.items():
                if len(ex.terms) > 1:
                    out.extend((table, key, i) for i in range(len(ex.terms)))
        return out

    def mutate(self, rng: np.random.Generator, delta: float = 0.25) -> tuple["FormulaSet", str, int]:
        candidates = self.mutable_terms()
        table, key, idx = candidates[rng.integers(len(candidates))]
        expr = self.tables()[table][key]
        return self.with_expr(table, key, expr.perturbed(idx, delta)), expr.name, idx


FORMULAS = FormulaSet(ROTATION_2D, ROTATION_AUX_3D, ROTATION_3D, ROTATION_3D_COMPLETION)
