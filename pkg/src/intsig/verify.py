"""Numerical checks of every transcribed formula.

Each tabulated expression is compared against a direct re-derivation (rotate
the curve so the current point lies on the x-axis, then integrate the
potentials of the rotated curve) and tested for invariance under random
rotations. Aggregate checks cover the by-parts identities, the linear action
on potentials, special-affine invariance of I1..I3 and J1..J3, and the
shoelace identity. Any coefficient change in a table shows up as a residual
many orders of magnitude above round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curves import Curve
from .invariants2d import env_2d, sa2_chain, sa2_invariants
from .invariants3d import euclidean_aux, sa3_invariants
from .potentials import (
    PotentialTable,
    canonical_indices,
    center,
    by_parts_residuals,
    count_independent,
    MultiIndex,
    exponents,
    potential_table,
    prolonged_action,
    prolonged_action_2d,
)
from .transcriptions import FORMULAS, FormulaSet

TOL = 1e-7
# fraction of a denominator's maximum below which a sample is skipped
CONDITION = 0.05


@dataclass(frozen=True)
class Check:
    name: str
    kind: str
    residual: float
    tol: float = TOL

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def residual(self, name: str, kind: str) -> float:
        return next(c.residual for c in self.checks if c.name == name and c.kind == kind)

    def format_table(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = [f"{'expression':<{width}}  {'check':<12} {'residual':>10}  status"]
        for c in self.checks:
            lines.append(f"{c.name:<{width}}  {c.kind:<12} {c.residual:>10.3e}  {'ok' if c.passed else 'FAIL'}")
        return "\n".join(lines)


def _rel(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    if mask is not None:
        a, b = a[mask], b[mask]
    scale = max(float(np.max(np.abs(b))) if b.size else 0.0, 1e-300)
    return float(np.max(np.abs(a - b)) / scale) if a.size else 0.0


def _well_conditioned(*arrays: np.ndarray) -> np.ndarray:
    ok = np.ones(len(arrays[0]), bool)
    for v in arrays:
        ok &= np.abs(v) > CONDITION * np.max(np.abs(v))
    return ok


def sample_curves(dim: int, n_curves: int, n_samples: int, seed: int) -> list[Curve]:
    """Smooth open curves with random trigonometric coordinates."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.6 * np.pi, n_samples)
    out = []
    for _ in range(n_curves):
        k = np.arange(1, 4)
        coords = [np.cos(np.outer(t, k)) @ rng.uniform(-1, 1, 3) + np.sin(np.outer(t, k)) @ rng.uniform(-1, 1, 3)
                  for _ in range(dim)]
        out.append(Curve(np.column_stack(coords)))
    return out


def _rotation_2d(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _rotation_3d(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


def _special_affine(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        A = rng.uniform(-2, 2, (dim, dim))
        d = np.linalg.det(A)
        if d > 0.1:
            return A / d ** (1 / dim)


def _tabled(points: np.ndarray) -> PotentialTable:
    return potential_table(Curve(points))


def _probe_indices(n: int, count: int) -> np.ndarray:
    return np.unique(np.linspace(n // 5, n - 1, count).astype(int))


# ---------------------------------------------------------------- planar


def _frame_2d(points: np.ndarray, k: int) -> dict[str, float]:
    c = points[: k + 1] - points[0]
    x, y = c[-1]
    R = _rotation_2d(-np.arctan2(y, x))
    table = _tabled(c @ R.T)
    out = {"X_SE": float(np.hypot(x, y))}
    for key in ("Y[1,0]", "Y[1,1]", "Y[2,0]", "Y[1,2]", "Y[2,1]", "Y[3,0]"):
        out[key.replace("Y", "Y_SE", 1)] = float(table[key][-1])
    return out


def _planar_checks(formulas: FormulaSet, curves: list[Curve], rng, probes: int) -> list[Check]:
    checks = []
    frame_res = {ex.name: 0.0 for ex in formulas.rotation_2d.values()}
    inv_res = dict(frame_res)
    for curve in curves:
        table = potential_table(curve)
        env = env_2d(table)
        ok = _well_conditioned(env["r"])
        values = {ex.name: ex.evaluate(env) * np.ones(len(table)) for ex in formulas.rotation_2d.values()}
        for k in _probe_indices(len(table), probes):
            direct = _frame_2d(curve.points, k)
            for name, v in values.items():
                frame_res[name] = max(frame_res[name], abs(v[k] - direct[name]) / max(np.max(np.abs(v[ok])), 1e-300))
        rotated = env_2d(_tabled(curve.points @ _rotation_2d(rng.uniform(0, 2 * np.pi)).T))
        for ex in formulas.rotation_2d.values():
            inv_res[ex.name] = max(inv_res[ex.name], _rel(ex.evaluate(rotated), values[ex.name], ok))
    for ex in formulas.rotation_2d.values():
        checks.append(Check(ex.name, "frame", frame_res[ex.name]))
        checks.append(Check(ex.name, "rotation", inv_res[ex.name]))
    return checks


# ---------------------------------------------------------------- spatial


def _aux_frame(c: np.ndarray) -> np.ndarray:
    x, y, z = c
    r, R = np.hypot(x, y), np.linalg.norm(c)
    ct, st = x / r, -y / r
    cp, sp = r / R, z / R
    Rz = np.array([[ct, -st, 0], [st, ct, 0], [0, 0, 1]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    return Ry @ Rz


def _frame_3d(points: np.ndarray, k: int) -> tuple[dict[str, float], dict[str, float]]:
    """Directly rotated potentials at sample k: after (theta, phi), and after psi too."""
    c = points[: k + 1] - points[0]
    F = _aux_frame(c[-1])
    rotated = _tabled(c @ F.T)
    aux = {str(mi): float(rotated[mi][-1]) for a in exponents(3, 2, 1) for mi in (MultiIndex(a, i) for i in range(3))}
    h = np.hypot(aux["Z[0,2,0]"], 2 * aux["Z[0,1,1]"])
    cs, sn = aux["Z[0,2,0]"] / h, -2 * aux["Z[0,1,1]"] / h
    Rx = np.array([[1, 0, 0], [0, cs, -sn], [0, sn, cs]])
    final = _tabled(c @ (Rx @ F).T)
    se = {"X_SE": float(np.linalg.norm(c[-1]))}
    for key in ("Z[0,1,0]", "Y[1,0,0]", "Y[1,0,1]", "Z[0,2,0]", "Z[1,0,1]", "Z[1,1,0]", "Z[1,0,0]", "X[1,1,0]", "X[1,0,1]"):
        se[key[0] + "_SE" + key[1:]] = float(final[key][-1])
    # tabulated convention: Z_SE[0,1,0] carries the opposite sign
    se["Z_SE[0,1,0]"] = -se["Z_SE[0,1,0]"]
    return aux, se


def _z_rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def _spatial_checks(formulas: FormulaSet, curves: list[Curve], rng, probes: int) -> list[Check]:
    aux_exprs = list(formulas.rotation_aux_3d.values())
    se_exprs = list(formulas.rotation_3d.values()) + list(formulas.rotation_3d_completion.values())
    res: dict[tuple[str, str], float] = {}

    def bump(name, kind, value):
        res[(name, kind)] = max(res.get((name, kind), 0.0), value)

    for curve in curves:
        table = potential_table(curve)
        aux = euclidean_aux(table, formulas)
        env = aux.env
        ok = _well_conditioned(env["r"], env["R"], env["D"])
        values = {ex.name: np.asarray(ex.evaluate(env), float) * np.ones(len(table)) for ex in aux_exprs + se_exprs}
        for k in _probe_indices(len(table), probes):
            if not ok[k]:
                continue
            direct_aux, direct_se = _frame_3d(curve.points, k)
            for ex in aux_exprs:
                scale = max(np.max(np.abs(values[ex.name][ok])), 1e-300)
                bump(ex.name, "frame", abs(values[ex.name][k] - direct_aux[ex.name.replace("_R", "")]) / scale)
            for ex in se_exprs:
                scale = max(np.max(np.abs(values[ex.name][ok])), 1e-300)
                bump(ex.name, "frame", abs(values[ex.name][k] - direct_se[ex.name]) / scale)
        # the aux values depend on the frame only through theta: invariant under rotations about z
        spun = euclidean_aux(_tabled(curve.points @ _z_rotation(rng.uniform(0, 2 * np.pi)).T), formulas).env
        for ex in aux_exprs:
            bump(ex.name, "rotation", _rel(ex.evaluate(spun), values[ex.name], ok))
        turned = euclidean_aux(_tabled(curve.points @ _rotation_3d(rng).T), formulas).env
        for ex in se_exprs:
            bump(ex.name, "rotation", _rel(np.asarray(ex.evaluate(turned), float) * np.ones(len(table)), values[ex.name], ok))
    checks = []
    for ex in aux_exprs + se_exprs:
        checks.append(Check(ex.name, "frame", res.get((ex.name, "frame"), np.nan)))
        checks.append(Check(ex.name, "rotation", res[(ex.name, "rotation")]))
    return checks


# ---------------------------------------------------------------- aggregate checks


def _count_checks() -> list[Check]:
    bad = 0
    for n in range(1, 5):
        for order in range(5):
            bad += len(canonical_indices(n, order)) != count_independent(n, order)
    bad += count_independent(2, 3) != 6
    bad += count_independent(3, 2) != 11
    return [Check("count_independent", "count", float(bad), 0.0)]


def _by_parts_checks(curves2: list[Curve], curves3: list[Curve]) -> list[Check]:
    out = []
    for dim, curves in ((2, curves2), (3, curves3)):
        worst = 0.0
        for c in curves:
            cc = center(c)
            table = potential_table(cc)
            scale = np.max(np.abs(cc.points)) ** (table.order + 1)
            worst = max(worst, by_parts_residuals(table, cc) / scale)
        out.append(Check(f"by_parts_{dim}d", "identity", worst, 1e-10))
    return out


def _action_checks(curves2: list[Curve], curves3: list[Curve], rng) -> list[Check]:
    out = []
    hand, generic2, generic3 = 0.0, 0.0, 0.0
    for c in curves2:
        A = rng.uniform(-2, 2, (2, 2))
        table = potential_table(c)
        moved = _tabled(c.points @ A.T)
        closed = prolonged_action_2d(table, A)
        gen = prolonged_action(table, A)
        for key, v in closed.items():
            hand = max(hand, _rel(v, moved[key]))
            generic2 = max(generic2, _rel(gen[key], moved[key]))
    for c in curves3:
        A = rng.uniform(-2, 2, (3, 3))
        table = potential_table(c)
        moved = _tabled(c.points @ A.T)
        gen = prolonged_action(table, A)
        for key in table.entries:
            generic3 = max(generic3, _rel(gen[key], moved[key]))
    out.append(Check("action_2d_closed_form", "action", hand, 1e-10))
    out.append(Check("action_2d", "action", generic2, 1e-10))
    out.append(Check("action_3d", "action", generic3, 1e-10))
    return out


def _affine_checks(formulas: FormulaSet, curves2: list[Curve], curves3: list[Curve], rng) -> list[Check]:
    res: dict[str, float] = {}

    def bump(name, value):
        res[name] = max(res.get(name, 0.0), value)

    for c in curves2:
        A, b = _special_affine(rng, 2), rng.uniform(-1, 1, 2)
        moved = potential_table(Curve(c.points @ A.T + b))
        table = potential_table(c)
        u, v = sa2_invariants(table), sa2_invariants(moved)
        for k in u:
            bump(k, _rel(v[k].values, u[k].values))
        u, v = sa2_chain(table, formulas), sa2_chain(moved, formulas)
        for k in ("Y_SA[2,1]", "Y_SA[3,1]"):
            ok = np.isfinite(u[k].values) & _well_conditioned(np.nan_to_num(u["I2"].values), env_2d(table)["r"])
            bump(k, _rel(v[k].values, u[k].values, ok))
    for c in curves3:
        A, b = _special_affine(rng, 3), rng.uniform(-1, 1, 3)
        table = potential_table(c)
        moved = potential_table(Curve(c.points @ A.T + b))
        aux = euclidean_aux(table, formulas)
        u, v = sa3_invariants(table, aux, formulas), sa3_invariants(moved, None, formulas)
        ok = _well_conditioned(aux["r"], aux["R"], aux["D"])
        for k in u:
            bump(k, _rel(v[k].values, u[k].values, ok if k == "J3" else None))
    tol = {"I1": 1e-9, "I2": 1e-9, "I3": 1e-9, "J1": 1e-9, "J2": 1e-9}
    return [Check(k, "affine", r, tol.get(k, TOL)) for k, r in res.items()]


def _shoelace_checks(curves2: list[Curve]) -> list[Check]:
    worst = 0.0
    for c in curves2:
        p = c.points - c.points[0]
        i1 = sa2_invariants(potential_table(c))["I1"].values
        x, y = p[:, 0], p[:, 1]
        cross = np.concatenate([[0.0], np.cumsum(x[:-1] * y[1:] - x[1:] * y[:-1])]) / 2
        worst = max(worst, _rel(i1, cross))
    return [Check("I1_shoelace", "identity", worst, 1e-12)]


def run_verification(formulas: FormulaSet = FORMULAS, quick: bool = False, seed: int = 0) -> VerificationReport:
    """Run the whole battery; ``quick`` uses fewer and shorter curves."""
    rng = np.random.default_rng(seed)
    n_curves, n_samples, probes = (2, 200, 4) if quick else (6, 400, 8)
    curves2 = sample_curves(2, n_curves, n_samples, seed)
    curves3 = sample_curves(3, n_curves, n_samples, seed + 1)
    report = VerificationReport()
    steps: list[Callable[[], list[Check]]] = [
        lambda: _planar_checks(formulas, curves2, rng, probes),
        lambda: _spatial_checks(formulas, curves3, rng, probes),
        _count_checks,
        lambda: _by_parts_checks(curves2, curves3),
        lambda: _action_checks(curves2, curves3, rng),
        lambda: _affine_checks(formulas, curves2, curves3, rng),
        lambda: _shoelace_checks(curves2),
    ]
    for step in steps:
        report.checks.extend(step())
    return report
