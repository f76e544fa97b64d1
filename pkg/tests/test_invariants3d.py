import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rel_err, smooth_curve
from intsig.curves import Curve, generate_example, random_affine
from intsig.errors import CurveInputError, DegenerateGeometryError
from intsig.invariants3d import (
    a3_invariants,
    euclidean_aux,
    invariants_3d,
    j2_cross_check,
    normals,
    sa3_invariants,
    se3_invariants,
    segment_invariants_3d,
    undefined_mask,
)
from intsig.potentials import potential_table

seeds = st.integers(0, 10_000)


def _well_defined(curve):
    aux = euclidean_aux(potential_table(curve))
    ok = ~undefined_mask(aux) & ~aux.origin
    for k in ("r", "R", "D"):
        ok &= np.abs(aux[k]) > 0.05 * np.max(np.abs(aux[k]))
    return ok


class TestSpecialAffine:
    @given(seeds)
    def test_polynomial_forms_exact(self, seed):
        c = smooth_curve(3, 300, seed)
        g = random_affine(3, "special", seed + 1)
        u, v = invariants_3d(c), invariants_3d(Curve(g.apply(c.points)))
        for k in ("J1", "J2"):
            assert rel_err(v[k].values, u[k].values) <= 1e-9

    @given(seeds)
    def test_j3_invariant_where_defined(self, seed):
        c = smooth_curve(3, 300, seed)
        g = random_affine(3, "special", seed + 1)
        ok = _well_defined(c)
        u, v = invariants_3d(c)["J3"].values, invariants_3d(Curve(g.apply(c.points)))["J3"].values
        assert rel_err(v[ok], u[ok]) <= 1e-7

    def test_j1_from_normals(self, curve3):
        table = potential_table(curve3)
        n1, n2, n3 = normals(table)
        X, Y, Z = table.coords.T
        assert rel_err(sa3_invariants(table)["J1"].values, n1 * X + n2 * Z - n3 * Y) == 0.0

    def test_j1_is_product_of_rigid_invariants(self, curve3):
        table = potential_table(curve3)
        se = se3_invariants(euclidean_aux(table))
        x_sa = se["Z_SE[0,1,0]"].values * se["X_SE"].values
        assert rel_err(x_sa, sa3_invariants(table)["J1"].values) <= 1e-10

    def test_composed_j2_with_frame_sign_is_minus_two_j2(self, curve3):
        out = j2_cross_check(potential_table(curve3))
        ok = np.isfinite(out["composed_frame"]) & _well_defined(curve3)
        assert rel_err(out["composed_frame"][ok], -2 * out["J2"][ok]) <= 1e-8

    def test_reference_example_map(self):
        A = np.array([[0.3816, 0.7631, 1.1447], [1.9079, 1.5263, 2.2894], [2.6710, 3.0526, 3.4341]])
        c = generate_example("beta3d", 1000)
        a, b = invariants_3d(c), invariants_3d(Curve(c.points @ A.T))
        # entries carry 4 decimals, so det A = 1 only to ~6e-6
        for k in ("J1", "J2"):
            assert rel_err(b[k].values, a[k].values) <= 1e-3


class TestEuclidean:
    @given(seeds)
    def test_rotation_invariance(self, seed):
        c = smooth_curve(3, 200, seed)
        g = random_affine(3, "special_euclidean", seed)
        ok = _well_defined(c)
        u = se3_invariants(euclidean_aux(potential_table(c)), completion=True)
        v = se3_invariants(euclidean_aux(potential_table(Curve(g.apply(c.points)))), completion=True)
        for k in u:
            assert rel_err(v[k].values[ok], u[k].values[ok]) <= 1e-7

    def test_seven_rigid_invariants(self, curve3):
        assert len(invariants_3d(curve3, "euclidean")) == 7


class TestFullAffine:
    def test_weights(self, curve3):
        A = np.array([[1.3, 0.2, -0.4], [0.1, 0.8, 0.5], [0.3, -0.6, 1.1]])
        a = a3_invariants(invariants_3d(curve3), curve3.scale)
        moved = Curve(curve3.points @ A.T)
        b = a3_invariants(invariants_3d(moved), moved.scale)
        j1 = np.abs(invariants_3d(curve3)["J1"].values)
        ok = _well_defined(curve3) & (j1 > 0.05 * j1.max())
        for k in ("J2_A", "J3_A"):
            assert rel_err(b[k].values[ok], a[k].values[ok]) <= 1e-7
        for k in ("J1_tilde", "J2_tilde"):
            assert rel_err(b[k].values, a[k].values) <= 1e-9

    def test_j3_has_determinant_weight_four(self, curve3):
        lam = 1.7
        moved = Curve(curve3.points * [lam, lam, -lam])
        ok = _well_defined(curve3)
        u, v = invariants_3d(curve3)["J3"].values, invariants_3d(moved)["J3"].values
        assert np.allclose(v[ok] / u[ok], lam**12, rtol=1e-7)

    def test_planar_space_curve_is_degenerate(self):
        t = np.linspace(0, 5, 100)
        flat = Curve(np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)]))
        with pytest.raises(DegenerateGeometryError):
            invariants_3d(flat, "full")

    def test_needs_space_curve(self, curve2):
        with pytest.raises(CurveInputError):
            invariants_3d(curve2)


class TestSegments:
    def test_matches_recentred_subcurve(self, curve3):
        s = segment_invariants_3d(curve3, 30, 150)
        full = invariants_3d(Curve(curve3.points[30:151]))
        assert s.j1 == pytest.approx(full["J1"].values[-1], rel=1e-10)
        assert s.j2 == pytest.approx(full["J2"].values[-1], rel=1e-9)
        assert s.j3 == pytest.approx(full["J3"].values[-1], rel=1e-7)

    def test_empty_segment(self, curve3):
        assert segment_invariants_3d(curve3, 5, 5).j1 == 0.0
