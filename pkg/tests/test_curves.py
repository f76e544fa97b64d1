import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import smooth_curve
from intsig.curves import (
    AffineMap,
    Curve,
    NoiseSpec,
    add_noise,
    apply_affine,
    generate_example,
    load_curve,
    random_affine,
    reparameterize,
    resample_arclength,
    save_curve,
    shift_start,
)
from intsig.errors import CurveInputError, ParseError

seeds = st.integers(0, 10_000)


class TestCurve:
    def test_default_params_uniform(self):
        c = Curve(np.zeros((5, 2)) + np.arange(5)[:, None])
        assert np.allclose(c.params, np.linspace(0, 1, 5))

    def test_arrays_are_read_only(self):
        c = Curve(np.random.default_rng(0).normal(size=(4, 3)))
        with pytest.raises(ValueError):
            c.points[0, 0] = 1.0

    @pytest.mark.parametrize(
        "pts", [np.zeros((3, 4)), np.zeros((1, 2)), np.array([[0.0, np.nan], [1.0, 1.0]])]
    )
    def test_invalid_points(self, pts):
        with pytest.raises(CurveInputError):
            Curve(pts)

    def test_params_must_increase(self):
        with pytest.raises(CurveInputError):
            Curve(np.zeros((3, 2)), np.array([0.0, 0.5, 0.5]))

    def test_closed_detection(self):
        assert generate_example("gamma2d", 100).is_closed
        assert not smooth_curve(2, 50, 0).is_closed


class TestAffineMap:
    def test_special_requires_unit_determinant(self):
        with pytest.raises(CurveInputError):
            AffineMap(2 * np.eye(2), kind="special")

    def test_full_rejects_singular(self):
        with pytest.raises(CurveInputError):
            AffineMap(np.array([[1.0, 2.0], [2.0, 4.0]]))

    @given(seeds)
    def test_random_special_maps(self, seed):
        for dim in (2, 3):
            g = random_affine(dim, "special", seed)
            assert g.det == pytest.approx(1.0, abs=1e-9)

    @given(seeds)
    def test_inverse_and_compose(self, seed):
        g = random_affine(3, "full", seed)
        x = np.random.default_rng(seed).normal(size=(10, 3))
        assert np.allclose(g.inverse().apply(g.apply(x)), x)
        assert np.allclose(g.compose(g.inverse()).apply(x), x)

    def test_rotation_kind(self):
        g = random_affine(3, "special_euclidean", 4)
        assert np.allclose(g.linear @ g.linear.T, np.eye(3))

    def test_dimension_mismatch(self):
        with pytest.raises(CurveInputError):
            apply_affine(smooth_curve(2, 10, 0), random_affine(3, "full", 0))


class TestIO:
    def test_csv_round_trip_is_exact(self, tmp_path):
        c = smooth_curve(3, 40, 5)
        save_curve(c, tmp_path / "c.csv")
        d = load_curve(tmp_path / "c.csv")
        assert np.array_equal(c.points, d.points) and np.array_equal(c.params, d.params)

    def test_json_round_trip(self, tmp_path):
        c = Curve(smooth_curve(2, 30, 1).points, label="leaf")
        save_curve(c, tmp_path / "c.json")
        d = load_curve(tmp_path / "c.json")
        assert d.label == "leaf" and np.array_equal(c.points, d.points)

    def test_headerless_csv(self, tmp_path):
        (tmp_path / "c.csv").write_text("0,0\n1,0\n1,1\n")
        assert load_curve(tmp_path / "c.csv").dim == 2

    def test_parse_error_names_row(self, tmp_path):
        (tmp_path / "c.csv").write_text("x,y\n0,0\n1,oops\n")
        with pytest.raises(ParseError, match="row 3"):
            load_curve(tmp_path / "c.csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(CurveInputError):
            load_curve(tmp_path / "nope.csv")

    def test_bad_json(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"dim": 2, "points": [[0, 0, 0]]}))
        with pytest.raises(CurveInputError):
            load_curve(tmp_path / "c.json")


class TestTransforms:
    def test_noise_is_seeded_and_keeps_closure(self):
        c = generate_example("beta3d", 200)
        a, b = add_noise(c, NoiseSpec(0.01, 3)), add_noise(c, NoiseSpec(0.01, 3))
        assert np.array_equal(a.points, b.points) and a.is_closed

    def test_negative_sigma(self):
        with pytest.raises(CurveInputError):
            NoiseSpec(-1.0)

    def test_resample_equal_chords(self):
        c = resample_arclength(generate_example("gamma2d", 500), 120)
        chords = np.linalg.norm(np.diff(c.points, axis=0), axis=1)
        assert len(c) == 120 and chords.max() / chords.min() <= 1 + 1e-6

    def test_identity_warp(self):
        c = smooth_curve(2, 100, 3)
        assert np.allclose(reparameterize(c, "identity").points, c.points)

    def test_warp_keeps_endpoints(self):
        c = smooth_curve(3, 100, 3)
        w = reparameterize(c, "sqrt")
        assert np.array_equal(w.points[[0, -1]], c.points[[0, -1]])

    def test_non_monotone_warp(self):
        with pytest.raises(CurveInputError):
            reparameterize(smooth_curve(2, 50, 0), lambda s: np.sin(3 * s))

    def test_shift_start_inverse(self):
        c = generate_example("gamma2d", 101)
        assert np.allclose(shift_start(shift_start(c, 30), 100 - 30).points, c.points)

    def test_shift_start_needs_closed_curve(self):
        with pytest.raises(CurveInputError):
            shift_start(smooth_curve(2, 50, 0), 3)

    def test_unknown_example(self):
        with pytest.raises(CurveInputError):
            generate_example("delta4d", 10)
