import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import smooth_curve
from intsig.curves import Curve, apply_affine, random_affine, reparameterize
from intsig.errors import CurveInputError
from intsig.invariants3d import invariants_3d
from intsig.matching import (
    ClassificationReport,
    chamfer,
    discrete_frechet,
    global_signature_distance,
    nn_classify,
    trace_distance,
)
from intsig.signatures import SignatureCurve, global_signature

point_sets = st.integers(0, 10_000).map(lambda s: np.random.default_rng(s).normal(size=(30, 2)))


class TestDistances:
    @given(point_sets, point_sets)
    def test_chamfer_metric_properties(self, a, b):
        assert chamfer(a, b) == pytest.approx(chamfer(b, a))
        assert chamfer(a, b) >= 0 and chamfer(a, a) == 0

    @given(point_sets)
    def test_chamfer_order_free(self, a):
        assert chamfer(a, a[::-1]) == 0

    @given(point_sets, point_sets)
    def test_trace_distance_symmetric(self, a, b):
        assert trace_distance(a[:, 0], b[:, 0]) == pytest.approx(trace_distance(b[:, 0], a[:, 0]))
        assert trace_distance(a[:, 0], a[:, 0]) == 0

    def test_trace_distance_ignores_undefined(self):
        assert trace_distance(np.array([1.0, np.nan, 3.0]), np.array([1.0, 5.0, 3.0])) == 0

    def test_trace_distance_needs_overlap(self):
        with pytest.raises(CurveInputError):
            trace_distance(np.array([np.nan]), np.array([1.0]))

    def test_frechet_simple(self):
        a = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        b = np.array([[0.0, 1.0], [2.0, 1.0]])
        assert discrete_frechet(a, b) == pytest.approx(np.sqrt(2))
        assert discrete_frechet(a, a) == 0

    @given(point_sets, point_sets)
    def test_global_distance_symmetric(self, a, b):
        sa, sb = SignatureCurve(a, "special", 2), SignatureCurve(b, "special", 2)
        for method in ("rms", "frechet"):
            d = global_signature_distance(sa, sb, method, k=50)
            assert d == pytest.approx(global_signature_distance(sb, sa, method, k=50)) and d >= 0

    def test_unknown_method(self, curve2):
        s = global_signature(curve2)
        with pytest.raises(CurveInputError):
            global_signature_distance(s, s, "hausdorff")


class TestClassification:
    def test_identical_sets(self):
        items = [(i, np.random.default_rng(i).normal(size=20)) for i in range(5)]
        assert nn_classify(items, items, trace_distance).error_rate == 0

    def test_ties_go_to_lowest_index(self):
        train = [("a", np.zeros(3)), ("b", np.zeros(3))]
        assert nn_classify(train, [("b", np.zeros(3))], trace_distance).predicted == ["a"]

    def test_empty_training_set(self):
        with pytest.raises(CurveInputError):
            nn_classify([], [("a", np.zeros(2))], trace_distance)

    def test_report_json(self):
        rep = ClassificationReport(["a", "b", "a"], ["a", "a", "a"])
        doc = json.loads(rep.to_json())
        assert doc["error_rate"] == pytest.approx(1 / 3)
        assert doc["confusion"] == {"a": {"a": 2, "b": 1}}
        assert len(doc["items"]) == 3

    def test_reparameterised_variants(self):
        # traces are index-aligned and suffer from the warp, signatures do not
        classes = [smooth_curve(3, 600, s, closed=True) for s in range(6)]
        train = [(i, c) for i, c in enumerate(classes)]
        test = []
        for i, c in enumerate(classes):
            for v in range(3):
                g = random_affine(3, "special", 10 * i + v)
                test.append((i, apply_affine(reparameterize(c, "sqrt" if v % 2 else "square"), g)))
        j1 = lambda c: invariants_3d(c)["J1"]
        traces = nn_classify([(i, j1(c)) for i, c in train], [(i, j1(c)) for i, c in test], "trace_l2")
        sigs = nn_classify(
            [(i, global_signature(c)) for i, c in train], [(i, global_signature(c)) for i, c in test], "global_sig"
        )
        assert sigs.error_rate == 0
        assert traces.error_rate > sigs.error_rate
