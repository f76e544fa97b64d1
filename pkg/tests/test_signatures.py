import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import smooth_curve
from intsig.curves import Curve, apply_affine, generate_example, random_affine, shift_start
from intsig.errors import CurveInputError, DegenerateGeometryError, PartitionError
from intsig.matching import chamfer, global_signature_distance
from intsig.potentials import potential_table, segment_tables
from intsig.invariants2d import sa2_invariants
from intsig.signatures import (
    _ArcValues,
    equi_affine_partition,
    first_invariant_peak,
    global_signature,
    local_signature,
)

seeds = st.integers(0, 10_000)


class TestGlobal:
    @given(seeds)
    def test_special_affine_invariant(self, seed):
        c = smooth_curve(2, 400, seed)
        g = random_affine(2, "special", seed)
        d = global_signature_distance(global_signature(c), global_signature(apply_affine(c, g)))
        assert d <= 1e-9

    def test_full_affine_normalised(self):
        c = generate_example("beta3d", 1000)
        g = random_affine(3, "full", 11)
        a, b = global_signature(c, "full"), global_signature(apply_affine(c, g), "full")
        assert global_signature_distance(a, b) <= 1e-9

    def test_json_shape(self, curve2):
        doc = json.loads(global_signature(curve2).to_json())
        assert doc["type"] == "global" and len(doc["points"]) == len(curve2)

    def test_euclidean_group_rejected(self, curve2):
        with pytest.raises(CurveInputError):
            global_signature(curve2, "euclidean")


class TestPeak:
    @given(seeds)
    def test_matches_exhaustive_search(self, seed):
        pts = smooth_curve(2, 301, seed, closed=True).points
        period = len(pts) - 1
        ring = np.vstack([pts[:-1], pts[:-1], pts[:1]])
        brute = np.max(np.abs(_ArcValues(ring)(np.arange(period), np.arange(period + 1))))
        assert first_invariant_peak(Curve(pts)) == pytest.approx(brute, rel=1e-12)

    @given(seeds, st.integers(1, 299))
    def test_start_independent_on_closed_curves(self, seed, k):
        c = smooth_curve(3, 301, seed, closed=True)
        assert first_invariant_peak(shift_start(c, k)) == pytest.approx(first_invariant_peak(c), rel=1e-12)


class TestPartition:
    def test_segments_reach_delta(self):
        c = generate_example("gamma2d", 2001)
        part = equi_affine_partition(c, 10_000)
        i1 = sa2_invariants(segment_tables(part.aligned(c), part.offsets))["I1"].values
        assert np.all(np.abs(i1) >= part.delta)
        assert np.all(np.abs(i1) <= part.delta * (1 + part.tol_part) + 1e-15)
        assert np.all(np.diff(part.offsets) > 0) and part.offsets[0] == 0
        assert part.breakpoints[0] == part.anchor and part.offsets[-1] <= part.period

    def test_open_curve_starts_at_first_sample(self, curve2):
        part = equi_affine_partition(curve2, 1000)
        assert part.anchor == 0 and part.period is None
        assert np.array_equal(part.breakpoints, part.offsets)

    def test_count_bounded_by_variation(self):
        c = generate_example("gamma2d", 2001)
        part = equi_affine_partition(c, 10_000)
        i1 = sa2_invariants(potential_table(c))["I1"].values
        assert part.n_segments <= np.sum(np.abs(np.diff(i1))) / part.delta + 1

    @given(seeds)
    def test_special_affine_image_same_breakpoints(self, seed):
        c = generate_example("beta3d", 1500)
        g = random_affine(3, "special", seed)
        a = equi_affine_partition(c, 10**6).breakpoints
        b = equi_affine_partition(apply_affine(c, g), 10**6).breakpoints
        gap = np.abs(a - b) % 1499
        assert len(a) == len(b) and np.max(np.minimum(gap, 1499 - gap)) <= 1

    @given(st.integers(1, 1999))
    def test_shifted_start_same_partition(self, k):
        c = generate_example("gamma2d", 2001)
        a, b = equi_affine_partition(c, 10**5), equi_affine_partition(shift_start(c, k), 10**5)
        assert np.array_equal(a.offsets, b.offsets)
        assert np.array_equal(a.breakpoints, (b.breakpoints + k) % 2000)

    def test_tiny_resolution_fails(self):
        with pytest.raises(PartitionError):
            equi_affine_partition(generate_example("gamma2d", 500), 2)

    def test_invalid_resolution(self):
        with pytest.raises(CurveInputError):
            equi_affine_partition(generate_example("gamma2d", 500), 1)

    def test_degenerate_curve(self):
        line = Curve(np.column_stack([np.linspace(0, 1, 50), np.linspace(0, 1, 50)]))
        with pytest.raises(DegenerateGeometryError):
            equi_affine_partition(line, 100)


class TestLocal:
    def test_one_point_per_segment(self):
        sig = local_signature(generate_example("gamma2d", 2001), 10_000)
        assert len(sig) == sig.partition.n_segments

    def test_start_point_independent(self):
        c = generate_example("gamma2d", 2001)
        a, b = local_signature(c), local_signature(shift_start(c, 740))
        assert chamfer(a.points, b.points) <= 5e-3

    @given(st.integers(1, 1499))
    def test_whole_sample_shift_gives_same_points(self, k):
        c = generate_example("beta3d", 1501)
        a, b = local_signature(c, 10**5), local_signature(shift_start(c, k), 10**5)
        assert np.allclose(a.points, b.points, rtol=1e-9, atol=0)

    def test_full_group_reduces(self):
        c = generate_example("beta3d", 2000)
        g = random_affine(3, "full", 7)
        a = local_signature(c, 10**6, "full")
        b = local_signature(apply_affine(c, g), 10**6, "full")
        assert a.reduced and chamfer(a.points, b.points) <= 1e-6
