import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import brute
from bmotrees import OmegaPoint, in_omega, segment_goodness, select_removable


def strip_point(rng, eps, span=2.0):
    x1 = rng.uniform(-span, span)
    return OmegaPoint(x1, x1 * x1 + eps * eps * rng.uniform())


class TestInOmega:
    def test_lower_boundary(self):
        assert in_omega(OmegaPoint(0.0, 0.0), 1.0)

    def test_upper_boundary(self):
        assert in_omega(OmegaPoint(0.0, 1.0), 1.0)

    def test_just_above(self):
        assert not in_omega(OmegaPoint(0.0, 1.01), 1.0, tol=0.0)

    def test_tolerance_band(self):
        assert in_omega(OmegaPoint(0.0, 1.0 + 1e-13), 1.0, tol=1e-12)
        assert in_omega(OmegaPoint(0.0, -1e-13), 1.0, tol=1e-12)

    def test_vectorized(self):
        x1 = np.array([0.0, 1.0, 0.0])
        x2 = np.array([0.5, 1.0, 1.5])
        assert list(in_omega(OmegaPoint(x1, x2), 1.0)) == [True, True, False]


class TestSelectRemovable:
    def test_identical_points(self):
        j = select_removable([0.5, 0.5], [OmegaPoint(0, 0.5), OmegaPoint(0, 0.5)], 1.0)
        assert j == 0

    def test_three_points(self):
        # combination (0, 1) sits on the upper boundary; removing the first
        # point leaves (0.5, 0.75), still inside
        points = [OmegaPoint(-1, 1.5), OmegaPoint(0, 0), OmegaPoint(1, 1.5)]
        weights = [1 / 3, 1 / 3, 1 / 3]
        j = select_removable(weights, points, 1.0)
        assert j == brute.removable_indices(weights, points, 1.0)[0]

    def test_randomized_against_oracle(self):
        rng = np.random.default_rng(42)
        eps = 1.0
        done = 0
        while done < 2000:
            n = int(rng.integers(2, 9))
            pts = [strip_point(rng, eps) for _ in range(n)]
            w = rng.dirichlet(np.ones(n))
            cx = sum(wi * p.x1 for wi, p in zip(w, pts))
            cy = sum(wi * p.x2 for wi, p in zip(w, pts))
            if not brute.in_strip(cx, cy, eps):
                continue
            done += 1
            j = select_removable(w, pts, eps)
            qualifying = brute.removable_indices(w, pts, eps)
            assert qualifying, "oracle found no index, contradicting the lemma"
            assert j == qualifying[0]

    def test_rejects_combination_outside(self):
        pts = [OmegaPoint(-1, 1.9), OmegaPoint(1, 1.9)]
        with pytest.raises(ValueError, match="combination"):
            select_removable([0.5, 0.5], pts, 1.0)

    def test_rejects_bad_weights(self):
        pts = [OmegaPoint(0, 0.5), OmegaPoint(0, 0.5)]
        with pytest.raises(ValueError):
            select_removable([0.7, 0.7], pts, 1.0)
        with pytest.raises(ValueError):
            select_removable([1.0, 0.0], pts, 1.0)

    def test_rejects_single_point(self):
        with pytest.raises(ValueError):
            select_removable([1.0], [OmegaPoint(0, 0.5)], 1.0)


class TestSegmentGoodness:
    def test_fully_inside(self):
        g = segment_goodness(OmegaPoint(0, 0.2), OmegaPoint(0.1, 0.3), 1.0)
        assert g.outside_length == 0.0
        assert g.alpha_max == 1.0

    def test_parabola_chord_stays_inside(self):
        # q(t) = 2t - 2t^2 tops out at 1/2 < 1
        g = segment_goodness(OmegaPoint(0, 0), OmegaPoint(math.sqrt(2), 2), 1.0)
        assert g.alpha_max == 1.0

    def test_vertical_segment(self):
        g = segment_goodness(OmegaPoint(0.3, 0.09), OmegaPoint(0.3, 1.0), 1.0)
        assert g.outside_length == 0.0
        assert g.alpha_max == 1.0
        assert g.total_length == pytest.approx(0.91)

    def test_known_exit_fraction(self):
        # (0,1) to (sqrt(2),2): q(t) = 1 + t - 2t^2 > 1 exactly on (0, 1/2)
        g = segment_goodness(OmegaPoint(0, 1), OmegaPoint(math.sqrt(2), 2), 1.0)
        assert abs(g.alpha_max - 0.5) < 1e-15

    def test_against_sampling_oracle(self):
        rng = np.random.default_rng(11)
        eps = 0.8
        for _ in range(5):
            p = strip_point(rng, eps)
            r = strip_point(rng, eps)
            g = segment_goodness(p, r, eps)
            frac = brute.sampled_outside_fraction_np(p, r, eps, samples=10**6)
            assert abs((1.0 - g.alpha_max) - frac) <= 1e-6

    def test_small_eps_oracle(self):
        # tight strip relative to the chord height
        eps = 0.05
        p = OmegaPoint(-0.4, 0.16 + eps**2)
        r = OmegaPoint(0.4, 0.16 + eps**2)
        g = segment_goodness(p, r, eps)
        frac = brute.sampled_outside_fraction_np(p, r, eps, samples=10**6)
        assert abs((1.0 - g.alpha_max) - frac) <= 1e-6
        assert g.alpha_max < 0.2

    @settings(max_examples=200, deadline=None)
    @given(
        a=st.floats(-2, 2),
        b=st.floats(-2, 2),
        u=st.floats(0, 1),
        v=st.floats(0, 1),
    )
    def test_symmetry(self, a, b, u, v):
        eps = 1.0
        p = OmegaPoint(a, a * a + u * eps * eps)
        r = OmegaPoint(b, b * b + v * eps * eps)
        if p.x1 == r.x1 and p.x2 == r.x2:
            return
        g1 = segment_goodness(p, r, eps)
        g2 = segment_goodness(r, p, eps)
        assert abs(g1.alpha_max - g2.alpha_max) <= 1e-12

    def test_continuity_under_perturbation(self):
        # transversal crossings: a 1e-8 endpoint shift moves alpha_max by well
        # under 1e-6
        p = OmegaPoint(0.0, 1.0)
        r = OmegaPoint(math.sqrt(2), 2.0)
        base = segment_goodness(p, r, 1.0).alpha_max
        for dx in (-1e-8, 1e-8):
            for dy in (-1e-8, 1e-8):
                moved = segment_goodness(
                    OmegaPoint(p.x1 + dx, p.x2 + dy), r, 1.0
                ).alpha_max
                assert abs(moved - base) <= 1e-6

    def test_coincident_endpoints_rejected(self):
        with pytest.raises(ValueError, match="coincide"):
            segment_goodness(OmegaPoint(0, 0.5), OmegaPoint(0, 0.5), 1.0)

    def test_outside_endpoint_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            segment_goodness(OmegaPoint(0, 1.5), OmegaPoint(0, 0.5), 1.0)

    def test_boundary_tangent_chord(self):
        # horizontal chord touching the upper boundary at its midpoint only
        s2 = math.sqrt(2)
        g = segment_goodness(OmegaPoint(s2 / 2, 1.0), OmegaPoint(-s2 / 2, 1.0), 1.0)
        assert g.alpha_max == 1.0
        assert g.outside_length == 0.0
