import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksenergy import make_space, verify_metric_axioms
from ksenergy.errors import ConfigError, InvalidPointError

TAU = 2 * math.pi

finite2 = st.tuples(st.floats(-3, 3), st.floats(-3, 3))


class TestDistances:
    def test_max_norm_example(self):
        mn = make_space("max_norm_plane")
        assert mn.distance([0.0, 0.0], [1.0, 2.0]) == 2.0

    def test_euclidean_pythagorean(self):
        assert make_space("euclidean:2").distance([0, 0], [3, 4]) == 5.0

    def test_circle_wraparound(self):
        c = make_space("circle")
        assert c.distance([0.0], [3 * math.pi / 2]) == pytest.approx(math.pi / 2, abs=1e-15)
        assert c.distance([0.1], [TAU - 0.1]) == pytest.approx(0.2, abs=1e-12)

    def test_q_points_matching(self):
        q = make_space("q:2:1")
        # pairing {0, 1} vs {1.2, 0.1}: best matching is (0->0.1, 1->1.2)
        d = q.distance([0.0, 1.0], [1.2, 0.1])
        assert d == pytest.approx(math.hypot(0.1, 0.2), abs=1e-14)

    def test_q_points_permutation_invariance_exact(self):
        q = make_space("q:2:2")
        a = np.array([0.3, -0.7, 1.5, 0.2])
        a_swapped = np.array([1.5, 0.2, 0.3, -0.7])
        b = np.array([-0.5, 0.1, 0.9, 0.9])
        assert q.distance(a, b) == q.distance(a_swapped, b)
        assert q.distance(b, a) == q.distance(b, a_swapped)

    @settings(max_examples=50, deadline=None)
    @given(a1=finite2, a2=finite2, b1=finite2, b2=finite2)
    def test_q_points_brute_force_oracle(self, a1, a2, b1, b2):
        """Matching distance equals the explicit min over both pairings."""
        q = make_space("q:2:2")
        a = np.array(a1 + a2)
        b = np.array(b1 + b2)
        d_id = math.sqrt(
            sum((x - y) ** 2 for x, y in zip(a1, b1)) + sum((x - y) ** 2 for x, y in zip(a2, b2))
        )
        d_sw = math.sqrt(
            sum((x - y) ** 2 for x, y in zip(a1, b2)) + sum((x - y) ** 2 for x, y in zip(a2, b1))
        )
        assert q.distance(a, b) == pytest.approx(min(d_id, d_sw), abs=1e-12)

    def test_dimension_mismatch_raises(self):
        with pytest.raises(InvalidPointError):
            make_space("euclidean:2").validate_point([1.0, 2.0, 3.0])
        with pytest.raises(InvalidPointError):
            make_space("euclidean:2").validate_point([np.nan, 0.0])


class TestDenseEnumeration:
    def test_euclidean1_starts_at_origin(self):
        assert make_space("euclidean:1").dense_point(0) == pytest.approx([0.0])

    def test_circle_first_four(self):
        pts = make_space("circle").dense_points(4).ravel()
        assert pts == pytest.approx([0.0, math.pi, math.pi / 2, 3 * math.pi / 2], abs=1e-15)

    def test_enumeration_deterministic(self):
        a = make_space("euclidean:2").dense_points(600)
        b = make_space("euclidean:2").dense_points(600)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("spec,count", [("euclidean:2", 2048), ("euclidean:1", 512),
                                            ("circle", 512), ("q:2:1", 512), ("max_norm_plane", 1024)])
    def test_enumeration_injective(self, spec, count):
        pts = make_space(spec).dense_points(count)
        assert len(np.unique(pts, axis=0)) == count

    def test_covering_radius_10k_points(self):
        """First 10^4 plane points cover [-1,1]^2 within 0.05."""
        pts = make_space("euclidean:2").dense_points(10_000)
        side = np.linspace(-1.0, 1.0, 161)
        scan = np.stack(np.meshgrid(side, side, indexing="ij"), axis=-1).reshape(-1, 2)
        from scipy.spatial import cKDTree

        worst = cKDTree(pts).query(scan)[0].max()
        cell_halfdiag = math.sqrt(2) * (2.0 / 160.0) / 2.0
        assert worst + cell_halfdiag <= 0.05

    def test_covering_radius_shrinks(self):
        space = make_space("euclidean:2")
        from scipy.spatial import cKDTree

        side = np.linspace(-1.0, 1.0, 81)
        scan = np.stack(np.meshgrid(side, side, indexing="ij"), axis=-1).reshape(-1, 2)
        radii = [cKDTree(space.dense_points(k)).query(scan)[0].max() for k in (100, 1000, 10000)]
        assert radii[0] > radii[1] > radii[2]

    def test_circle_prefix_is_fine(self):
        pts = np.sort(make_space("circle").dense_points(64).ravel())
        gaps = np.diff(np.concatenate([pts, [TAU + pts[0]]]))
        assert gaps.max() <= TAU / 64 + 1e-12

    def test_snap_lands_on_dyadic_lattice(self):
        for spec in ("euclidean:2", "max_norm_plane", "q:2:1"):
            space = make_space(spec)
            rng = np.random.default_rng(0)
            x = space.sample_points(50, rng)
            snapped = space.snap(x, 7)
            assert np.allclose(snapped * 2**7, np.round(snapped * 2**7), atol=1e-9)
            assert np.max(np.abs(snapped - space.canonical(x))) <= 2.0**-7

    def test_snap_circle_stays_dyadic_angle(self):
        c = make_space("circle")
        snapped = c.snap(np.array([[1.234], [6.1], [0.01]]), 6)
        frac = snapped / TAU * 2**6
        assert np.allclose(frac, np.round(frac), atol=1e-9)


class TestAxioms:
    @pytest.mark.parametrize("spec", ["euclidean:3", "max_norm_plane", "circle", "q:2:2"])
    def test_no_violations_on_1000_triples(self, spec):
        report = verify_metric_axioms(make_space(spec), 1000, seed=42)
        assert report.total_violations == 0

    def test_requires_positive_samples(self):
        with pytest.raises(ConfigError):
            verify_metric_axioms(make_space("circle"), 0, seed=0)


def test_make_space_errors():
    for bad in ("euclidean", "euclidean:x", "q:2", "torus", "q:9:1"):
        with pytest.raises(ConfigError):
            make_space(bad)
