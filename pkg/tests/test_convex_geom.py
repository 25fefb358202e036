import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varmeas.convex_geom import (
    DirectionGrid,
    Polytope,
    SupportVector,
    combine_support_vectors,
    default_grid,
    hausdorff,
    minkowski_combine,
    radstrom_embed,
    support,
    support_values,
)

SQUARE = Polytope.box([-1.0, -1.0], [1.0, 1.0])


def random_polytope(rng, dim=2, k=6, scale=2.0):
    return Polytope(dim, rng.uniform(-scale, scale, size=(k, dim)))


class TestSupport:
    def test_square_right_face(self):
        assert support([1.0, 0.0], SQUARE) == pytest.approx(1.0, abs=1e-15)

    def test_singleton_reduces_to_inner_product(self):
        p = Polytope.point([0.5, -2.0])
        u = np.array([0.6, 0.8])
        assert support(u, p) == pytest.approx(0.5 * 0.6 - 2.0 * 0.8, abs=1e-15)

    def test_segment_max_over_two_vertices(self):
        c = Polytope(2, np.array([[0.0, 0.0], [2.0, 1.0]]))
        u = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert support(u, c) == pytest.approx(3.0 / np.sqrt(2.0), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            support([1.0], SQUARE)

    @settings(deadline=None, max_examples=100)
    @given(st.integers(0, 359), st.integers(0, 359), st.floats(0.0, 5.0))
    def test_sublinear_and_positively_homogeneous(self, i, j, lam):
        grid = default_grid(2)
        u, v = grid.dirs[i], grid.dirs[j]
        body = Polytope(2, np.array([[1.0, 0.25], [-0.5, 2.0], [0.0, -1.0]]))
        s_uv = support(u + v, body)
        assert s_uv <= support(u, body) + support(v, body) + 1e-12
        assert support(lam * u, body) == pytest.approx(lam * support(u, body), rel=1e-12,
                                                       abs=1e-12)


class TestGrids:
    def test_dim1_exact_pair(self):
        g = default_grid(1)
        assert g.size == 2 and g.mesh_angle == 0.0
        assert np.array_equal(np.sort(g.dirs[:, 0]), [-1.0, 1.0])

    def test_dim2_mesh_angle(self):
        g = default_grid(2)
        assert g.size == 360
        assert g.mesh_angle == pytest.approx(np.pi / 360)

    def test_dim3_covering_radius_positive(self):
        g = default_grid(3)
        assert g.size == 1000
        assert 0.0 < g.mesh_angle < 0.2

    def test_unit_norm_enforced(self):
        with pytest.raises(ValueError):
            DirectionGrid(2, np.array([[2.0, 0.0]]))


class TestHausdorff:
    def test_interval_formula_exact(self):
        lo, up = hausdorff(Polytope.interval(0, 1), Polytope.interval(0, 2),
                           default_grid(1))
        assert lo == up == pytest.approx(1.0, abs=1e-15)

    def test_identity(self):
        lo, up = hausdorff(SQUARE, SQUARE, default_grid(2))
        assert lo == 0.0

    def test_shifted_square_attained_on_axis(self):
        for t in (0.25, 1.0, 3.0):
            shifted = SQUARE.translated([t, 0.0])
            lo, up = hausdorff(SQUARE, shifted, default_grid(2))
            assert lo == pytest.approx(t, abs=1e-12)  # grid contains (+-1, 0)
            assert up >= t

    def test_bracket_against_dense_oracle(self, rng):
        grid = default_grid(2)
        dense = default_grid(2, 3600)
        for _ in range(25):
            c, d = random_polytope(rng), random_polytope(rng)
            lo, up = hausdorff(c, d, grid)
            oracle = float(np.max(np.abs(support_values(c, dense)
                                         - support_values(d, dense))))
            assert lo <= oracle + 1e-12
            assert oracle <= up + 1e-12

    def test_metric_axioms_dim1(self, rng):
        for _ in range(100):
            a, b, c = (Polytope.interval(*sorted(rng.uniform(-3, 3, size=2)))
                       for _ in range(3))
            g = default_grid(1)
            dab = hausdorff(a, b, g)[0]
            dba = hausdorff(b, a, g)[0]
            assert dab == dba
            assert hausdorff(a, a, g)[0] == 0.0
            assert dab <= hausdorff(a, c, g)[0] + hausdorff(c, b, g)[0] + 1e-12


class TestMinkowski:
    def test_interval_sum(self):
        out = minkowski_combine([1.0, 1.0],
                                [Polytope.interval(0, 1), Polytope.interval(1, 3)])
        assert np.allclose(sorted(out.vertices[:, 0]), [1.0, 4.0])

    def test_zero_coefficient_gives_origin(self):
        out = minkowski_combine([0.0], [SQUARE])
        assert np.allclose(out.vertices, [[0.0, 0.0]])

    def test_halves_of_square_reassemble(self):
        grid = default_grid(2)
        out = minkowski_combine([0.5, 0.5], [SQUARE, SQUARE])
        assert np.allclose(support_values(out, grid), support_values(SQUARE, grid),
                           atol=1e-12)

    def test_support_additivity_random(self, rng):
        grid = default_grid(2)
        c, d = random_polytope(rng), random_polytope(rng)
        lam = (0.7, 1.3)
        out = minkowski_combine(lam, [c, d])
        expect = lam[0] * support_values(c, grid) + lam[1] * support_values(d, grid)
        assert np.allclose(support_values(out, grid), expect, atol=1e-10)

    def test_negative_coefficient_rejected(self):
        with pytest.raises(ValueError):
            minkowski_combine([-1.0], [SQUARE])

    def test_signed_support_vector_combination_flagged(self):
        grid = default_grid(2)
        sv = radstrom_embed(SQUARE, grid)
        out = combine_support_vectors([1.0, -0.5], [sv, sv])
        assert out.from_signed_combination


class TestEmbedding:
    def test_interval_embedding(self):
        sv = radstrom_embed(Polytope.interval(-2.0, 3.0), default_grid(1))
        by_dir = dict(zip(default_grid(1).dirs[:, 0], sv.values))
        assert by_dir[1.0] == 3.0 and by_dir[-1.0] == 2.0

    def test_additive_and_homogeneous_on_grid(self, rng):
        grid = default_grid(2)
        c, d = random_polytope(rng), random_polytope(rng)
        summed = radstrom_embed(minkowski_combine([1.0, 1.0], [c, d]), grid)
        split = radstrom_embed(c, grid) + radstrom_embed(d, grid)
        assert np.allclose(summed.values, split.values, atol=1e-10)
        assert np.allclose(radstrom_embed(c.scaled(2.5), grid).values,
                           2.5 * radstrom_embed(c, grid).values, atol=1e-12)

    def test_isometry_dim1_exact(self):
        g = default_grid(1)
        a, b = Polytope.interval(0, 1), Polytope.interval(0, 2)
        assert radstrom_embed(a, g).sup_distance(radstrom_embed(b, g)) == \
            pytest.approx(hausdorff(a, b, g)[0], abs=1e-15) == pytest.approx(1.0)

    def test_grid_mismatch_guard(self):
        a = radstrom_embed(SQUARE, default_grid(2))
        b = SupportVector(default_grid(2, 90), np.zeros(90))
        with pytest.raises(ValueError):
            a.sup_distance(b)


class TestCanonicalize:
    def test_drops_interior_and_duplicate_vertices(self):
        pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [1, 1]], dtype=float)
        canon = Polytope(2, pts).canonicalize()
        assert canon.vertices.shape[0] == 4

    def test_interval_canonical(self):
        c = Polytope(1, np.array([[0.3], [0.1], [0.9], [0.5]]))
        assert np.allclose(c.canonicalize().vertices[:, 0], [0.1, 0.9])

    def test_collinear_reduces_to_segment(self):
        pts = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
        canon = Polytope(2, pts).canonicalize()
        assert canon.vertices.shape[0] == 2

    def test_dim3_hull(self):
        pts = np.concatenate([np.eye(3), -np.eye(3), [[0.1, 0.1, 0.1]]])
        canon = Polytope(3, pts).canonicalize()
        assert canon.vertices.shape[0] == 6

    def test_json_round_trip(self):
        back = Polytope.from_json(SQUARE.to_json())
        assert np.array_equal(back.vertices, SQUARE.vertices)
