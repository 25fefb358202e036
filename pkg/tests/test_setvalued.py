import numpy as np
import pytest

from varmeas.convex_geom import Polytope, default_grid, radstrom_embed, support_values
from varmeas.families import (
    constant_function_family,
    constant_measure_family,
    convex_mix,
    function_mix,
    power_cert,
    rademacher_family,
    MeasureFamily,
)
from varmeas.integrability import check_uac, vitali_limit
from varmeas.measure_core import (
    AtomFunction,
    AtomSpace,
    MeasurableSet,
    SignedMeasure,
    integrate,
)
from varmeas.reports import FAILS, HOLDS, HYPOTHESIS_FAILED, PASS
from varmeas.setvalued_integral import (
    MultiMap,
    SetIntegral,
    check_equiconvergence,
    check_thmulti,
    check_thmulti2,
    check_uac_scalar,
    constant_multi_family,
    direction_gap_curve,
    multi_mass_escape,
    pettis_body,
    pettis_integral,
    scalar_integrand,
    scaled_multi_family,
    singleton_multi_family,
    supset_gap_curve,
    supset_gap_enumerated,
)

SP2 = AtomSpace(2)
SP4 = AtomSpace(4)


def meas(*w):
    return SignedMeasure(AtomSpace(len(w)), np.array(w, dtype=float))


def box_bodies(space, dim=2):
    base = Polytope.box([-1.0] * dim, [1.0] * dim)
    return tuple(base.translated([0.25 * i] + [0.0] * (dim - 1))
                 for i in range(space.n_atoms))


def mix4():
    m = meas(0.4, 0.1, 0.3, 0.2)
    mu = meas(0.2, 0.3, 0.1, 0.4)
    return convex_mix(m, mu, power_cert(1.0))


class TestScalarIntegrand:
    def test_constant_map(self):
        G = MultiMap.constant(SP4, Polytope.box([-1, -1], [1, 1]))
        u = np.array([0.0, 1.0])
        f = scalar_integrand(u, G)
        assert np.allclose(f.values, 1.0)

    def test_singleton_reduces_to_inner_product(self, rng):
        pts = rng.normal(size=(4, 2))
        G = MultiMap.from_points(SP4, pts)
        u = np.array([0.6, -0.8])
        f = scalar_integrand(u, G)
        assert np.allclose(f.values, pts @ u, atol=1e-15)

    def test_interval_endpoints(self):
        G = MultiMap(SP2, 1, (Polytope.interval(0, 1), Polytope.interval(1, 3)))
        f = scalar_integrand(np.array([1.0]), G)
        assert np.allclose(f.values, [1.0, 3.0])


class TestPettisIntegral:
    def test_constant_map_scales_embedding(self):
        grid = default_grid(2)
        body = Polytope.box([0, 0], [1, 1])
        G = MultiMap.constant(SP4, body)
        m = meas(0.25, 0.25, 0.25, 0.25)  # total mass one
        sv = pettis_integral(G, m, None, grid)
        assert np.allclose(sv.values, support_values(body, grid), atol=1e-12)

    def test_interval_example(self):
        G = MultiMap(SP2, 1, (Polytope.interval(0, 1), Polytope.interval(1, 3)))
        sv = pettis_integral(G, meas(0.5, 0.5), None, default_grid(1))
        by_dir = dict(zip(default_grid(1).dirs[:, 0], sv.values))
        assert by_dir[1.0] == pytest.approx(2.0, abs=1e-15)   # s(+1) = .5*1 + .5*3
        assert by_dir[-1.0] == pytest.approx(-0.5, abs=1e-15)  # body is [0.5, 2]
        body = pettis_body(G, meas(0.5, 0.5))
        assert np.allclose(sorted(body.vertices[:, 0]), [0.5, 2.0], atol=1e-15)

    def test_empty_set_gives_origin(self):
        G = MultiMap.constant(SP2, Polytope.box([-1, -1], [1, 1]))
        sv = pettis_integral(G, meas(0.5, 0.5), MeasurableSet.empty(SP2),
                             default_grid(2))
        assert np.allclose(sv.values, 0.0)

    def test_negative_measure_rejected(self):
        G = MultiMap.constant(SP2, Polytope.box([-1, -1], [1, 1]))
        with pytest.raises(ValueError):
            pettis_integral(G, meas(0.5, -0.5), None, default_grid(2))

    def test_set_additivity(self, rng):
        G = MultiMap(SP4, 2, box_bodies(SP4))
        m = meas(*rng.uniform(0, 1, size=4))
        integral = SetIntegral(G, m)
        A = MeasurableSet.from_indices(SP4, [0, 1])
        B = MeasurableSet.from_indices(SP4, [2, 3])
        lhs = integral.at(A.union(B))
        rhs = integral.at(A) + integral.at(B)
        assert np.allclose(lhs.values, rhs.values, atol=1e-12)

    def test_defining_identity_per_direction(self, rng):
        G = MultiMap(SP4, 2, box_bodies(SP4))
        m = meas(*rng.uniform(0, 1, size=4))
        grid = default_grid(2)
        A = MeasurableSet.from_indices(SP4, [1, 3])
        sv = pettis_integral(G, m, A, grid)
        for j in (0, 45, 170, 359):
            u = grid.dirs[j]
            assert sv.values[j] == pytest.approx(
                integrate(scalar_integrand(u, G), m, A), abs=1e-12)

    def test_singleton_reduction_matches_vector_integral(self, rng):
        pts = rng.normal(size=(4, 2))
        G = MultiMap.from_points(SP4, pts)
        m = meas(*rng.uniform(0, 1, size=4))
        grid = default_grid(2)
        A = MeasurableSet.from_indices(SP4, [0, 2, 3])
        sv = pettis_integral(G, m, A, grid)
        vec = integrate(AtomFunction(SP4, pts), m, A)
        assert np.allclose(sv.values, radstrom_embed(Polytope.point(vec), grid).values,
                           atol=1e-12)


class TestUacScalar:
    def test_bounded_bodies_hold(self):
        MF = constant_multi_family(MultiMap(SP4, 2, box_bodies(SP4)))
        cert = check_uac_scalar(MF, mix4(), 0.01, horizon=32)
        assert cert.holds

    def test_escaping_radius_fails_with_direction_witness(self):
        GF, mf = multi_mass_escape(SP4)
        cert = check_uac_scalar(GF, mf, 0.5, horizon=32)
        assert cert.verdict == FAILS
        assert "direction_index" in cert.witness

    def test_singleton_agrees_with_scalar_check(self, rng):
        pts = rng.normal(size=(4, 1))
        ff = constant_function_family(AtomFunction(SP4, pts[:, 0]))
        MF = singleton_multi_family(
            function_mix(AtomFunction(SP4, pts), AtomFunction(SP4, 0 * pts),
                         power_cert(1.0)))
        mf = mix4()
        scalar = check_uac(ff, mf, 0.01, horizon=32)
        multi = check_uac_scalar(MF, mf, 0.01, horizon=32)
        assert scalar.holds and multi.holds


class TestEquiconvergence:
    def test_constant_family_zero_curves(self):
        MF = constant_multi_family(MultiMap(SP4, 2, box_bodies(SP4)))
        verdict, curves = check_equiconvergence(MF, mix4(), horizon=16)
        assert verdict == HOLDS
        assert all(v == 0.0 for curve in curves.values() for _, v in curve)

    def test_scaled_family_certified(self):
        MF = scaled_multi_family(MultiMap(SP4, 2, box_bodies(SP4)), power_cert(1.0))
        verdict, curves = check_equiconvergence(MF, mix4(), horizon=32)
        assert verdict == HOLDS
        # support gap <= R/n empties the small-delta sets once n > R/delta
        for delta, curve in curves.items():
            for n, v in curve:
                if MF.support_gap_cert.bound(n) <= delta:
                    assert v == 0.0

    def test_fixed_atom_defect_fails(self):
        bodies = box_bodies(SP4)
        shifted = tuple(b.translated([3.0, 0.0]) for b in bodies)

        def at(n):
            return MultiMap(SP4, 2, (shifted[0],) + bodies[1:])

        MF = type(constant_multi_family(MultiMap(SP4, 2, bodies)))(
            SP4, 2, at, MultiMap(SP4, 2, bodies), name="defect")
        mf = constant_measure_family(meas(0.25, 0.25, 0.25, 0.25))
        verdict, curves = check_equiconvergence(MF, mf, horizon=16)
        assert verdict == FAILS
        assert curves[1e-1][-1][1] >= 0.25  # the defect atom has fixed mass


class TestThmulti:
    def test_constant_bodies_convex_mix_passes(self):
        MF = constant_multi_family(MultiMap(SP4, 2, box_bodies(SP4)))
        rep = check_thmulti(MF, mix4(), horizon=64)
        assert rep.verdict == PASS
        assert rep.meta["specializes"].startswith("th3")
        r = max(b.radius() for b in box_bodies(SP4))
        for n, gap in rep.curve:
            assert gap <= r * mix4().tv_cert.bound(int(n)) + 1e-12

    def test_identity_family_zero_gap(self):
        MF = constant_multi_family(MultiMap(SP4, 2, box_bodies(SP4)))
        mf = constant_measure_family(meas(0.25, 0.25, 0.25, 0.25))
        rep = check_thmulti(MF, mf, horizon=16)
        assert rep.verdict == PASS and rep.final_gap == 0.0

    def test_multivalued_mass_escape_rejected(self):
        GF, mf = multi_mass_escape(SP4)
        rep = check_thmulti(GF, mf, horizon=32)
        assert rep.verdict == HYPOTHESIS_FAILED

    def test_singleton_marks_vector_specialization(self, rng):
        f = AtomFunction(SP4, rng.normal(size=(4, 2)))
        g = AtomFunction(SP4, rng.normal(size=(4, 2)))
        MF = singleton_multi_family(function_mix(f, g, power_cert(1.0)))
        rep = check_thmulti(MF, mix4(), horizon=64, theorem_id="th2v")
        assert rep.verdict == PASS
        assert rep.theorem_id == "th2v"


class TestThmulti2:
    def test_scaling_family_uniform_bound(self):
        bodies = box_bodies(SP4)
        MF = scaled_multi_family(MultiMap(SP4, 2, bodies), power_cert(1.0))
        mf = mix4()
        rep = check_thmulti2(MF, mf, horizon=128)
        assert rep.verdict == PASS
        assert rep.meta["exhaustive_sets"]

    def test_closed_form_matches_enumerated_oracle(self):
        MF = scaled_multi_family(MultiMap(SP4, 2, box_bodies(SP4)), power_cert(1.0))
        mf = mix4()
        curve = dict(supset_gap_curve(MF, mf, 16))
        for n in (1, 5, 16):
            assert curve[n] == pytest.approx(supset_gap_enumerated(MF, mf, n), abs=1e-12)

    def test_oscillating_measures_fail_tv_hypothesis(self):
        fam = rademacher_family(3)
        base = SignedMeasure(fam.space, np.full(8, 1.0 / 8))
        shifted = MeasureFamily(fam.space, lambda n: base + fam.at(n), base,
                                nonneg=True, mass_bound=2.0, name="oscillating")
        MF = constant_multi_family(MultiMap.constant(fam.space,
                                                     Polytope.interval(0.0, 1.0)))
        rep = check_thmulti2(MF, shifted, horizon=16)
        assert rep.verdict == HYPOTHESIS_FAILED
        jv = [h for h in rep.hypothesis_results if h.label.endswith("jv-tv")][0]
        assert jv.verdict == FAILS

    def test_atom_gate_needs_declared_sets(self):
        space = AtomSpace(13)
        bodies = tuple(Polytope.interval(0, 1) for _ in range(13))
        MF = constant_multi_family(MultiMap(space, 1, bodies))
        mf = constant_measure_family(SignedMeasure(space, np.full(13, 1.0 / 13)))
        with pytest.raises(ValueError):
            check_thmulti2(MF, mf, horizon=8)
        rep = check_thmulti2(MF, mf, horizon=8,
                             test_sets=[MeasurableSet.from_indices(space, [0, 5])])
        assert rep.verdict == PASS

    def test_singleton_reduction_is_th1m(self, rng):
        f = AtomFunction(SP4, rng.normal(size=(4, 2)))
        g = AtomFunction(SP4, rng.normal(size=(4, 2)))
        MF = singleton_multi_family(function_mix(f, g, power_cert(1.0)))
        rep = check_thmulti2(MF, mix4(), horizon=64, theorem_id="th1m")
        assert rep.verdict == PASS
        assert "th1m" in rep.meta["specializes"]


class TestSerialization:
    def test_multimap_round_trip(self):
        G = MultiMap(SP4, 2, box_bodies(SP4))
        back = MultiMap.from_json(G.to_json())
        assert back.dim == 2 and back.space.n_atoms == 4
        for a, b in zip(back.bodies, G.bodies):
            assert np.array_equal(a.vertices, b.vertices)

    def test_support_vector_carries_grid_id(self):
        grid = default_grid(2)
        sv = pettis_integral(MultiMap(SP4, 2, box_bodies(SP4)),
                             meas(0.25, 0.25, 0.25, 0.25), None, grid)
        encoded = sv.to_json()
        assert encoded["grid"] == grid.grid_id
        assert len(encoded["values"]) == grid.size


class TestCrossModuleConsistency:
    def test_direction_curve_equals_scalar_vitali_curve(self):
        # the same finite sums through two independent code paths
        MF = scaled_multi_family(MultiMap(SP4, 2, box_bodies(SP4)), power_cert(1.0))
        mf = mix4()
        grid = default_grid(2)
        A = MeasurableSet.from_indices(SP4, [0, 2])
        horizon = 32
        for j in (0, 90, 200):
            u = grid.dirs[j]
            multi_curve = direction_gap_curve(MF, mf, u, A, horizon)

            def f_at(n, _u=u):
                return scalar_integrand(_u, MF.at(n))

            from varmeas.families import FunctionFamily

            ff = FunctionFamily(SP4, f_at, scalar_integrand(u, MF.limit),
                                name="scalarized")
            scalar_rep = vitali_limit(ff, mf, A=A, tol=1e9, horizon=horizon)
            for (n1, g1), (n2, g2) in zip(multi_curve, scalar_rep.curve):
                assert n1 == n2
                assert g1 == pytest.approx(g2, abs=1e-12)
