import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varmeas.measure_core import (
    AtomFunction,
    AtomSpace,
    MeasurableSet,
    SignedMeasure,
    hahn,
    integrate,
    jordan,
    sign_function,
    sup_set_gap,
    sup_set_gap_enumerated,
    total_variation_distance,
    total_variation_enumerated,
)

SP3 = AtomSpace(3)


def meas(*w):
    return SignedMeasure(AtomSpace(len(w)), np.array(w, dtype=float))


def subsets(n):
    space = AtomSpace(n)
    return [MeasurableSet(space, mask) for mask in range(1 << n)]


class TestEval:
    def test_full_space_sum(self):
        m = meas(0.1, 0.2, 0.3)
        assert m.eval(MeasurableSet.full(m.space)) == pytest.approx(0.6, abs=1e-12)

    def test_empty_set(self):
        m = meas(1.0, -3.5, 2.0)
        assert m.eval(MeasurableSet.empty(m.space)) == 0.0

    def test_cancellation(self):
        m = meas(1.0, -1.0)
        assert m.eval(MeasurableSet.full(m.space)) == 0.0

    def test_additive_over_disjoint(self, rng):
        m = meas(*rng.normal(size=5))
        a = MeasurableSet.from_indices(m.space, [0, 2])
        b = MeasurableSet.from_indices(m.space, [1, 4])
        assert m.eval(a.union(b)) == pytest.approx(m.eval(a) + m.eval(b), abs=1e-12)

    def test_space_mismatch(self):
        m = meas(1.0, 2.0)
        with pytest.raises(ValueError):
            m.eval(MeasurableSet.full(AtomSpace(3)))


class TestJordanHahn:
    def test_pointwise_split(self):
        jp = jordan(meas(2.0, -3.0))
        assert np.allclose(jp.pos.weights, [2.0, 0.0])
        assert np.allclose(jp.neg.weights, [0.0, 3.0])

    def test_zero_measure(self):
        jp = jordan(meas(0.0, 0.0))
        assert jp.pos.total_variation() == 0.0
        assert jp.neg.total_variation() == 0.0

    def test_total_variation_by_partition_enumeration(self):
        # |m|(Omega) as the sup over partitions of sum |m(E_i)|
        m = meas(1.0, -1.0, 0.0)
        assert total_variation_enumerated(m) == pytest.approx(2.0, abs=1e-12)
        assert m.total_variation() == pytest.approx(2.0, abs=1e-12)

    def test_hahn_sign_split_with_zero_tie(self):
        hs = hahn(meas(1.0, -1.0, 0.0))
        assert hs.p_set.indices == (0, 2)
        assert hs.n_set.indices == (1,)

    def test_hahn_all_positive(self):
        hs = hahn(meas(0.5, 0.25))
        assert hs.p_set.mask == hs.p_set.space.full_mask
        assert hs.n_set.mask == 0

    def test_hahn_single_negative(self):
        hs = hahn(meas(-5.0))
        assert hs.p_set.mask == 0
        assert hs.n_set.indices == (0,)

    def test_hahn_sign_on_all_subsets(self, rng):
        m = meas(*rng.normal(size=6))
        hs = hahn(m)
        for A in subsets(6):
            p = A.intersection(hs.p_set)
            n = A.intersection(hs.n_set)
            assert m.eval(p) >= -1e-12
            assert m.eval(n) <= 1e-12

    @settings(deadline=None, max_examples=200)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=10))
    def test_jordan_reconstruction_and_minimality(self, w):
        m = meas(*w)
        jp = jordan(m)
        assert np.array_equal(jp.pos.weights - jp.neg.weights, m.weights)
        assert np.array_equal(jp.pos.weights + jp.neg.weights, np.abs(m.weights))
        assert np.all(jp.pos.weights * jp.neg.weights == 0.0)  # disjoint supports


class TestDistances:
    def test_tv_example(self):
        assert total_variation_distance(meas(0.5, 0.5), meas(1.0, 0.0)) == \
            pytest.approx(1.0, abs=1e-12)

    def test_tv_identity(self):
        m = meas(0.3, -0.7, 0.1)
        assert total_variation_distance(m, m) == 0.0

    def test_tv_against_subset_enumeration_oracle(self):
        nu = meas(1.0, -1.0)
        zero = meas(0.0, 0.0)
        assert total_variation_distance(nu, zero) == pytest.approx(2.0, abs=1e-12)
        assert total_variation_enumerated(nu) == pytest.approx(2.0, abs=1e-12)

    def test_sup_set_gap_bruteforce(self):
        # enumerate all 8 subsets by hand as the independent oracle
        m1 = meas(0.5, -0.2, 0.3)
        m2 = meas(0.0, 0.0, 0.0)
        w = m1.weights
        oracle = max(abs(sum(w[i] for i in range(3) if mask >> i & 1))
                     for mask in range(8))
        assert oracle == pytest.approx(0.8, abs=1e-12)
        assert sup_set_gap(m1, m2) == pytest.approx(0.8, abs=1e-12)
        value, witness = sup_set_gap_enumerated(m1, m2)
        assert value == pytest.approx(0.8, abs=1e-12)
        assert abs(m1.eval(witness) - m2.eval(witness)) == pytest.approx(0.8, abs=1e-12)

    def test_sup_set_gap_identity_and_nonneg(self, rng):
        m = meas(*rng.uniform(0, 1, size=4))
        assert sup_set_gap(m, m) == 0.0
        zero = SignedMeasure(m.space, np.zeros(4))
        assert sup_set_gap(m, zero) == pytest.approx(float(m.weights.sum()), abs=1e-12)

    @settings(deadline=None, max_examples=200)
    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=8),
           st.lists(st.floats(-100, 100), min_size=1, max_size=8))
    def test_gap_tv_sandwich(self, w1, w2):
        n = min(len(w1), len(w2))
        m1, m2 = meas(*w1[:n]), meas(*w2[:n])
        gap = sup_set_gap(m1, m2)
        tv = total_variation_distance(m1, m2)
        assert gap <= tv + 1e-9
        assert tv <= 2.0 * gap + 1e-9


class TestIntegrate:
    def test_arithmetic_example(self):
        f = AtomFunction(SP3, np.array([1.0, 2.0, 3.0]))
        m = meas(0.1, 0.2, 0.3)
        assert integrate(f, m) == pytest.approx(1.4, abs=1e-12)

    def test_indicator_identity(self, rng):
        m = meas(*rng.normal(size=4))
        one = AtomFunction(m.space, np.ones(4))
        for A in subsets(4):
            assert integrate(one, m, A) == pytest.approx(m.eval(A), abs=1e-12)

    def test_variation_chain_on_random_instances(self, rng):
        # |int_E f dnu| <= int_E |f| d|nu| <= int_E |f| dm_n + int_E |f| dm
        for _ in range(50):
            mn = meas(*rng.uniform(0, 2, size=5))
            m = meas(*rng.uniform(0, 2, size=5))
            nu = mn - m
            f = AtomFunction(mn.space, rng.normal(size=5))
            for A in subsets(5):
                lhs = abs(integrate(f, nu, A))
                mid = integrate(f.abs(), nu.abs(), A)
                rhs = integrate(f.abs(), mn, A) + integrate(f.abs(), m, A)
                assert lhs <= mid + 1e-12
                assert mid <= rhs + 1e-12

    def test_signed_linearity_exact(self, rng):
        m1 = meas(*rng.normal(size=6))
        m2 = meas(*rng.normal(size=6))
        f = AtomFunction(m1.space, rng.normal(size=6))
        A = MeasurableSet.from_indices(m1.space, [0, 3, 5])
        assert integrate(f, m1 - m2, A) == pytest.approx(
            integrate(f, m1, A) - integrate(f, m2, A), abs=1e-12)

    def test_vector_case(self):
        f = AtomFunction(SP3, np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
        m = meas(0.5, 0.25, 0.25)
        out = integrate(f, m)
        assert np.allclose(out, [0.75, 0.5], atol=1e-12)

    def test_dimension_mismatch(self):
        f = AtomFunction(SP3, np.ones(3))
        with pytest.raises(ValueError):
            integrate(f, meas(1.0, 2.0))


class TestSectionTwoInequalities:
    def test_remark_nota_bounds(self, rng):
        # nu = m_n - m with both nonnegative: nu+ <= m_n, nu- <= m on all sets
        for _ in range(50):
            mn = meas(*rng.uniform(0, 3, size=6))
            m = meas(*rng.uniform(0, 3, size=6))
            jp = jordan(mn - m)
            for A in subsets(6):
                assert jp.pos.eval(A) <= mn.eval(A) + 1e-12
                assert jp.neg.eval(A) <= m.eval(A) + 1e-12

    def test_jordan_part_gap_chain_signed(self, rng):
        # m_n+(E) - m+(E) <= (m_n - m)+(E) and |m_n+(E) - m+(E)| <= |m_n - m|(E)
        for _ in range(50):
            mn = meas(*rng.normal(size=5))
            m = meas(*rng.normal(size=5))
            jn, jm, jd = jordan(mn), jordan(m), jordan(mn - m)
            absd = (mn - m).abs()
            for A in subsets(5):
                assert jn.pos.eval(A) - jm.pos.eval(A) <= jd.pos.eval(A) + 1e-12
                assert abs(jn.pos.eval(A) - jm.pos.eval(A)) <= absd.eval(A) + 1e-12
                assert jn.neg.eval(A) - jm.neg.eval(A) <= jd.neg.eval(A) + 1e-12
                assert abs(jn.neg.eval(A) - jm.neg.eval(A)) <= absd.eval(A) + 1e-12


class TestSimpleFunctionDuality:
    def test_sign_function_attains_tv(self, rng):
        m1 = meas(*rng.normal(size=6))
        m2 = meas(*rng.normal(size=6))
        nu = m1 - m2
        s = sign_function(nu)
        assert integrate(s, nu) == pytest.approx(
            total_variation_distance(m1, m2), abs=1e-12)

    def test_bounded_functions_stay_below_tv(self, rng):
        m1 = meas(*rng.normal(size=6))
        m2 = meas(*rng.normal(size=6))
        tv = total_variation_distance(m1, m2)
        for _ in range(100):
            f = AtomFunction(m1.space, rng.uniform(-1, 1, size=6))
            assert abs(integrate(f, m1) - integrate(f, m2)) <= tv + 1e-12


class TestSerialization:
    def test_measure_round_trip(self):
        m = meas(0.5, -0.25, 0.125)
        back = SignedMeasure.from_json(m.to_json())
        assert np.array_equal(back.weights, m.weights)

    def test_set_encoding_sorted_indices(self):
        A = MeasurableSet.from_indices(AtomSpace(5), [4, 0, 2])
        assert A.to_json() == [0, 2, 4]

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            meas(np.inf, 1.0)
