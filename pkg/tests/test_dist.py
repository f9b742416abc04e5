import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ahg.dist import (
    ModelPoint,
    covariance,
    format_rational,
    generalized_odds,
    moment_map,
    normalizing_constant,
    parse_rational,
    probability,
    summarize,
)
from ahg.errors import EmptyFiber, FiberTooLarge, NotInFiber
from ahg.fiber import enumerate_fiber
from ahg.linalg import ConfigMatrix, gale_transform, two_way_configuration, two_way_margins

SMALL = ConfigMatrix([[1, 1, 1], [0, 1, 2]])

FAMILY = [
    SMALL,
    two_way_configuration(2, 2),
    two_way_configuration(2, 3),
    ConfigMatrix([[1, 1, 1, 1], [0, 1, 2, 3]]),
    ConfigMatrix([[1, 1, 1, 1, 1], [0, 1, 0, 2, 1], [0, 0, 1, 0, 1]]),
]

rationals = st.builds(Fraction, st.integers(1, 9), st.integers(1, 9))


@st.composite
def instances(draw):
    A = draw(st.sampled_from(FAMILY))
    u = draw(st.lists(st.integers(0, 3), min_size=A.n, max_size=A.n))
    p = draw(st.lists(rationals, min_size=A.n, max_size=A.n))
    return A, A.apply(u), ModelPoint(p), tuple(u)


class TestGoldens:
    def test_small_Z(self):
        assert normalizing_constant(SMALL, (4, 3), ModelPoint([1, 1, 1])) == Fraction(2, 3)

    def test_zero_beta(self):
        assert normalizing_constant(SMALL, (0, 0), ModelPoint([3, 5, 7])) == 1

    def test_probability(self):
        assert probability(SMALL, (4, 3), ModelPoint([1, 1, 1]), (2, 1, 1)) == Fraction(3, 4)
        assert probability(SMALL, (0, 0), ModelPoint([3, 5, 7]), (0, 0, 0)) == 1

    def test_not_in_fiber(self):
        with pytest.raises(NotInFiber):
            probability(SMALL, (4, 3), ModelPoint([1, 1, 1]), (1, 1, 2))

    def test_empty_fiber(self):
        with pytest.raises(EmptyFiber):
            summarize(SMALL, (1, 3), ModelPoint([1, 1, 1]))
        with pytest.raises(EmptyFiber):
            summarize(SMALL, (1, 3), ModelPoint([1.0, 1.0, 1.0]), "float")

    def test_moments_odds_one(self, table2x2):
        A, beta = table2x2
        eta = moment_map(A, beta, ModelPoint([1, 1, 1, 1]))
        assert eta == (Fraction(111, 4), Fraction(33, 4), Fraction(37, 4), Fraction(11, 4))

    def test_moments_odds_half(self, table2x2):
        A, beta = table2x2
        eta = moment_map(A, beta, ModelPoint([2, 1, 1, 1]))
        D = 227713625
        assert eta == tuple(Fraction(x, D) for x in (6595942429, 1601748071, 1829461696, 903101804))

    def test_torus_example(self, table2x2):
        A, beta = table2x2
        assert moment_map(A, beta, ModelPoint([10, 2, 15, 3])) == moment_map(A, beta, ModelPoint([1, 1, 1, 1]))
        assert ModelPoint([1, 1, 1, 1]).torus_act(A, [2, 3, 5]).p == (10, 2, 15, 3)
        with pytest.raises(ValueError):
            ModelPoint([1, 1, 1, 1]).torus_act(A, [2, 3])

    def test_bernoulli_covariance(self):
        A = two_way_configuration(2, 2)
        cov = covariance(A, (1, 1, 1), ModelPoint([1, 1, 1, 1]))
        assert cov[0][0] == Fraction(1, 4) and cov[0][1] == Fraction(-1, 4)

    def test_single_point_covariance(self):
        cov = covariance(SMALL, (2, 0), ModelPoint([1, 2, 3]))
        assert all(x == 0 for row in cov for x in row)

    def test_odds(self):
        G = gale_transform(two_way_configuration(2, 2))
        assert generalized_odds(G, ModelPoint([1, 1, 1, 1])) == (1,)
        sign = 1 if G.rows[0][0] == 1 else -1
        assert generalized_odds(G, ModelPoint([2, 1, 1, 1])) == (Fraction(2) ** sign,)

    def test_k9_log_Z(self, ex65):
        A, beta, p = ex65
        kb = tuple(9 * b for b in beta)
        assert kb == two_way_margins((36, 171), (81, 45, 27, 54))
        logZ = normalizing_constant(A, kb, ModelPoint(p), "log_float")
        assert abs(logZ - (-568.0127)) < 1e-3

    def test_p3_twelve_gives_other_value(self, ex65):
        # with p_3 = 12 instead of 1/2 the k = 9 value moves by almost 40
        A, beta, p = ex65
        p12 = list(p)
        p12[2] = 12
        kb = tuple(9 * b for b in beta)
        logZ = normalizing_constant(A, kb, ModelPoint([float(x) for x in p12]), "float")
        assert abs(logZ - (-529.834)) < 1e-2

    def test_k9_probability(self, ex65):
        A, beta, p = ex65
        kb = tuple(9 * b for b in beta)
        P = probability(A, kb, ModelPoint(p), (33, 1, 1, 1, 48, 44, 26, 53))
        assert abs(float(P) - 3.26465e-7) < 1e-11


class TestProperties:
    @given(instances())
    def test_normalization(self, inst):
        A, beta, point, _ = inst
        fib = enumerate_fiber(A, beta)
        s = summarize(A, beta, point, fiber=fib, moments=False)
        assert sum(probability(A, beta, point, u, summary=s) for u in fib) == 1

    @given(instances())
    def test_margins_of_moments(self, inst):
        A, beta, point, _ = inst
        s = summarize(A, beta, point)
        assert A.apply(s.eta) == tuple(Fraction(b) for b in beta)
        # every row of A is constant on the fiber
        for row in A.entries:
            assert all(sum(a * c for a, c in zip(row, col)) == 0 for col in zip(*s.cov))

    @given(instances(), st.lists(rationals, min_size=4, max_size=4))
    def test_torus_invariance(self, inst, s):
        A, beta, point, _ = inst
        moved = point.torus_act(A, s[: A.d])
        assert moment_map(A, beta, moved) == moment_map(A, beta, point)

    @given(instances(), st.lists(rationals, min_size=4, max_size=4))
    def test_odds_invariance(self, inst, s):
        A, _, point, _ = inst
        G = gale_transform(A)
        assert generalized_odds(G, point.torus_act(A, s[: A.d])) == generalized_odds(G, point)

    @given(instances())
    def test_gradient_is_eta(self, inst):
        A, beta, point, _ = inst
        xi = point.xi
        eta = summarize(A, beta, point).eta_float
        h = 1e-5
        for i in range(A.n):
            e = np.zeros(A.n)
            e[i] = h
            up = summarize(A, beta, ModelPoint.from_xi(xi + e), "float", moments=False).log_Z
            dn = summarize(A, beta, ModelPoint.from_xi(xi - e), "float", moments=False).log_Z
            assert abs((up - dn) / (2 * h) - eta[i]) <= 1e-6 * max(1.0, abs(eta[i]))

    @given(instances())
    def test_covariance_is_derivative_of_eta(self, inst):
        A, beta, point, _ = inst
        xi = point.xi
        cov = summarize(A, beta, point).cov_float
        h = 1e-4
        for i in range(A.n):
            e = np.zeros(A.n)
            e[i] = h
            up = summarize(A, beta, ModelPoint.from_xi(xi + e), "float").eta
            dn = summarize(A, beta, ModelPoint.from_xi(xi - e), "float").eta
            np.testing.assert_allclose((up - dn) / (2 * h), cov[:, i], atol=1e-6)

    @given(instances())
    def test_exact_matches_float(self, inst):
        A, beta, point, _ = inst
        ex = summarize(A, beta, point)
        fl = summarize(A, beta, ModelPoint([float(x) for x in point.p]), "float")
        assert abs(ex.log_Z - fl.log_Z) <= 1e-9 * max(1.0, abs(ex.log_Z))
        np.testing.assert_allclose(fl.eta, ex.eta_float, rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(fl.cov, ex.cov_float, rtol=1e-8, atol=1e-9)
        assert fl.fiber_size == ex.fiber_size

    @given(instances(), st.integers(0, 10))
    def test_strict_monotonicity_along_kernel(self, inst, which):
        A, beta, point, _ = inst
        G = gale_transform(A)
        delta = G.rows[which % len(G.rows)]
        fib = enumerate_fiber(A, beta)
        assume(len({sum(d * x for d, x in zip(delta, u)) for u in fib}) > 1)
        vals = []
        for t in range(-2, 3):
            p = [pi * Fraction(2) ** (d * t) for pi, d in zip(point.p, delta)]
            eta = moment_map(A, beta, ModelPoint(p), fiber=fib)
            vals.append(sum(d * e for d, e in zip(delta, eta)))
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestFloatPath:
    def test_threads_partition(self, ex65):
        A, beta, p = ex65
        kb = tuple(9 * b for b in beta)
        pt = ModelPoint([float(x) for x in p])
        seq = summarize(A, kb, pt, "float")
        par = summarize(A, kb, pt, "float", threads=3)
        again = summarize(A, kb, pt, "float", threads=3)
        assert par.fiber_size == seq.fiber_size == 8974
        assert abs(par.log_Z - seq.log_Z) < 1e-10
        np.testing.assert_allclose(par.eta, seq.eta, rtol=1e-10)
        assert par.log_Z == again.log_Z and np.array_equal(par.eta, again.eta)

    def test_stream_cap(self, ex65):
        A, beta, p = ex65
        with pytest.raises(FiberTooLarge):
            summarize(A, tuple(9 * b for b in beta), ModelPoint([1.0] * 8), "float", cap=100)

    def test_extreme_scale(self):
        # terms far below double range still sum correctly in log space
        A = two_way_configuration(2, 2)
        beta = two_way_margins((400, 300), (350, 350))
        pt = ModelPoint([1e-300, 1.0, 1.0, 1.0])
        ex = summarize(A, beta, ModelPoint([Fraction(1, 10**300), 1, 1, 1]), moments=False)
        fl = summarize(A, beta, pt, "float", moments=False)
        assert abs(fl.log_Z - ex.log_Z) < 1e-9 * abs(ex.log_Z)


def test_rational_io_roundtrip():
    for q in (Fraction(3, 7), Fraction(-5, 2), Fraction(4)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(4)) == "4/1"
    with pytest.raises(ValueError):
        ModelPoint([1, 0, 2])
