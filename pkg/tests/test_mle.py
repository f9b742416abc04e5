from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ahg.dist import ModelPoint, moment_map, summarize
from ahg.errors import NoInteriorPoint, SingularJacobian
from ahg.fiber import enumerate_fiber
from ahg.linalg import ConfigMatrix, gale_transform, two_way_configuration, two_way_margins
from ahg.mle import (
    PINNED,
    MLEProblem,
    invert_moment_map,
    log_likelihood,
    moment_jacobian,
    pinned_newton_step,
)
from ahg.polytope import newton_polytope, relint_member

F = Fraction


@pytest.fixture(scope="module")
def ex4_problem(ex4):
    A, u = ex4
    prob = MLEProblem.from_data(A, u)
    return prob, enumerate_fiber(prob.A, prob.beta)


class TestEx4:
    def test_moments_at_start(self, ex4_problem):
        prob, fib = ex4_problem
        u = np.array(prob.eta_star_float)
        s = summarize(prob.A, prob.beta, ModelPoint(u / u.sum(), exact=False), "float", fib)
        np.testing.assert_allclose(s.eta[4:], [51.9194, 5.99193, 97.0891], atol=1e-3)

    def test_pinned_step(self, ex4_problem):
        prob, fib = ex4_problem
        u = prob.eta_star_float
        h, eta, eta_new = pinned_newton_step(MLEProblem.from_data(prob.A, [int(x) for x in u], mode=PINNED), u / u.sum(), fib)
        np.testing.assert_allclose(h, [0.00025615, -0.00015258, -0.00310983], atol=1e-6)
        np.testing.assert_allclose(eta_new[4:], [52.0006, 6.00006, 96.9993], atol=1e-3)

    def test_reduced_and_pinned_agree(self, ex4_problem):
        prob, fib = ex4_problem
        red = invert_moment_map(prob, fiber=fib)
        pin = invert_moment_map(MLEProblem.from_data(prob.A, [int(x) for x in prob.eta_star], mode=PINNED), fiber=fib)
        assert red.converged and pin.converged
        assert red.iterations <= 10 and pin.iterations <= 10
        assert red.residual < 1e-6
        np.testing.assert_allclose(red.lambda_hat, pin.lambda_hat, atol=1e-6)


class TestJacobian:
    def test_exact_reduced_matches_float(self, table2x2):
        A, beta = table2x2
        ex = moment_jacobian(A, beta, ModelPoint([2, 1, 1, 1]))
        fl = moment_jacobian(A, beta, ModelPoint([2.0, 1.0, 1.0, 1.0], exact=False))
        assert isinstance(ex[0][0], Fraction)
        np.testing.assert_allclose(np.array(ex, float), fl, rtol=1e-12)

    def test_pinned_finite_difference(self, table2x3=None):
        A = two_way_configuration(2, 3)
        beta = two_way_margins((6, 5), (4, 3, 4))
        p = np.array([1.0, 0.7, 1.3, 0.9, 1.1, 0.6])
        J = moment_jacobian(A, beta, ModelPoint(p, exact=False), PINNED)
        free = list(range(A.d, A.n))
        h = 1e-6
        for c, j in enumerate(free):
            up, dn = p.copy(), p.copy()
            up[j] += h
            dn[j] -= h
            d = (summarize(A, beta, ModelPoint(up, exact=False), "float").eta - summarize(A, beta, ModelPoint(dn, exact=False), "float").eta) / (2 * h)
            np.testing.assert_allclose(J[:, c], d[free], atol=1e-6)

    def test_pinned_needs_basis(self):
        A = ConfigMatrix([[1, 1, 1, 1], [0, 0, 1, 2]])
        with pytest.raises(SingularJacobian):
            moment_jacobian(A, (3, 2), ModelPoint([1, 1, 1, 1]), PINNED)


class TestFailures:
    def test_boundary_target(self, table2x2):
        A, beta = table2x2
        with pytest.raises(NoInteriorPoint):
            invert_moment_map(MLEProblem(A, beta, (36, 0, 1, 11)))

    def test_degenerate_polytope(self):
        A = ConfigMatrix([[1, 1, 1], [0, 1, 2]])
        with pytest.raises(SingularJacobian):
            invert_moment_map(MLEProblem(A, (2, 0), (2, 0, 0)))

    def test_target_off_margins(self, table2x2):
        A, beta = table2x2
        with pytest.raises(ValueError):
            MLEProblem(A, beta, (30, 6, 7, 6))


FAMILY = [
    ConfigMatrix([[1, 1, 1], [0, 1, 2]]),
    two_way_configuration(2, 2),
    two_way_configuration(2, 3),
    ConfigMatrix([[1, 1, 1, 1], [0, 1, 2, 3]]),
]


@st.composite
def fitted(draw):
    A = draw(st.sampled_from(FAMILY))
    u = draw(st.lists(st.integers(1, 4), min_size=A.n, max_size=A.n))
    beta = A.apply(u)
    fib = enumerate_fiber(A, beta)
    assume(newton_polytope(A, beta, fib).dim == A.n - A.d)
    p = draw(st.lists(st.builds(F, st.integers(1, 6), st.integers(1, 6)), min_size=A.n, max_size=A.n))
    return A, beta, fib, ModelPoint(p)


@given(fitted())
def test_round_trip(inst):
    A, beta, fib, point = inst
    G = gale_transform(A)
    eta = moment_map(A, beta, point, fiber=fib)
    fit = invert_moment_map(MLEProblem(A, beta, eta, tol=1e-11, Abar=G), fiber=fib)
    assert fit.converged
    assert np.abs(fit.lambda_hat - np.array(point.log_odds(G))).max() <= 1e-8


@given(fitted(), st.lists(st.floats(0.1, 5), min_size=6, max_size=6))
def test_unique_from_any_start(inst, start):
    A, beta, fib, point = inst
    eta = moment_map(A, beta, point, fiber=fib)
    prob = MLEProblem(A, beta, eta, tol=1e-11)
    a = invert_moment_map(prob, fiber=fib)
    b = invert_moment_map(prob, p0=start[: A.n], fiber=fib)
    np.testing.assert_allclose(a.lambda_hat, b.lambda_hat, atol=1e-8)


@given(fitted())
def test_objective_ascends(inst):
    A, beta, fib, point = inst
    eta = moment_map(A, beta, point, fiber=fib)
    fit = invert_moment_map(MLEProblem(A, beta, eta), fiber=fib)
    obj = [t["objective"] for t in fit.trace]
    assert all(b >= a - 1e-12 * max(1.0, abs(a)) for a, b in zip(obj, obj[1:]))


@given(fitted(), st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_likelihood_torus_invariant(inst, theta):
    A, beta, fib, point = inst
    u = fib.points[len(fib) // 2]
    xi = point.xi
    moved = ModelPoint.from_xi(xi + A.array.T.astype(float) @ np.array(theta[: A.d]))
    assert abs(log_likelihood(A, u, moved, fib) - log_likelihood(A, u, point, fib)) < 1e-9


@given(fitted())
def test_fit_is_stationary(inst):
    # at the fitted point, nudging log-odds in any kernel direction lowers the likelihood
    A, beta, fib, _ = inst
    u = tuple(int(x) for x in fib.points[len(fib) // 2])
    assume(relint_member(newton_polytope(A, beta, fib), u))
    fit = invert_moment_map(MLEProblem.from_data(A, u), fiber=fib)
    best = log_likelihood(A, u, ModelPoint(fit.p_hat, exact=False), fib)
    np.testing.assert_allclose(fit.eta_achieved, u, atol=1e-6)
    assert abs(best - fit.loglik) < 1e-8
    xi = np.log(fit.p_hat)
    for row in gale_transform(A).rows:
        for t in (-1e-2, 1e-2):
            assert log_likelihood(A, u, ModelPoint.from_xi(xi + t * np.array(row, float)), fib) <= best + 1e-12


def test_likelihood_matches_probability():
    A = ConfigMatrix([[1, 1, 1], [0, 1, 2]])
    assert log_likelihood(A, (2, 1, 1), ModelPoint([1, 1, 1])) == pytest.approx(np.log(0.75), abs=1e-12)


def test_ex4_trace_ascends(ex4_problem):
    prob, fib = ex4_problem
    for mode in ("reduced", PINNED):
        fit = invert_moment_map(MLEProblem.from_data(prob.A, [int(x) for x in prob.eta_star], mode=mode), fiber=fib)
        obj = [t["objective"] for t in fit.trace]
        assert all(b >= a for a, b in zip(obj, obj[1:]))
