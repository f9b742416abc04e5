"""Inverting the moment map: conditional maximum likelihood.

The default solver works in reduced coordinates ``xi = xi_0 + Abar^T w``,
where the objective ``f(xi) = eta* . xi - log Z`` is strictly concave with
gradient ``Abar (eta* - eta)`` and Hessian ``-Abar Cov Abar^T``. Newton
steps are damped by halving until ``f`` does not decrease.

``mode="pinned"`` instead fixes ``p_1..p_d`` and iterates on
``y = (p_{d+1}, ..., p_n)`` with the Jacobian ``dE[U_{d+i}]/dp_{d+j}``. It
matches step-by-step traces computed in that convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .dist import DistSummary, ModelPoint, parse_rational, summarize
from .errors import (
    FiberTooLarge,
    MaxIterations,
    NoInteriorPoint,
    NotInFiber,
    SingularJacobian,
)
from .fiber import Fiber, enumerate_fiber
from .linalg import ConfigMatrix, GaleTransform, det_exact, gale_transform
from .polytope import newton_polytope, relint_member

REDUCED = "reduced"
PINNED = "pinned"


@dataclass
class MLEProblem:
    """Find ``p`` with ``E[U](p) = eta_star`` on the fiber of ``beta``."""

    A: ConfigMatrix
    beta: tuple
    eta_star: tuple
    damping: float = 1.0
    tol: float = 1e-8
    max_iter: int = 50
    mode: str = REDUCED
    Abar: GaleTransform | None = None

    def __post_init__(self):
        if not isinstance(self.A, ConfigMatrix):
            self.A = ConfigMatrix(self.A)
        self.beta = tuple(int(b) for b in self.beta)
        self.eta_star = tuple(parse_rational(x) for x in self.eta_star)
        if self.A.apply(self.eta_star) != tuple(Fraction(b) for b in self.beta):
            raise ValueError("A eta_star must equal beta")
        if self.mode not in (REDUCED, PINNED):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.Abar is None:
            self.Abar = gale_transform(self.A)

    @classmethod
    def from_data(cls, A, u: Sequence[int], **kw) -> "MLEProblem":
        A = A if isinstance(A, ConfigMatrix) else ConfigMatrix(A)
        return cls(A=A, beta=A.apply(u), eta_star=tuple(int(x) for x in u), **kw)

    @property
    def eta_star_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.eta_star])


@dataclass
class FitResult:
    p_hat: np.ndarray
    lambda_hat: np.ndarray
    eta_achieved: np.ndarray
    loglik: float
    iterations: int
    residual: float
    converged: bool
    trace: list[dict] = field(default_factory=list)


def _pinned_free(A: ConfigMatrix) -> list[int]:
    head = [row[: A.d] for row in A.entries]
    if det_exact(head) == 0:
        raise SingularJacobian("the first d columns of A are not a basis; pinned mode is undefined")
    return list(range(A.d, A.n))


def moment_jacobian(
    A,
    beta,
    point: ModelPoint,
    mode: str = REDUCED,
    Abar: GaleTransform | None = None,
    fiber: Fiber | None = None,
    summary: DistSummary | None = None,
):
    """Derivative of the moment map in the chosen coordinates.

    ``reduced``: ``Abar Cov(U) Abar^T`` (Hessian of ``log Z`` in ``w``).
    ``pinned``: ``dE[U_{d+i}] / dp_{d+j} = Cov(U_{d+i}, U_{d+j}) / p_{d+j}``.
    Exact points give Fraction matrices, float points give arrays.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    if summary is None:
        summary = summarize(A, beta, point, "exact" if point.exact else "float", fiber)
    cov = summary.cov
    if mode == REDUCED:
        B = (Abar or gale_transform(A)).rows
        if summary.exact:
            BC = [[sum(b[k] * cov[k][j] for k in range(A.n)) for j in range(A.n)] for b in B]
            return [[sum(r[k] * b2[k] for k in range(A.n)) for b2 in B] for r in BC]
        Bf = np.asarray(B, dtype=float)
        return Bf @ np.asarray(cov) @ Bf.T
    if mode == PINNED:
        free = _pinned_free(A)
        if summary.exact:
            return [[cov[i][j] / point.p[j] for j in free] for i in free]
        c = np.asarray(cov)[np.ix_(free, free)]
        return c / np.asarray(point.p, dtype=float)[free][None, :]
    raise ValueError(f"unknown mode {mode!r}")


def log_likelihood(A, u, point: ModelPoint, fiber: Fiber | None = None, summary: DistSummary | None = None) -> float:
    """``u . log p - log u! - log Z``, the log of the conditional probability of ``u``."""
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    u = tuple(int(x) for x in u)
    if any(x < 0 for x in u):
        raise NotInFiber(f"{u} has negative entries")
    beta = A.apply(u)
    if summary is None:
        summary = summarize(A, beta, point, "float", fiber, moments=False)
    ua = np.asarray(u, dtype=float)
    return float(ua @ point.xi - gammaln(ua + 1.0).sum() - summary.log_Z)


def initial_parameter(eta_star: Sequence, floor: float = 1e-9) -> np.ndarray:
    """``eta*/|eta*|`` with zero entries lifted to ``floor``."""
    e = np.array([float(x) for x in eta_star])
    return np.maximum(e / e.sum(), floor)


class _Evaluator:
    """Float summaries on a fixed fiber (materialized when it fits)."""

    def __init__(self, problem: MLEProblem, fiber: Fiber | None, cap: int | None):
        self.problem = problem
        if fiber is None:
            try:
                fiber = enumerate_fiber(problem.A, problem.beta, cap=cap)
            except FiberTooLarge:
                fiber = None
        self.fiber = fiber
        self.eta_star = problem.eta_star_float
        self.lgf_eta = float(gammaln(self.eta_star + 1.0).sum())

    def at(self, xi: np.ndarray) -> tuple[DistSummary, float]:
        s = summarize(self.problem.A, self.problem.beta, ModelPoint.from_xi(xi), "float", self.fiber)
        return s, float(self.eta_star @ xi - s.log_Z)


def _precheck(problem: MLEProblem, fiber: Fiber | None, relint_limit: int):
    if fiber is None or len(fiber) == 0:
        return
    poly = newton_polytope(problem.A, problem.beta, fiber)
    if poly.dim < problem.A.n - problem.A.d:
        raise SingularJacobian(
            f"Newton polytope has dimension {poly.dim} < n - d = {problem.A.n - problem.A.d}"
        )
    if len(fiber) <= relint_limit and not relint_member(poly, problem.eta_star):
        raise NoInteriorPoint("eta_star is not in the relative interior of the Newton polytope")


MAX_STEP = 5.0  # largest change of any log p_i in one iteration


def _line_search(ev: _Evaluator, xi, direction, f0, damping, max_halvings=30):
    step = damping
    big = float(np.abs(direction).max()) if len(direction) else 0.0
    if big * step > MAX_STEP:
        step = MAX_STEP / big
    for _ in range(max_halvings + 1):
        cand = xi + step * direction
        if not np.all(np.abs(cand) < 700.0):
            step *= 0.5
            continue
        s, f = ev.at(cand)
        if np.isfinite(f) and f >= f0 - 1e-12 * max(1.0, abs(f0)):
            return cand, s, f, step
        step *= 0.5
    raise MaxIterations("line search failed to find an ascent step")


def pinned_newton_step(problem: MLEProblem, p, fiber: Fiber | None = None):
    """One undamped pinned-coordinate step from ``p``.

    Returns ``(h, eta, eta_new)`` where ``h = Edot^{-1}(eta*_free - eta_free)``,
    ``eta`` is the moment vector at ``p`` and ``eta_new`` the one after the
    update ``p_free += h``.
    """
    A = problem.A
    free = _pinned_free(A)
    p = np.asarray(p, dtype=float)
    point = ModelPoint(p, exact=False)
    s = summarize(A, problem.beta, point, "float", fiber)
    J = moment_jacobian(A, problem.beta, point, PINNED, summary=s)
    h = np.linalg.solve(J, problem.eta_star_float[free] - s.eta[free])
    p_new = p.copy()
    p_new[free] += h
    s_new = summarize(A, problem.beta, ModelPoint(p_new, exact=False), "float", fiber)
    return h, s.eta, s_new.eta


def invert_moment_map(
    problem: MLEProblem,
    p0: Sequence | None = None,
    fiber: Fiber | None = None,
    cap: int | None = None,
    relint_limit: int = 5000,
    raise_on_max_iter: bool = True,
) -> FitResult:
    """Newton iteration for ``E[U](p) = eta*``.

    The target is first checked against the Newton polytope: a deficient
    dimension raises SingularJacobian, and (for fibers of at most
    ``relint_limit`` points) a target outside the relative interior raises
    NoInteriorPoint. ``p0`` defaults to ``eta*/|eta*|``.
    """
    ev = _Evaluator(problem, fiber, cap)
    _precheck(problem, ev.fiber, relint_limit)
    A, B = problem.A, problem.Abar.array.astype(float)
    eta_star = ev.eta_star
    p = initial_parameter(problem.eta_star) if p0 is None else np.asarray(p0, dtype=float)
    xi = np.log(p)
    s, f = ev.at(xi)
    trace: list[dict] = []
    free = _pinned_free(A) if problem.mode == PINNED else None
    it = 0
    while True:
        residual = float(np.abs(s.eta - eta_star).max())
        record = {"iteration": it, "eta": s.eta.copy(), "residual": residual, "objective": f}
        trace.append(record)
        if residual <= problem.tol:
            break
        if it >= problem.max_iter:
            if raise_on_max_iter:
                raise MaxIterations(f"residual {residual:.3g} after {it} iterations")
            break
        if problem.mode == REDUCED:
            H = B @ s.cov @ B.T
            try:
                L = np.linalg.cholesky(H)
            except np.linalg.LinAlgError as exc:
                raise SingularJacobian("reduced Hessian is not positive definite") from exc
            g = B @ (eta_star - s.eta)
            dw = np.linalg.solve(L.T, np.linalg.solve(L, g))
            direction = B.T @ dw
            record["step"] = dw
            xi, s, f, used = _line_search(ev, xi, direction, f, problem.damping)
        else:
            pf = np.exp(xi)
            J = s.cov[np.ix_(free, free)] / pf[free][None, :]
            try:
                h = np.linalg.solve(J, eta_star[free] - s.eta[free])
            except np.linalg.LinAlgError as exc:
                raise SingularJacobian("pinned Jacobian is singular") from exc
            record["step"] = h
            # the update is additive in p; keep it positive before the ascent test
            damp = problem.damping
            while np.any(pf[free] + damp * h <= 0):
                damp *= 0.5
            target = pf.copy()
            target[free] += damp * h
            xi, s, f, used = _line_search(ev, xi, np.log(target) - xi, f, 1.0)
            used *= damp
        record["step_size"] = used
        it += 1
    p_hat = np.exp(xi)
    return FitResult(
        p_hat=p_hat,
        lambda_hat=B @ xi,
        eta_achieved=s.eta,
        loglik=f - ev.lgf_eta,
        iterations=it,
        residual=trace[-1]["residual"],
        converged=trace[-1]["residual"] <= problem.tol,
        trace=trace,
    )
