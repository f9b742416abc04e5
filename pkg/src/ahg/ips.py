"""Iterative proportional scaling for log-affine models.

Given margins ``beta`` and generalized log-odds ``lambda``, find the unique
``m > 0`` with ``A m = beta`` and ``Abar log m = lambda``. Each step rescales
``m`` by ``exp(mu * a_j)`` for one row ``a_j`` of ``A``, which leaves the odds
untouched and fixes margin ``j`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import MarginMismatch, MaxIterations, NoPositiveEntry, NotInterior
from .linalg import ConfigMatrix, GaleTransform, gale_transform, min_norm_preimage
from .polytope import cone_interior


@dataclass
class IPSResult:
    m: np.ndarray
    residual: float
    odds_drift: float
    sweeps: int
    converged: bool
    mu_history: list[float] = field(default_factory=list)
    trace: list[np.ndarray] = field(default_factory=list)


def ips_step_multiplier(row_a: Sequence[int], m: np.ndarray, target: float, rtol: float = 1e-14) -> float:
    """The unique ``mu`` with ``sum_i a_i m_i exp(mu a_i) = target``.

    For 0/1 rows this is a closed form. Otherwise Newton's method runs on
    ``g(mu) = log sum_i a_i m_i exp(mu a_i) - log target``, which is
    increasing and convex, inside a bracket that is grown geometrically and
    shrunk by bisection whenever a Newton step leaves it.
    """
    a = np.asarray(row_a, dtype=float)
    m = np.asarray(m, dtype=float)
    mask = (a > 0) & (m > 0)
    if not mask.any():
        raise NoPositiveEntry("row has no positive entry on the support of m")
    if target <= 0:
        raise ValueError("target must be positive")
    a, m = a[mask], m[mask]
    if np.all(a == 1.0):
        return math.log(target / m.sum())
    la = np.log(a * m)
    lt = math.log(target)

    def g(mu):
        return float(logsumexp(la + mu * a)) - lt

    def dg(mu):
        w = np.exp(la + mu * a - logsumexp(la + mu * a))
        return float(w @ a)

    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo *= 2.0
    while g(hi) < 0:
        hi *= 2.0
    mu = 0.0 if lo < 0.0 < hi else 0.5 * (lo + hi)
    for _ in range(200):
        val = g(mu)
        if val == 0.0:
            return mu
        if val < 0:
            lo = mu
        else:
            hi = mu
        step = val / dg(mu)
        new = mu - step
        if not (lo < new < hi):
            new = 0.5 * (lo + hi)
        if abs(new - mu) <= rtol * max(1.0, abs(new)):
            return new
        mu = new
    return mu


def initial_point(Abar: GaleTransform, lam) -> np.ndarray:
    """``exp(Abar^T (Abar Abar^T)^{-1} lambda)``."""
    return np.exp(np.asarray(min_norm_preimage(Abar, list(np.asarray(lam, dtype=float))), dtype=float))


def ips_solve(
    A,
    Abar: GaleTransform | None,
    beta_target: Sequence,
    lam: Sequence,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    trace: bool = False,
    check_interior: bool = True,
    raise_on_max_iter: bool = True,
) -> IPSResult:
    """Run IPS sweeps ``j = 0, 1, ..., d-1, 0, 1, ...`` until converged.

    Convergence means the sup-norm margin residual and the odds drift are
    both below ``tol``; both are checked after every full sweep.
    ``max_iter`` counts sweeps.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    if Abar is None:
        Abar = gale_transform(A)
    target = np.asarray(beta_target, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if check_interior and not cone_interior(A, [float(b) for b in beta_target]):
        raise NotInterior(f"{tuple(beta_target)} is not in the interior of the cone of A")
    Aa = A.array.astype(float)
    B = Abar.array.astype(float)
    m = initial_point(Abar, lam)
    res = IPSResult(m=m, residual=np.inf, odds_drift=np.inf, sweeps=0, converged=False)
    if trace:
        res.trace.append(m.copy())
    scale = max(1.0, float(np.abs(target).max()))
    for sweep in range(1, max_iter + 1):
        for j in range(A.d):
            mu = ips_step_multiplier(A.entries[j], m, target[j])
            m = m * np.exp(mu * Aa[j])
            res.mu_history.append(mu)
            if trace:
                res.trace.append(m.copy())
        res.sweeps = sweep
        res.residual = float(np.abs(Aa @ m - target).max())
        res.odds_drift = float(np.abs(B @ np.log(m) - lam).max()) if len(B) else 0.0
        if res.residual <= tol * scale and res.odds_drift <= tol:
            res.converged = True
            break
    res.m = m
    if not res.converged and raise_on_max_iter:
        raise MaxIterations(f"IPS residual {res.residual:.3g} after {max_iter} sweeps")
    return res


def i_divergence(p, q) -> float:
    """``sum_i p_i (-log(q_i/p_i) + q_i/p_i - 1)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("p and q must have the same shape")
    if np.any(p <= 0) or np.any(q <= 0):
        raise ValueError("I-divergence needs positive vectors")
    r = q / p
    return float(np.sum(p * (-np.log(r) + r - 1.0)))


def ips_classical_2way(row_sums, col_sums, seed_m, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Alternate row and column scaling of a two-way table.

    ``seed_m`` is an ``r x s`` positive array; the result has the requested
    margins and the cross-product ratios of the seed.
    """
    rows = np.asarray(row_sums, dtype=float)
    cols = np.asarray(col_sums, dtype=float)
    if not math.isclose(rows.sum(), cols.sum(), rel_tol=1e-12, abs_tol=1e-12):
        raise MarginMismatch(f"row total {rows.sum()} != column total {cols.sum()}")
    m = np.array(seed_m, dtype=float)
    if m.shape != (len(rows), len(cols)) or np.any(m <= 0):
        raise ValueError("seed must be a positive array of shape (rows, cols)")
    for _ in range(max_iter):
        m *= (rows / m.sum(axis=1))[:, None]
        m *= (cols / m.sum(axis=0))[None, :]
        if np.abs(m.sum(axis=1) - rows).max() <= tol * max(1.0, rows.max()):
            return m
    raise MaxIterations("classical IPS did not converge")
