"""Large-``k`` behaviour of the fiber of ``k beta``.

As ``k`` grows, ``P_k(u)`` on the fiber of ``k beta`` approaches the lattice
Gaussian

    det(Abar M^-1 Abar^T)^{1/2} / (2 pi k)^{(n-d)/2} * exp(-sum (u_i - k m_i)^2 / (2 k m_i)),

where ``m`` is the IPS solution with margins ``beta`` and the odds of ``p``.
Evaluating that density at ``u = k m`` gives the closed-form estimate of
``log Z(k beta; p)`` used by :func:`approx_log_Z`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .dist import ModelPoint, summarize
from .errors import FiberTooLarge, NonPositiveM
from .fiber import default_cap, enumerate_fiber
from .ips import ips_solve
from .linalg import ConfigMatrix, GaleTransform, gale_transform


def default_window(k: float) -> float:
    return float(k) ** (7.0 / 12.0)


@dataclass
class AsymptoticReport:
    k: int
    m: np.ndarray
    lam: np.ndarray
    approx_logZ: float
    det_term: float
    window: float
    exact_logZ: float | None = None
    fiber_size: int | None = None
    sup_ratio_error: float | None = None

    @property
    def error(self) -> float | None:
        if self.exact_logZ is None:
            return None
        return abs(self.exact_logZ - self.approx_logZ)


def _as_point(p) -> ModelPoint:
    return p if isinstance(p, ModelPoint) else ModelPoint(p)


def _check_m(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.any(~(m > 0)):
        raise NonPositiveM("m must be strictly positive")
    return m


def log_det_term(Abar: GaleTransform, m) -> float:
    """``log det(Abar M^-1 Abar^T)^{1/2}``, via Cholesky."""
    m = _check_m(m)
    if not Abar.rows:
        return 0.0
    B = Abar.array.astype(float)
    L = np.linalg.cholesky((B / m) @ B.T)
    return float(np.log(np.diag(L)).sum())


def gaussian_density(u, k: float, m, Abar: GaleTransform, log: bool = False) -> float:
    u = np.asarray(u, dtype=float)
    m = _check_m(m)
    r = len(Abar.rows)
    km = k * m
    val = log_det_term(Abar, m) - 0.5 * r * math.log(2 * math.pi * k) - float(((u - km) ** 2 / (2 * km)).sum())
    return val if log else math.exp(val)


def approx_log_Z_formula(m, xi, k: float, Abar: GaleTransform, power: float | None = None) -> float:
    """``k m.xi - log Gamma(k m + 1) + power log(2 pi k) - log det(...)^{1/2}``.

    ``power`` defaults to ``(n-d)/2``. Passing ``n-d`` gives the variant that
    disagrees with exact values by ``(n-d)/2 log(2 pi k)``.
    """
    m = _check_m(m)
    xi = np.asarray(xi, dtype=float)
    r = len(Abar.rows)
    if power is None:
        power = 0.5 * r
    return float(
        k * (m @ xi)
        - gammaln(k * m + 1.0).sum()
        + power * math.log(2 * math.pi * k)
        - log_det_term(Abar, m)
    )


def ips_limit(A: ConfigMatrix, Abar: GaleTransform, beta, point: ModelPoint, tol: float = 1e-12):
    lam = point.log_odds(Abar)
    res = ips_solve(A, Abar, [float(b) for b in beta], lam, tol=tol, max_iter=100_000)
    return res.m, lam


def _scaled(beta, k: int) -> tuple[int, ...]:
    return tuple(int(k) * int(b) for b in beta)


def approx_log_Z(
    A,
    Abar: GaleTransform | None,
    beta,
    p,
    k: int,
    exact: bool | str = "auto",
    cap: int | None = None,
    long: bool = False,
    threads: int = 1,
    local_limit: bool = False,
) -> AsymptoticReport:
    """Closed-form estimate of ``log Z(k beta; p)``, with the exact value when affordable.

    ``exact="auto"`` streams the fiber of ``k beta`` and gives up past ``cap``
    points (default: the fiber cap) unless ``long`` is set, in which case the
    pass runs to completion on ``threads`` processes. ``exact=False`` skips it.
    ``local_limit`` adds the windowed sup-ratio error of the Gaussian density.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    Abar = Abar or gale_transform(A)
    point = _as_point(p)
    m, lam = ips_limit(A, Abar, beta, point)
    rep = AsymptoticReport(
        k=int(k),
        m=m,
        lam=np.asarray(lam, dtype=float),
        approx_logZ=approx_log_Z_formula(m, point.xi, k, Abar),
        det_term=math.exp(log_det_term(Abar, m)),
        window=default_window(k),
    )
    kb = _scaled(beta, k)
    if exact:
        cap = default_cap() if cap is None else cap
        try:
            if long:
                s = summarize(A, kb, point, "float", moments=False, threads=threads)
            else:
                s = summarize(A, kb, point, "float", moments=False, cap=cap)
            rep.exact_logZ, rep.fiber_size = s.log_Z, s.fiber_size
        except FiberTooLarge:
            if exact is True:
                raise
    if local_limit:
        rep.sup_ratio_error = sup_ratio_error(A, beta, point, k, Abar=Abar, m=m)
    return rep


def approx_log_probability(u, point, report: AsymptoticReport) -> float:
    """``log P(u)`` with ``log Z`` replaced by the closed-form estimate."""
    point = _as_point(point)
    u = np.asarray(u, dtype=float)
    return float(u @ point.xi - gammaln(u + 1.0).sum() - report.approx_logZ)


def _fiber_log_probs(A, beta, point, k, cap):
    kb = _scaled(beta, k)
    fib = enumerate_fiber(A, kb, cap=cap)
    s = summarize(A, kb, point, "float", fib, moments=False)
    U = fib.points.astype(float)
    logp = U @ point.xi - gammaln(U + 1.0).sum(axis=1) - s.log_Z
    return U, logp


def sup_ratio_error(
    A,
    beta,
    p,
    k: int,
    Abar: GaleTransform | None = None,
    m=None,
    phi=default_window,
    cap: int | None = None,
) -> float:
    """``max |P_k(u) / Phat_k(u) - 1|`` over ``max_i |u_i - k m_i| < phi(k)``."""
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    Abar = Abar or gale_transform(A)
    point = _as_point(p)
    if m is None:
        m, _ = ips_limit(A, Abar, beta, point)
    U, logp = _fiber_log_probs(A, beta, point, k, cap)
    inside = np.abs(U - k * m).max(axis=1) < phi(k)
    if not inside.any():
        return float("nan")
    logg = np.array([gaussian_density(u, k, m, Abar, log=True) for u in U[inside]])
    return float(np.abs(np.expm1(logp[inside] - logg)).max())


def gaussian_mass(
    A,
    beta,
    p,
    k: int,
    Abar: GaleTransform | None = None,
    phi=None,
    cap: int | None = None,
) -> float:
    """Sum of the Gaussian density over the fiber of ``k beta``.

    This is a Riemann sum over the lattice slice and tends to 1. With ``phi``
    the sum is limited to the window ``max_i |u_i - k m_i| < phi(k)``.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    Abar = Abar or gale_transform(A)
    point = _as_point(p)
    m, _ = ips_limit(A, Abar, beta, point)
    U = enumerate_fiber(A, _scaled(beta, k), cap=cap).points.astype(float)
    if phi is not None:
        U = U[np.abs(U - k * m).max(axis=1) < phi(k)]
    return float(sum(gaussian_density(u, k, m, Abar) for u in U))


def moment_ips_gap(A, Abar: GaleTransform | None, beta, p, k_list: Sequence[int], mode: str = "exact") -> list[dict]:
    """``|E_k[U]/k - m|`` per coordinate for each ``k``.

    Moments are exact when ``p`` is rational and ``mode="exact"``.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    Abar = Abar or gale_transform(A)
    point = _as_point(p)
    m, _ = ips_limit(A, Abar, beta, point)
    if not point.exact:
        mode = "float"
    rows = []
    for k in k_list:
        s = summarize(A, _scaled(beta, k), point, mode)
        eta = s.eta_float / k
        rows.append({"k": int(k), "eta_over_k": eta, "m": m, "gap": np.abs(eta - m)})
    return rows
