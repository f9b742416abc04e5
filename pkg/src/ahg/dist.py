"""The A-hypergeometric distribution on a fiber.

Two evaluation modes share one pass over the fiber:

* ``"exact"``: ``p`` rational, all results are :class:`Fraction`. Terms are
  accumulated as big integers over a common denominator, which is far
  cheaper than adding Fractions one by one.
* ``"float"`` (alias ``"log_float"``): weights are handled in log space with
  a running max shift, and the moment sums are taken about a reference
  point to limit cancellation in the covariance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import EmptyFiber, FiberTooLarge, NotInFiber
from .fiber import Fiber, first_free_range, iter_fiber_blocks
from .linalg import ConfigMatrix, GaleTransform


def parse_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot read {x!r} as a rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class ModelPoint:
    """A positive parameter vector ``p``.

    Rational input (ints, Fractions or ``"num/den"`` strings) gives an exact
    point; floats give a float point. ``xi = log p`` is always a float view.
    """

    def __init__(self, p: Sequence, exact: bool | None = None):
        vals = list(p)
        if exact is None:
            exact = all(isinstance(v, (int, np.integer, Fraction, str)) for v in vals)
        if exact:
            vals = tuple(parse_rational(v) for v in vals)
        else:
            vals = tuple(float(parse_rational(v)) if isinstance(v, str) else float(v) for v in vals)
        if any(v <= 0 for v in vals):
            raise ValueError("all p_i must be positive")
        self.p = vals
        self.exact = bool(exact)

    def __len__(self):
        return len(self.p)

    def __repr__(self):
        kind = "exact" if self.exact else "float"
        return f"ModelPoint({[str(v) for v in self.p] if self.exact else list(self.p)}, {kind})"

    @property
    def xi(self) -> np.ndarray:
        return np.array([math.log(v) for v in self.p])

    @classmethod
    def from_xi(cls, xi) -> "ModelPoint":
        return cls(np.exp(np.asarray(xi, dtype=float)), exact=False)

    def log_odds(self, Abar: GaleTransform) -> np.ndarray:
        """``lambda = Abar xi``."""
        return Abar.array.astype(float) @ self.xi

    def torus_act(self, A: ConfigMatrix, s: Sequence) -> "ModelPoint":
        """``p_i * s^{a_i}``; exact when both ``p`` and ``s`` are rational."""
        if len(s) != A.d:
            raise ValueError(f"torus element needs {A.d} entries, got {len(s)}")
        if self.exact and all(isinstance(v, (int, Fraction)) for v in s):
            s = [Fraction(v) for v in s]
            out = []
            for i, pi in enumerate(self.p):
                f = Fraction(1)
                for sj, aji in zip(s, A.column(i)):
                    f *= sj**aji
                out.append(pi * f)
            return ModelPoint(out, exact=True)
        ls = np.log(np.asarray(s, dtype=float))
        return ModelPoint.from_xi(self.xi + A.array.T.astype(float) @ ls)


@dataclass(frozen=True, eq=False)
class DistSummary:
    """Normalizing constant and moments at one parameter point.

    ``Z`` is None in float mode; ``log_Z`` is always set. ``eta`` and
    ``cov`` are tuples of Fractions in exact mode and arrays in float mode
    (None when moments were not requested).
    """

    Z: Fraction | None
    log_Z: float
    eta: object
    cov: object
    fiber_size: int
    exact: bool

    @property
    def eta_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.eta])

    @property
    def cov_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.cov])


def _normalize_mode(mode: str) -> str:
    if mode in ("exact",):
        return "exact"
    if mode in ("float", "log_float"):
        return "float"
    raise ValueError(f"unknown mode {mode!r}")


def _blocks(A, beta, fiber):
    if fiber is not None:
        if len(fiber):
            yield fiber.points
        return
    yield from iter_fiber_blocks(A, beta)


def _coord_bounds(A: ConfigMatrix, beta) -> list[int]:
    return [
        min(b // a for b, a in zip(beta, A.column(i)) if a > 0) for i in range(A.n)
    ]


def _exact_pass(A, beta, point, fiber, moments):
    n = A.n
    if fiber is not None and len(fiber):
        U = [int(x) for x in fiber.points.max(axis=0)]
    else:
        U = [max(0, b) for b in _coord_bounds(A, beta)]
    # T[i][v] = num_i^v * den_i^(U_i - v) * U_i! / v!  and the shared denominator
    T = []
    D = 1
    for i in range(n):
        a, b = point.p[i].numerator, point.p[i].denominator
        Ui = U[i]
        row = [0] * (Ui + 1)
        fact_ratio = 1  # U_i! / v! built from the top
        for v in range(Ui, -1, -1):
            row[v] = a**v * b ** (Ui - v) * fact_ratio
            fact_ratio *= v if v else 1
        T.append(row)
        D *= b**Ui * math.factorial(Ui)
    s0 = 0
    s1 = [0] * n
    s2 = [[0] * n for _ in range(n)]
    count = 0
    for block in _blocks(A, beta, fiber):
        for u in block.tolist():
            w = 1
            for i in range(n):
                w *= T[i][u[i]]
            s0 += w
            count += 1
            if moments:
                wu = [w * x for x in u]
                for i in range(n):
                    s1[i] += wu[i]
                    if wu[i]:
                        row = s2[i]
                        for j in range(i, n):
                            row[j] += wu[i] * u[j]
    if count == 0:
        raise EmptyFiber(f"beta={tuple(beta)} is not in NA")
    Z = Fraction(s0, D)
    log_Z = math.log(s0) - math.log(D)
    eta = cov = None
    if moments:
        eta = tuple(Fraction(x, s0) for x in s1)
        cov = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                c = Fraction(s2[i][j], s0) - eta[i] * eta[j]
                cov[i][j] = cov[j][i] = c
        cov = tuple(tuple(r) for r in cov)
    return DistSummary(Z=Z, log_Z=log_Z, eta=eta, cov=cov, fiber_size=count, exact=True)


class _FloatAccumulator:
    """Shifted sums of ``w``, ``w (u - ref)``, ``w (u - ref)(u - ref)^T``.

    Weights are stored relative to ``exp(shift)``; the shift only increases.
    Per block, numpy's pairwise summation is used; across blocks the totals
    carry Neumaier compensation terms.
    """

    def __init__(self, n: int, xi: np.ndarray, lgf: np.ndarray, moments: bool):
        self.n = n
        self.xi = xi
        self.lgf = lgf
        self.moments = moments
        self.shift = -np.inf
        self.ref = None
        self.count = 0
        self.s0 = np.zeros(1)
        self.c0 = np.zeros(1)
        self.s1 = np.zeros(n)
        self.c1 = np.zeros(n)
        self.s2 = np.zeros((n, n))
        self.c2 = np.zeros((n, n))

    @staticmethod
    def _kahan(s, c, x):
        t = s + x
        big = np.abs(s) >= np.abs(x)
        c += np.where(big, (s - t) + x, (x - t) + s)
        s[...] = t

    def _rescale(self, new_shift):
        if np.isfinite(self.shift):
            f = math.exp(self.shift - new_shift)
            for arr in (self.s0, self.c0, self.s1, self.c1, self.s2, self.c2):
                arr *= f
        self.shift = new_shift

    def add_block(self, U: np.ndarray):
        if not len(U):
            return
        U = U.astype(np.int64)
        logw = U @ self.xi - self.lgf[U].sum(axis=1)
        bmax = float(logw.max())
        if bmax > self.shift:
            self._rescale(bmax)
        w = np.exp(logw - self.shift)
        if self.ref is None:
            self.ref = U[0].astype(float)
        self.count += len(U)
        self._kahan(self.s0, self.c0, np.array([w.sum()]))
        if self.moments:
            V = U - self.ref
            wV = w[:, None] * V
            self._kahan(self.s1, self.c1, wV.sum(axis=0))
            self._kahan(self.s2, self.c2, wV.T @ V)

    def merge(self, other: "_FloatAccumulator"):
        if other.count == 0:
            return
        if self.count == 0:
            self.__dict__.update(other.__dict__)
            return
        if other.shift > self.shift:
            self._rescale(other.shift)
        f = math.exp(other.shift - self.shift)
        o0 = (other.s0 + other.c0) * f
        self._kahan(self.s0, self.c0, o0)
        if self.moments:
            o1 = (other.s1 + other.c1) * f
            o2 = (other.s2 + other.c2) * f
            delta = other.ref - self.ref
            self._kahan(self.s1, self.c1, o1 + o0[0] * delta)
            self._kahan(
                self.s2,
                self.c2,
                o2 + np.outer(o1, delta) + np.outer(delta, o1) + o0[0] * np.outer(delta, delta),
            )
        self.count += other.count

    def summary(self) -> DistSummary:
        if self.count == 0:
            raise EmptyFiber("empty fiber")
        s0 = float((self.s0 + self.c0)[0])
        log_Z = self.shift + math.log(s0)
        eta = cov = None
        if self.moments:
            m1 = (self.s1 + self.c1) / s0
            m2 = (self.s2 + self.c2) / s0
            eta = self.ref + m1
            cov = m2 - np.outer(m1, m1)
            cov = 0.5 * (cov + cov.T)
        return DistSummary(Z=None, log_Z=log_Z, eta=eta, cov=cov, fiber_size=self.count, exact=False)


def log_factorial_table(top: int) -> np.ndarray:
    return gammaln(np.arange(top + 1, dtype=float) + 1.0)


def _float_worker(args):
    entries, beta, xi, moments, rng = args
    A = ConfigMatrix(entries)
    lgf = log_factorial_table(max(max(beta), 0))
    acc = _FloatAccumulator(A.n, xi, lgf, moments)
    for block in iter_fiber_blocks(A, beta, first_range=rng):
        acc.add_block(block)
    return acc


def _float_pass(A, beta, point, fiber, moments, threads, cap=None):
    xi = point.xi
    top = fiber.max_coordinate() if fiber is not None else max(max(beta), 0)
    lgf = log_factorial_table(top)
    if fiber is None and threads > 1:
        lo, hi = first_free_range(A, beta)
        edges = np.linspace(lo, hi, threads + 1).round().astype(int)
        jobs = [
            (A.entries, tuple(beta), xi, moments, (int(a), int(b)))
            for a, b in zip(edges[:-1], edges[1:])
        ]
        acc = _FloatAccumulator(A.n, xi, lgf, moments)
        with ProcessPoolExecutor(max_workers=threads) as ex:
            for part in ex.map(_float_worker, jobs):
                acc.merge(part)
        return acc.summary()
    acc = _FloatAccumulator(A.n, xi, lgf, moments)
    seen = 0
    for block in _blocks(A, beta, fiber):
        seen += len(block)
        if cap is not None and fiber is None and seen > cap:
            raise FiberTooLarge(f"fiber exceeds {cap} points")
        acc.add_block(block)
    return acc.summary()


def summarize(
    A,
    beta,
    point: ModelPoint,
    mode: str = "exact",
    fiber: Fiber | None = None,
    moments: bool = True,
    threads: int = 1,
    cap: int | None = None,
) -> DistSummary:
    """Z, E[U] and Cov(U) from one pass over the fiber.

    ``threads > 1`` splits a streamed float pass into that many contiguous
    ranges of the first free coordinate, merged in range order, so results
    are reproducible for a fixed thread count. ``cap`` aborts a sequential
    streamed float pass with FiberTooLarge once it has seen that many points.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    beta = tuple(int(b) for b in beta)
    mode = _normalize_mode(mode)
    if fiber is not None and len(fiber) == 0:
        raise EmptyFiber(f"beta={beta} is not in NA")
    if mode == "exact":
        if not point.exact:
            raise ValueError("exact mode needs a rational ModelPoint")
        return _exact_pass(A, beta, point, fiber, moments)
    return _float_pass(A, beta, point, fiber, moments, threads, cap)


def normalizing_constant(A, beta, point: ModelPoint, mode: str = "exact", fiber=None, threads: int = 1):
    """``Z`` as a Fraction (exact mode) or ``log Z`` as a float."""
    s = summarize(A, beta, point, mode, fiber, moments=False, threads=threads)
    return s.Z if s.exact else s.log_Z


def _check_member(A: ConfigMatrix, beta, u) -> tuple[int, ...]:
    u = tuple(int(x) for x in u)
    if len(u) != A.n or any(x < 0 for x in u) or A.apply(u) != tuple(beta):
        raise NotInFiber(f"{u} is not in the fiber of beta={tuple(beta)}")
    return u


def log_term(u, xi) -> float:
    """``u . xi - log u!``."""
    u = np.asarray(u)
    return float(u @ xi - gammaln(u + 1.0).sum())


def probability(A, beta, point: ModelPoint, u, mode: str = "exact", fiber=None, summary=None):
    """``p^u / (u! Z)``."""
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    u = _check_member(A, beta, u)
    mode = _normalize_mode(mode)
    if summary is None:
        summary = summarize(A, beta, point, mode, fiber, moments=False)
    if mode == "exact":
        term = Fraction(1)
        for pi, ui in zip(point.p, u):
            term *= pi**ui / math.factorial(ui)
        return term / summary.Z
    return math.exp(log_term(u, point.xi) - summary.log_Z)


def moment_map(A, beta, point: ModelPoint, mode: str = "exact", fiber=None):
    return summarize(A, beta, point, mode, fiber).eta


def covariance(A, beta, point: ModelPoint, mode: str = "exact", fiber=None):
    return summarize(A, beta, point, mode, fiber).cov


def generalized_odds(Abar: GaleTransform, point: ModelPoint):
    """``p^{abar_i}`` for each Gale row: Fractions when exact, else floats."""
    if point.exact:
        out = []
        for row in Abar.rows:
            f = Fraction(1)
            for pj, e in zip(point.p, row):
                f *= pj**e
            out.append(f)
        return tuple(out)
    return np.exp(point.log_odds(Abar))
