"""Revised two-phase simplex over the rationals.

Problems are ``maximize c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0``.
Infeasible and unbounded problems are reported through ``LPResult.status``
rather than raised.

Only the ``m x m`` basis inverse is kept (as Fractions); reduced costs are
priced with integer dot products after scaling rows and duals to a common
denominator, so long LPs with few rows (the membership tests, which have
one column per fiber point) stay cheap. Entering columns follow Dantzig's
rule; after a run of degenerate pivots the solver switches to Bland's rule
for good, which guarantees termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPProblem:
    c: Sequence
    A_eq: Sequence[Sequence] = ()
    b_eq: Sequence = ()
    A_ub: Sequence[Sequence] = ()
    b_ub: Sequence = ()

    def __post_init__(self):
        nv = len(self.c)
        for name, M, b in (("eq", self.A_eq, self.b_eq), ("ub", self.A_ub, self.b_ub)):
            if len(M) != len(b):
                raise ValueError(f"A_{name} has {len(M)} rows but b_{name} has {len(b)}")
            if any(len(row) != nv for row in M):
                raise ValueError(f"A_{name} rows must have {nv} entries")

    @property
    def num_vars(self) -> int:
        return len(self.c)


@dataclass
class LPResult:
    status: str
    optimum: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _int_rows(rows, rhs):
    """Scale each row (with its rhs) to integers; flip rows with negative rhs."""
    out_rows, out_rhs = [], []
    for row, b in zip(rows, rhs):
        row = [Fraction(x) for x in row]
        b = Fraction(b)
        L = math.lcm(b.denominator, *(x.denominator for x in row))
        s = -L if b < 0 else L
        out_rows.append([int(x * s) for x in row])
        out_rhs.append(b * s)
    return out_rows, out_rhs


class _Revised:
    def __init__(self, cols: list[list[int]], rhs: list[Fraction]):
        m = len(rhs)
        self.m = m
        self.N = len(cols)
        # artificial columns N..N+m-1 form the starting basis
        self.cols = cols + [[int(i == j) for i in range(m)] for j in range(m)]
        self.basis = list(range(self.N, self.N + m))
        self.binv = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
        self.xb = list(rhs)
        self.pivots = 0

    def _column(self, j):
        a = self.cols[j]
        nz = [(k, v) for k, v in enumerate(a) if v]
        return [sum((row[k] * v for k, v in nz), Fraction(0)) for row in self.binv]

    def _duals(self, cost):
        cb = [cost[b] for b in self.basis]
        pi = [sum((cb[i] * self.binv[i][k] for i in range(self.m) if cb[i]), Fraction(0)) for k in range(self.m)]
        D = math.lcm(*(p.denominator for p in pi)) if pi else 1
        return [int(p * D) for p in pi], D

    def _pivot(self, r, j, w):
        piv = w[r]
        row_r = [x / piv for x in self.binv[r]]
        xr = self.xb[r] / piv
        for i in range(self.m):
            if i == r or not w[i]:
                continue
            f = w[i]
            self.binv[i] = [a - f * b for a, b in zip(self.binv[i], row_r)]
            self.xb[i] -= f * xr
        self.binv[r] = row_r
        self.xb[r] = xr
        self.basis[r] = j
        self.pivots += 1

    def run(self, cost: list[int], allowed: range) -> bool:
        """Maximize over columns in ``allowed`` (integer ``cost``); False if unbounded."""
        bland = False
        degenerate = 0
        in_basis = set(self.basis)
        while True:
            pi, D = self._duals(cost)
            best, best_val = None, 0
            for j in allowed:
                if j in in_basis:
                    continue
                a = self.cols[j]
                red = cost[j] * D - sum(p * v for p, v in zip(pi, a) if v)
                if red > 0:
                    if bland:
                        best = j
                        break
                    if red > best_val:
                        best, best_val = j, red
            if best is None:
                return True
            w = self._column(best)
            r, ratio = None, None
            for i in range(self.m):
                if w[i] > 0:
                    q = self.xb[i] / w[i]
                    if r is None or q < ratio or (q == ratio and self.basis[i] < self.basis[r]):
                        r, ratio = i, q
            if r is None:
                return False
            if ratio == 0:
                degenerate += 1
                if degenerate > 2 * self.m:
                    bland = True
            else:
                degenerate = 0
            in_basis.discard(self.basis[r])
            in_basis.add(best)
            self._pivot(r, best, w)


def simplex_max(lp: LPProblem) -> LPResult:
    nv = lp.num_vars
    n_ub = len(lp.A_ub)
    rows = [list(r) + [int(k == i) for k in range(n_ub)] for i, r in enumerate(lp.A_ub)]
    rows += [list(r) + [0] * n_ub for r in lp.A_eq]
    rhs = list(lp.b_ub) + list(lp.b_eq)
    n_struct = nv + n_ub
    if not rows:
        if any(Fraction(c) > 0 for c in lp.c):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, optimum=Fraction(0), x=tuple(Fraction(0) for _ in range(nv)))
    rows, rhs = _int_rows(rows, rhs)
    m = len(rows)
    cols = [[rows[i][j] for i in range(m)] for j in range(n_struct)]
    T = _Revised(cols, rhs)

    # phase 1: maximize -(sum of artificials)
    T.run([0] * n_struct + [-1] * m, range(n_struct + m))
    art = range(n_struct, n_struct + m)
    if any(T.xb[i] > 0 for i, b in enumerate(T.basis) if b in art):
        return LPResult(INFEASIBLE, pivots=T.pivots)
    # drive zero-level artificials out where possible; the rest sit on redundant rows
    for r in range(m):
        if T.basis[r] in art:
            in_basis = set(T.basis)
            D = math.lcm(*(x.denominator for x in T.binv[r]))
            br = [int(x * D) for x in T.binv[r]]
            for j in range(n_struct):
                if j not in in_basis and sum(p * v for p, v in zip(br, T.cols[j]) if v):
                    T._pivot(r, j, T._column(j))
                    break

    cf = [Fraction(x) for x in lp.c]
    L = math.lcm(*(x.denominator for x in cf)) if cf else 1
    cost2 = [int(x * L) for x in cf] + [0] * (n_ub + m)
    if not T.run(cost2, range(n_struct)):
        return LPResult(UNBOUNDED, pivots=T.pivots)
    x = [Fraction(0)] * n_struct
    for i, b in enumerate(T.basis):
        if b < n_struct:
            x[b] = T.xb[i]
    opt = sum((c * xi for c, xi in zip(cf, x[:nv])), Fraction(0))
    return LPResult(OPTIMAL, optimum=opt, x=tuple(x[:nv]), pivots=T.pivots)


def max_uniform_slack(columns: Sequence[Sequence], target: Sequence) -> LPResult:
    """Largest ``eps >= 0`` with ``sum_k x_k columns[k] = target``, ``x_k >= eps``.

    Writing ``x_k = s_k + eps`` keeps the problem at ``len(target)``
    equality rows no matter how many columns there are. ``x = (s, eps)`` in
    the result.
    """
    K = len(columns)
    dim = len(target)
    tot = [sum(col[i] for col in columns) for i in range(dim)]
    A_eq = [[col[i] for col in columns] + [tot[i]] for i in range(dim)]
    c = [0] * K + [1]
    return simplex_max(LPProblem(c=c, A_eq=A_eq, b_eq=list(target)))
