"""Exact enumeration of fibers ``{u in N^n : A u = beta}``.

The search walks the coordinates ``u_1, ..., u_n`` in their natural order,
so points come out in lexicographic order. A coordinate whose column is
not in the span of the columns after it is *determined* by the residual
(one rational linear functional reads it off); only the remaining ``n - d``
*free* coordinates are branched on. The last free coordinate is handled as
a numpy vector, together with all the determined coordinates after it,
which is what keeps large fibers tractable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .errors import FiberTooLarge
from .linalg import ConfigMatrix, rank_exact, solve_rational

DEFAULT_CAP = 10**7


def default_cap() -> int:
    env = os.environ.get("AHG_FIBER_CAP")
    return int(env) if env else DEFAULT_CAP


class _Plan:
    """Per-coordinate data for the search, computed once per matrix."""

    def __init__(self, A: ConfigMatrix):
        E = A.entries
        d, n = A.d, A.n
        cols = [A.column(i) for i in range(n)]
        self.d, self.n = d, n
        self.cols = cols
        self.free = []
        self.ynum: list[tuple[int, ...] | None] = []
        self.den: list[int] = []
        for i in range(n):
            later = cols[i + 1:]
            if later and rank_exact(later + [cols[i]]) == rank_exact(later):
                self.free.append(True)
                self.ynum.append(None)
                self.den.append(1)
                continue
            self.free.append(False)
            y = solve_rational([cols[i]] + later, [1] + [0] * len(later))
            den = math.lcm(*(Fraction(v).denominator for v in y))
            self.ynum.append(tuple(int(v * den) for v in y))
            self.den.append(den)
        # rows that still have a positive entry among columns i..n-1
        self.live_rows = [
            frozenset(j for j in range(d) if any(E[j][l] > 0 for l in range(i, n)))
            for i in range(n + 1)
        ]
        self.bound_rows = [
            tuple((j, E[j][i]) for j in range(d) if E[j][i] > 0) for i in range(n)
        ]
        frees = [i for i in range(n) if self.free[i]]
        self.first_free = frees[0] if frees else -1
        self.last_free = frees[-1] if frees else -1
        self.max_y = max((max(map(abs, y)) for y in self.ynum if y), default=1)
        self.max_a = max(max(row) for row in E)
        self.cols_np = np.array(cols, dtype=np.int64)
        self.tail = self._tail_forms() if self.last_free >= 0 else ()

    def _tail_forms(self) -> tuple[tuple[tuple[int, ...], int], ...]:
        # With v the last free coordinate and r the residual before it, each
        # later (determined) coordinate is x_l = (w . r + g v) / D. Store
        # (w, g) scaled to integers; x_l >= 0 then bounds v.
        d, L = self.d, self.last_free
        Rr = [[Fraction(int(j == k)) for k in range(d)] for j in range(d)]
        Rv = [Fraction(-self.cols[L][j]) for j in range(d)]
        forms = []
        for l in range(L + 1, self.n):
            y, den = self.ynum[l], self.den[l]
            a = [sum(y[j] * Rr[j][k] for j in range(d)) / den for k in range(d)]
            b = sum(y[j] * Rv[j] for j in range(d)) / den
            D = math.lcm(*(x.denominator for x in a + [b]))
            forms.append((tuple(int(x * D) for x in a), int(b * D)))
            col = self.cols[l]
            Rr = [[Rr[j][k] - col[j] * a[k] for k in range(d)] for j in range(d)]
            Rv = [Rv[j] - col[j] * b for j in range(d)]
        return tuple(forms)

    def bound(self, i: int, resid) -> int:
        return min(resid[j] // a for j, a in self.bound_rows[i])

    def dead(self, i: int, resid) -> bool:
        live = self.live_rows[i]
        return any(r < 0 or (r and j not in live) for j, r in enumerate(resid))


_PLANS: dict[tuple, _Plan] = {}


def _plan(A: ConfigMatrix) -> _Plan:
    key = A.entries
    plan = _PLANS.get(key)
    if plan is None:
        plan = _PLANS[key] = _Plan(A)
    return plan


def _check_beta(A: ConfigMatrix, beta) -> tuple[int, ...]:
    b = tuple(int(x) for x in beta)
    if len(b) != A.d:
        raise ValueError(f"beta has length {len(b)}, expected {A.d}")
    return b


def iter_fiber_blocks(
    A: ConfigMatrix, beta, first_range: tuple[int, int] | None = None
) -> Iterator[np.ndarray]:
    """Yield the fiber as consecutive ``(k, n)`` integer arrays in lex order.

    ``first_range = (lo, hi)`` restricts the first free coordinate to
    ``lo <= u_f < hi``; disjoint ranges partition the fiber, which is how
    work is split between processes.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    beta = _check_beta(A, beta)
    plan = _plan(A)
    n = plan.n
    big = max(beta, default=0) + 1
    dtype = np.int64
    if big * plan.max_y * plan.d * plan.max_a >= 2**62:
        dtype = object
    prefix: list[int] = []

    def last_block(i, resid):
        # i is the last free coordinate; everything after it is determined
        ub = plan.bound(i, resid)
        lo, hi = 0, ub + 1
        if first_range is not None and i == plan.first_free:
            lo, hi = max(lo, first_range[0]), min(hi, first_range[1])
        for w, g in plan.tail:
            t = sum(a * r for a, r in zip(w, resid))
            if g > 0:
                lo = max(lo, -(t // g))
            elif g < 0:
                hi = min(hi, t // -g + 1)
            elif t < 0:
                return None
        if hi <= lo:
            return None
        if dtype is object:
            V = np.array(list(range(lo, hi)), dtype=object)
        else:
            V = np.arange(lo, hi, dtype=np.int64)
        R = np.array(resid, dtype=dtype)[None, :] - V[:, None] * np.array(
            plan.cols[i], dtype=dtype
        )
        ok = np.ones(len(V), dtype=bool)
        out = [V]
        for l in range(i + 1, n):
            num = R @ np.array(plan.ynum[l], dtype=dtype)
            den = plan.den[l]
            if den != 1:
                ok &= (num % den) == 0
                x = num // den
            else:
                x = num
            ok &= x >= 0
            R = R - x[:, None] * np.array(plan.cols[l], dtype=dtype)
            out.append(x)
        ok &= np.all(R == 0, axis=1)
        if not ok.any():
            return None
        tail = np.stack(out, axis=1)[ok]
        head = np.broadcast_to(np.array(prefix, dtype=dtype), (len(tail), len(prefix)))
        return np.concatenate([head, tail], axis=1).astype(dtype)

    def walk(i, resid):
        if plan.dead(i, resid):
            return
        if i == n:
            yield np.array([prefix], dtype=dtype)
            return
        if i == plan.last_free:
            block = last_block(i, resid)
            if block is not None:
                yield block
            return
        if plan.free[i]:
            ub = plan.bound(i, resid)
            lo, hi = 0, ub + 1
            if first_range is not None and i == plan.first_free:
                lo, hi = max(lo, first_range[0]), min(hi, first_range[1])
            col = plan.cols[i]
            for v in range(lo, hi):
                prefix.append(v)
                yield from walk(i + 1, [r - v * a for r, a in zip(resid, col)])
                prefix.pop()
        else:
            num = sum(y * r for y, r in zip(plan.ynum[i], resid))
            v, rem = divmod(num, plan.den[i])
            if rem or v < 0:
                return
            col = plan.cols[i]
            prefix.append(v)
            yield from walk(i + 1, [r - v * a for r, a in zip(resid, col)])
            prefix.pop()

    yield from walk(0, list(beta))


def first_free_range(A: ConfigMatrix, beta) -> tuple[int, int]:
    """Value range ``[0, hi)`` that covers the first free coordinate."""
    plan = _plan(A if isinstance(A, ConfigMatrix) else ConfigMatrix(A))
    return (0, max(beta, default=0) + 1) if plan.first_free >= 0 else (0, 1)


@dataclass(frozen=True, eq=False)
class Fiber:
    """The lattice points of ``A u = beta`` in lexicographic order."""

    A: ConfigMatrix
    beta: tuple[int, ...]
    points: np.ndarray

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        for row in self.points.tolist():
            yield tuple(int(x) for x in row)

    def __contains__(self, u):
        u = np.asarray(u)
        return bool(np.any(np.all(self.points == u, axis=1)))

    def max_coordinate(self) -> int:
        return int(self.points.max()) if len(self.points) else 0


def enumerate_fiber(A, beta, cap: int | None = None) -> Fiber:
    """Materialize the fiber; raises FiberTooLarge past ``cap`` points."""
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    beta = _check_beta(A, beta)
    cap = default_cap() if cap is None else cap
    blocks = []
    count = 0
    for block in iter_fiber_blocks(A, beta):
        count += len(block)
        if count > cap:
            raise FiberTooLarge(f"fiber exceeds {cap} points")
        blocks.append(block)
    if blocks:
        pts = np.concatenate(blocks, axis=0)
        if pts.dtype == object and pts.max() < 2**63:
            pts = pts.astype(np.int64)
    else:
        pts = np.zeros((0, A.n), dtype=np.int64)
    return Fiber(A=A, beta=beta, points=pts)


def stream_fiber(
    A, beta, visitor: Callable, blocks: bool = False
) -> int:
    """Visit every fiber point once, in lex order, without storing them.

    ``visitor`` receives each point as a tuple, or whole ``(k, n)`` arrays
    when ``blocks`` is true. Returns the number of points visited.
    """
    count = 0
    for block in iter_fiber_blocks(A, beta):
        count += len(block)
        if blocks:
            visitor(block)
        else:
            for row in block.tolist():
                visitor(tuple(int(x) for x in row))
    return count


def count_fiber(A, beta) -> int:
    return sum(len(b) for b in iter_fiber_blocks(A, beta))
