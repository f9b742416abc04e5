"""Exact integer and rational linear algebra.

Everything here works on plain Python ``int`` / :class:`fractions.Fraction`
values so that no intermediate result can overflow. Matrices are passed as
nested sequences (anything with rows that iterate) and returned as tuples
of tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidMatrix, RankDeficient

IntMatrix = tuple[tuple[int, ...], ...]


def as_int_matrix(M) -> IntMatrix:
    rows = []
    for row in M:
        out = []
        for x in row:
            if isinstance(x, (float, np.floating)) or isinstance(x, Fraction):
                if x != int(x):
                    raise InvalidMatrix(f"non-integer entry {x!r}")
            out.append(int(x))
        rows.append(tuple(out))
    if rows and len({len(r) for r in rows}) != 1:
        raise InvalidMatrix("ragged matrix")
    return tuple(rows)


def _identity(k: int) -> list[list[int]]:
    return [[int(i == j) for j in range(k)] for i in range(k)]


def row_echelon(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals.

    Returns the nonzero rows and the pivot column of each.
    """
    R = [[Fraction(x) for x in row] for row in M]
    pivots: list[int] = []
    if not R:
        return R, pivots
    ncols = len(R[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    return R[:r], pivots


def rank_exact(M) -> int:
    return len(row_echelon(M)[1])


def solve_rational(M, b) -> list[Fraction] | None:
    """One solution ``x`` of ``M x = b`` over the rationals, or None.

    Free variables are set to zero.
    """
    aug = [list(row) + [rhs] for row, rhs in zip(M, b)]
    if not aug:
        return []
    ncols = len(aug[0]) - 1
    R, pivots = row_echelon(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, c in zip(R, pivots):
        x[c] = row[-1]
    return x


def det_exact(M) -> Fraction:
    """Determinant by fraction Gaussian elimination."""
    R = [[Fraction(x) for x in row] for row in M]
    k = len(R)
    det = Fraction(1)
    for c in range(k):
        piv = next((i for i in range(c, k) if R[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            R[c], R[piv] = R[piv], R[c]
            det = -det
        det *= R[c][c]
        for i in range(c + 1, k):
            f = R[i][c] / R[c][c]
            if f:
                R[i] = [a - f * b for a, b in zip(R[i], R[c])]
    return det


def matmul(X, Y) -> list[list]:
    Yt = list(zip(*Y))
    return [[sum(a * b for a, b in zip(row, col)) for col in Yt] for row in X]


def check_configuration(A) -> bool:
    """True iff the all-ones vector lies in the rational row span of ``A``."""
    A = as_int_matrix(A)
    if not A:
        return False
    n = len(A[0])
    return rank_exact(list(A) + [(1,) * n]) == rank_exact(A)


@dataclass(frozen=True)
class ConfigMatrix:
    """A ``d x n`` non-negative integer matrix of full row rank.

    ``is_configuration`` records whether ``(1, ..., 1)`` is in the row
    space; code that needs the property checks the flag.
    """

    entries: IntMatrix
    d: int = field(init=False)
    n: int = field(init=False)
    rank: int = field(init=False)
    is_configuration: bool = field(init=False)

    def __init__(self, entries):
        E = as_int_matrix(entries)
        if not E or not E[0]:
            raise InvalidMatrix("empty matrix")
        if any(x < 0 for row in E for x in row):
            raise InvalidMatrix("entries must be non-negative")
        d, n = len(E), len(E[0])
        if any(all(E[j][i] == 0 for j in range(d)) for i in range(n)):
            raise InvalidMatrix("zero column gives an infinite fiber")
        rk = rank_exact(E)
        if rk != d:
            raise RankDeficient(f"rank {rk} < {d} rows")
        object.__setattr__(self, "entries", E)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rank", rk)
        object.__setattr__(self, "is_configuration", check_configuration(E))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def column(self, i: int) -> tuple[int, ...]:
        return tuple(row[i] for row in self.entries)

    def apply(self, u) -> tuple[int, ...]:
        """``A u`` with exact arithmetic (works on ints and Fractions)."""
        return tuple(sum(a * x for a, x in zip(row, u)) for row in self.entries)

    def __repr__(self):
        return f"ConfigMatrix({[list(r) for r in self.entries]})"


def _as_config(A) -> ConfigMatrix:
    return A if isinstance(A, ConfigMatrix) else ConfigMatrix(A)


@dataclass(frozen=True)
class SmithDecomposition:
    S: IntMatrix
    R: IntMatrix
    alphas: tuple[int, ...]

    def diagonal_form(self, n: int) -> IntMatrix:
        d = len(self.alphas)
        return tuple(
            tuple(self.alphas[i] if i == j else 0 for j in range(n)) for i in range(d)
        )


def smith_normal_form(A) -> SmithDecomposition:
    """Smith normal form ``S A R = [diag(alphas) | 0]`` of a full-row-rank matrix.

    Pivoting always takes the nonzero entry of smallest absolute value in
    the active block (first in row-major order on ties); rows are cleared
    before columns. ``S`` and ``R`` are unimodular.
    """
    M = [list(r) for r in as_int_matrix(A)]
    if not M or not M[0]:
        raise InvalidMatrix("empty matrix")
    d, n = len(M), len(M[0])
    if d > n or rank_exact(M) != d:
        raise RankDeficient("matrix must have full row rank d <= n")
    S = _identity(d)
    R = _identity(n)

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        S[i], S[j] = S[j], S[i]

    def swap_cols(i, j):
        for X in (M, R):
            for row in X:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst += q * row src
        M[dst] = [a + q * b for a, b in zip(M[dst], M[src])]
        S[dst] = [a + q * b for a, b in zip(S[dst], S[src])]

    def add_col(dst, src, q):  # col dst += q * col src
        for X in (M, R):
            for row in X:
                row[dst] += q * row[src]

    for t in range(d):
        while True:
            best = None
            for i in range(t, d):
                for j in range(t, n):
                    v = M[i][j]
                    if v and (best is None or abs(v) < abs(M[best[0]][best[1]])):
                        best = (i, j)
            i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
            piv = M[t][t]
            clean = True
            for i in range(t + 1, d):
                q = M[i][t] // piv
                if q:
                    add_row(i, t, -q)
                if M[i][t]:
                    clean = False
            if not clean:
                continue
            for j in range(t + 1, n):
                q = M[t][j] // piv
                if q:
                    add_col(j, t, -q)
                if M[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, d) for j in range(t + 1, n) if M[i][j] % piv),
                None,
            )
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break
        if M[t][t] < 0:
            M[t] = [-x for x in M[t]]
            S[t] = [-x for x in S[t]]
    alphas = tuple(M[t][t] for t in range(d))
    return SmithDecomposition(
        S=tuple(map(tuple, S)), R=tuple(map(tuple, R)), alphas=alphas
    )


def hermite_normal_form(B) -> IntMatrix:
    """Row-style Hermite normal form of the lattice spanned by the rows of ``B``.

    Zero rows are dropped, so two matrices span the same lattice exactly when
    their HNFs are equal.
    """
    M = [list(r) for r in as_int_matrix(B)]
    if not M:
        return ()
    k, n = len(M), len(M[0])
    r = 0
    for c in range(n):
        if r == k:
            break
        while True:
            nz = [i for i in range(r, k) if M[i][c]]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(M[i][c]))
            M[r], M[i0] = M[i0], M[r]
            done = True
            for i in range(r + 1, k):
                if M[i][c]:
                    q = M[i][c] // M[r][c]
                    M[i] = [a - q * b for a, b in zip(M[i], M[r])]
                    if M[i][c]:
                        done = False
            if done:
                break
        if r < k and M[r][c]:
            if M[r][c] < 0:
                M[r] = [-x for x in M[r]]
            for i in range(r):
                q = M[i][c] // M[r][c]
                if q:
                    M[i] = [a - q * b for a, b in zip(M[i], M[r])]
            r += 1
    return tuple(tuple(row) for row in M[:r] if any(row))


def same_lattice(B1, B2) -> bool:
    return hermite_normal_form(B1) == hermite_normal_form(B2)


def _dot(x, y):
    return sum(a * b for a, b in zip(x, y))


def size_reduce(rows) -> IntMatrix:
    """Pairwise size reduction of a lattice basis.

    Repeatedly subtracts the nearest-integer multiple of one row from another
    while that strictly shortens it; the total squared length decreases at
    every accepted move, so it terminates. Rows are then sign-normalized
    (first nonzero entry positive) and sorted by length.
    """
    B = [list(r) for r in rows]
    changed = True
    while changed:
        changed = False
        for i in range(len(B)):
            for j in range(len(B)):
                if i == j:
                    continue
                nj = _dot(B[j], B[j])
                q = round(Fraction(_dot(B[i], B[j]), nj))
                if q:
                    cand = [a - q * b for a, b in zip(B[i], B[j])]
                    if _dot(cand, cand) < _dot(B[i], B[i]):
                        B[i] = cand
                        changed = True
    for row in B:
        lead = next(x for x in row if x)
        if lead < 0:
            row[:] = [-x for x in row]
    B.sort(key=lambda r: (_dot(r, r), [-x for x in r]))
    return tuple(map(tuple, B))


@dataclass(frozen=True)
class GaleTransform:
    """Integer ``(n-d) x n`` matrix whose rows are a basis of ``Ker_Z(A)``."""

    rows: IntMatrix

    @property
    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64).reshape(len(self.rows), -1)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def apply(self, x) -> tuple:
        return tuple(_dot(row, x) for row in self.rows)


def gale_transform(A) -> GaleTransform:
    A = _as_config(A)
    if A.n == A.d:
        return GaleTransform(rows=())
    snf = smith_normal_form(A.entries)
    R = snf.R
    kernel = [tuple(R[i][j] for i in range(A.n)) for j in range(A.d, A.n)]
    return GaleTransform(rows=size_reduce(kernel))


def min_norm_preimage(Abar: GaleTransform, lam: Sequence):
    """``Abar^T (Abar Abar^T)^{-1} lam``.

    Exact (a list of Fractions) when every entry of ``lam`` is an int or
    Fraction, otherwise a float array.
    """
    B = Abar.rows
    k = len(B)
    if len(lam) != k:
        raise ValueError(f"lambda has length {len(lam)}, expected {k}")
    if k == 0:
        raise ValueError("empty Gale transform")
    if all(isinstance(x, (int, Fraction)) for x in lam):
        G = [[_dot(B[i], B[j]) for j in range(k)] for i in range(k)]
        c = solve_rational(G, [Fraction(x) for x in lam])
        n = len(B[0])
        return [sum(c[i] * B[i][j] for i in range(k)) for j in range(n)]
    Bf = np.asarray(B, dtype=float)
    c = np.linalg.solve(Bf @ Bf.T, np.asarray(lam, dtype=float))
    return Bf.T @ c


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def lattice_basis(vectors) -> IntMatrix:
    """Hermite-normal-form basis of the lattice spanned by ``vectors``.

    Vectors are inserted one at a time into an integer echelon basis, so
    the cost is linear in the number of vectors.
    """
    basis: dict[int, list[int]] = {}  # pivot column -> row
    for v in vectors:
        v = [int(x) for x in v]
        while True:
            lead = next((c for c, x in enumerate(v) if x), None)
            if lead is None:
                break
            row = basis.get(lead)
            if row is None:
                basis[lead] = v
                break
            # both rows vanish before `lead`; combine so v loses that entry
            g, s, t = _xgcd(row[lead], v[lead])
            a, b = row[lead] // g, v[lead] // g
            basis[lead] = [s * x + t * y for x, y in zip(row, v)]
            v = [a * y - b * x for x, y in zip(row, v)]
    return hermite_normal_form([basis[c] for c in sorted(basis)])


def two_way_configuration(r: int, c: int) -> ConfigMatrix:
    """``r x c`` tables with fixed row and column sums.

    Cells are in row-major order. Rows of the matrix are the ``r`` row
    indicators followed by the first ``c - 1`` column indicators (the last
    column sum is implied by the total).
    """
    if r < 1 or c < 1:
        raise InvalidMatrix("table dimensions must be positive")
    rows = [[int(i == a) for i in range(r) for _ in range(c)] for a in range(r)]
    rows += [[int(j == b) for _ in range(r) for j in range(c)] for b in range(c - 1)]
    return ConfigMatrix(rows)


def two_way_margins(row_sums: Sequence[int], col_sums: Sequence[int]) -> tuple[int, ...]:
    """The ``beta`` of :func:`two_way_configuration` for the given margins."""
    if sum(row_sums) != sum(col_sums):
        raise ValueError("row and column totals differ")
    return tuple(int(x) for x in row_sums) + tuple(int(x) for x in col_sums[:-1])
