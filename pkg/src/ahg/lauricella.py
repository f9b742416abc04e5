"""Terminating Lauricella ``F_D`` and the ``2 x (m+1)`` tables it counts.

For non-positive integers ``a, b_1..b_m`` and a positive integer ``c``

    F_D(a, b, c; z) = sum_k (a)_|k| prod (b_i)_k_i / ((c)_|k| prod k_i!) z^k

is a polynomial. It is the normalizing constant of ``2 x (m+1)`` tables with
base point ``mu = [[-a, 0, ..., 0], [c-1, -b_1, ..., -b_m]]``, up to the
monomial ``p^mu`` and a constant (``1/mu!``), with
``z_i = p_{0i} p_{10} / (p_{00} p_{1i})``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .dist import parse_rational
from .errors import NonTerminating
from .linalg import ConfigMatrix, two_way_configuration, two_way_margins


@dataclass(frozen=True)
class FDParams:
    a: int
    b: tuple[int, ...]
    c: int

    def __post_init__(self):
        for name, v in (("a", self.a), ("c", self.c), *((f"b{i}", x) for i, x in enumerate(self.b))):
            if int(v) != v:
                raise NonTerminating(f"{name}={v} is not an integer")
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if self.a > 0 or any(x > 0 for x in self.b):
            raise NonTerminating("a and every b_i must be non-positive integers")
        if self.c < 1:
            raise NonTerminating("c must be a positive integer")
        if not self.b:
            raise ValueError("need at least one variable")

    @property
    def m(self) -> int:
        return len(self.b)


def pochhammer(x: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= x + j
    return out


@lru_cache(maxsize=64)
def fd_coefficients(params: FDParams) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
    """Nonzero ``(k, coefficient)`` pairs of the polynomial."""
    top = -params.a
    out = []
    for k in itertools.product(*(range(-bi + 1) for bi in params.b)):
        s = sum(k)
        if s > top:
            continue
        num = pochhammer(params.a, s)
        den = pochhammer(params.c, s)
        for bi, ki in zip(params.b, k):
            num *= pochhammer(bi, ki)
            den *= math.factorial(ki)
        if num:
            out.append((k, Fraction(num, den)))
    return tuple(out)


def _z(params: FDParams, z) -> list[Fraction]:
    z = [parse_rational(x) for x in z]
    if len(z) != params.m:
        raise ValueError(f"expected {params.m} arguments, got {len(z)}")
    return z


def _monomial(z, k) -> Fraction:
    out = Fraction(1)
    for zi, ki in zip(z, k):
        if ki:
            out *= zi**ki
    return out


def fd_eval(params: FDParams, z: Sequence) -> Fraction:
    z = _z(params, z)
    return sum((c * _monomial(z, k) for k, c in fd_coefficients(params)), Fraction(0))


def fd_gradient(params: FDParams, z: Sequence) -> list[Fraction]:
    """``dF_D/dz_i`` by termwise differentiation."""
    z = _z(params, z)
    grad = [Fraction(0)] * params.m
    for k, c in fd_coefficients(params):
        for i, ki in enumerate(k):
            if ki:
                kk = list(k)
                kk[i] -= 1
                grad[i] += c * ki * _monomial(z, kk)
    return grad


def fd_moment_map(params: FDParams, z: Sequence) -> tuple[Fraction, ...]:
    """``eta_i = z_i (dF_D/dz_i) / F_D``."""
    z = _z(params, z)
    if any(x <= 0 for x in z):
        raise ValueError("z must be positive")
    F = Fraction(0)
    acc = [Fraction(0)] * params.m
    for k, c in fd_coefficients(params):
        t = c * _monomial(z, k)
        F += t
        for i, ki in enumerate(k):
            acc[i] += ki * t
    return tuple(x / F for x in acc)


def fd_polytope_member(params: FDParams, eta: Sequence) -> bool:
    """Strict inequalities ``0 < eta_i < -b_i`` and ``sum eta_i < -a``."""
    try:
        eta = [parse_rational(x) for x in eta]
    except (TypeError, ValueError):
        return False
    if len(eta) != params.m:
        return False
    return all(0 < e < -bi for e, bi in zip(eta, params.b)) and sum(eta) < -params.a


# -- the table model ---------------------------------------------------------


def fd_base_table(params: FDParams) -> list[list[int]]:
    return [[-params.a] + [0] * params.m, [params.c - 1] + [-x for x in params.b]]


def fd_table(params: FDParams) -> tuple[ConfigMatrix, tuple[int, ...], tuple[int, ...]]:
    """``(A, beta, mu)`` for the ``2 x (m+1)`` table; ``mu`` is row-major."""
    mu = fd_base_table(params)
    rows = [sum(r) for r in mu]
    cols = [mu[0][j] + mu[1][j] for j in range(params.m + 1)]
    A = two_way_configuration(2, params.m + 1)
    return A, two_way_margins(rows, cols), tuple(mu[0] + mu[1])


def fd_z_from_p(p: Sequence, m: int) -> list[Fraction]:
    """``z_i = p_{0i} p_{10} / (p_{00} p_{1i})`` for row-major ``p``."""
    p = [parse_rational(x) for x in p]
    if len(p) != 2 * (m + 1):
        raise ValueError(f"expected {2 * (m + 1)} cell parameters")
    top, bot = p[: m + 1], p[m + 1 :]
    return [top[i] * bot[0] / (top[0] * bot[i]) for i in range(1, m + 1)]


def fd_constant(params: FDParams) -> Fraction:
    """Factor ``C`` in ``Z = C p^mu F_D``; equals ``1/mu!``."""
    den = 1
    for x in fd_base_table(params)[0] + fd_base_table(params)[1]:
        den *= math.factorial(x)
    return Fraction(1, den)


def fd_normalizing_constant(params: FDParams, p: Sequence) -> Fraction:
    p = [parse_rational(x) for x in p]
    _, _, mu = fd_table(params)
    return fd_constant(params) * _monomial(p, mu) * fd_eval(params, fd_z_from_p(p, params.m))


def fd_table_moments(params: FDParams, p: Sequence) -> tuple[Fraction, ...]:
    """``E[U]`` on the table (row-major) from ``eta = fd_moment_map``."""
    eta = fd_moment_map(params, fd_z_from_p(p, params.m))
    s = sum(eta)
    top = [-params.a - s, *eta]
    bot = [params.c - 1 + s, *(-bi - e for bi, e in zip(params.b, eta))]
    return tuple(Fraction(x) for x in top + bot)
