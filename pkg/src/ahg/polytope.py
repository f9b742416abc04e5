"""Newton polytopes of fibers and transportation polytopes.

Membership questions are decided by exact rational LPs over the fiber
points themselves, so there is no facet enumeration and no tolerance:
a point is on the boundary exactly when the best uniform weight is 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dist import parse_rational
from .errors import DegenerateDimension, EmptyFiber
from .fiber import Fiber, enumerate_fiber
from .linalg import ConfigMatrix, IntMatrix, lattice_basis
from .lp import LPProblem, LPResult, max_uniform_slack, simplex_max  # noqa: F401


@dataclass(frozen=True, eq=False)
class SupportPolytope:
    """``conv(support)`` for the support of ``Z``, i.e. the fiber.

    ``affine_basis`` is a lattice basis (HNF) of the differences
    ``u - u_0``; its length is the affine dimension.
    """

    support: np.ndarray
    dim: int
    affine_basis: IntMatrix

    @property
    def n(self) -> int:
        return self.support.shape[1]


def newton_polytope(A, beta, fiber: Fiber | None = None) -> SupportPolytope:
    if fiber is None:
        fiber = enumerate_fiber(A, beta)
    if len(fiber) == 0:
        raise EmptyFiber(f"beta={tuple(beta)} is not in NA")
    pts = fiber.points
    diffs = (pts[1:] - pts[0]).tolist()
    basis = lattice_basis(diffs)
    return SupportPolytope(support=pts, dim=len(basis), affine_basis=basis)


def _rational_vector(x) -> list[Fraction]:
    return [parse_rational(v) for v in x]


def relint_member(poly: SupportPolytope, eta: Sequence) -> bool:
    """True iff ``eta`` is a strictly positive convex combination of the support."""
    eta = _rational_vector(eta)
    if len(eta) != poly.n:
        raise ValueError(f"eta has length {len(eta)}, expected {poly.n}")
    pts = poly.support.tolist()
    if len(pts) == 1:
        return eta == [Fraction(x) for x in pts[0]]
    cols = [list(u) + [1] for u in pts]
    res = max_uniform_slack(cols, eta + [Fraction(1)])
    return res.is_optimal and res.optimum > 0


def cone_interior(A, beta) -> bool:
    """True iff ``beta = A x`` for some ``x > 0``, i.e. ``beta in int(R>=0 A)``."""
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    cols = [A.column(i) for i in range(A.n)]
    res = max_uniform_slack(cols, _rational_vector(beta))
    return res.is_optimal and res.optimum > 0


def transportation_relint(A, beta, eta: Sequence) -> bool:
    """Relative-interior test for ``{eta >= 0 : A eta = beta}``.

    Only meaningful when that polytope has dimension ``n - d``; otherwise
    some coordinate vanishes on the whole polytope and DegenerateDimension
    is raised.
    """
    if not isinstance(A, ConfigMatrix):
        A = ConfigMatrix(A)
    if not cone_interior(A, beta):
        raise DegenerateDimension(
            f"transportation polytope of beta={tuple(beta)} has dimension < n - d"
        )
    eta = _rational_vector(eta)
    if len(eta) != A.n:
        return False
    return A.apply(eta) == tuple(Fraction(b) for b in beta) and all(x > 0 for x in eta)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> list[tuple]:
    """Counterclockwise hull vertices from the lexicographic minimum.

    Exact (monotone chain); collinear points are dropped. One or two points
    come back for degenerate inputs.
    """
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def project_hull_2d(poly: SupportPolytope, i: int, j: int | None = None) -> list[tuple]:
    """Hull of the support projected to coordinates ``(u_i, u_j)``.

    With ``j=None`` the projection is one-dimensional and the result is the
    pair of interval endpoints as 1-tuples.
    """
    if j is None:
        col = poly.support[:, i]
        lo, hi = int(col.min()), int(col.max())
        return [(lo,)] if lo == hi else [(lo,), (hi,)]
    proj = {(int(a), int(b)) for a, b in poly.support[:, [i, j]].tolist()}
    return convex_hull_2d(proj)
