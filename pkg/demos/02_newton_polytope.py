"""Where can a moment vector live?  Newton polytope vs transportation polytope."""

from fractions import Fraction

from ahg import ModelPoint, moment_map
from ahg.linalg import ConfigMatrix, two_way_configuration, two_way_margins
from ahg.polytope import newton_polytope, project_hull_2d, relint_member, transportation_relint

# 2 x 3 tables with rows (21, 7) and columns (12, 5, 11)
A = two_way_configuration(2, 3)
poly = newton_polytope(A, two_way_margins((21, 7), (12, 5, 11)))
print("support size", len(poly.support), "dimension", poly.dim)
print("shadow on (u11, u23):", project_hull_2d(poly, 0, 5))

# two-way tables are totally unimodular, so both polytopes agree.
# This matrix is not: the fiber of (4, 3) has just two points.
B = ConfigMatrix([[1, 1, 1], [0, 1, 2]])
small = newton_polytope(B, (4, 3))
print("fiber:", [tuple(u) for u in small.support.tolist()])
eta = (Fraction(11, 5), Fraction(3, 5), Fraction(6, 5))
print("A eta = beta:", B.apply(eta))
print("inside transportation polytope:", transportation_relint(B, (4, 3), eta))
print("inside Newton polytope       :", relint_member(small, eta))

# no p can reach it; every actual moment vector lies on the segment
for p in ([1, 1, 1], [1, 5, 1], [7, 1, 2]):
    e = moment_map(B, (4, 3), ModelPoint(p))
    print(f"p={p}: E[U] = {[str(x) for x in e]}  in Newton relint: {relint_member(small, e)}")
