"""A 2 x 2 table with fixed margins: exact moments, IPS, torus invariance."""

from fractions import Fraction

from ahg import ModelPoint, gale_transform, ips_solve, moment_map
from ahg.linalg import two_way_configuration, two_way_margins

A = two_way_configuration(2, 2)          # cells u11 u12 u21 u22
beta = two_way_margins((36, 12), (37, 11))
print("A =", A.entries, " beta =", beta)

# with all cell parameters equal, E[U] is the hypergeometric mean
print("E[U], p = 1      :", [str(x) for x in moment_map(A, beta, ModelPoint([1, 1, 1, 1]))])

# doubling p11 tilts the distribution; the answer is still an exact rational
eta = moment_map(A, beta, ModelPoint([2, 1, 1, 1]))
print("E[U], p11 = 2    :", [str(x) for x in eta])
print("  as floats      :", [round(float(x), 6) for x in eta])

# rescaling rows and columns of p changes nothing
moved = ModelPoint([2, 1, 1, 1]).torus_act(A, [3, Fraction(1, 7), 5])
print("after torus act  :", moment_map(A, beta, moved) == eta)

# IPS finds the table with these margins and odds ratio 2 (a different object from E[U])
G = gale_transform(A)
res = ips_solve(A, G, beta, ModelPoint([2, 1, 1, 1]).log_odds(G))
m = res.m
print("IPS limit m      :", m.round(6), f"in {res.sweeps} sweeps")
print("odds ratio of m  :", m[0] * m[3] / (m[1] * m[2]))
print("m11^2 - 121 m11 + 2664 =", m[0] ** 2 - 121 * m[0] + 2664)
