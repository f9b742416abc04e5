"""log Z(k beta) against its closed-form asymptotic estimate."""

import math
from fractions import Fraction

from ahg.asymptotics import approx_log_probability, approx_log_Z
from ahg.dist import ModelPoint, probability
from ahg.linalg import two_way_configuration, two_way_margins

A = two_way_configuration(2, 4)
beta = two_way_margins((4, 19), (9, 5, 3, 6))
p = [1, Fraction(1, 3), Fraction(1, 2), Fraction(1, 5001), 1, 1, 1, 1]

print(f"{'k':>4} {'fiber':>9} {'exact':>14} {'approx':>14} {'diff':>8}")
for k in (1, 2, 4, 9, 20):
    r = approx_log_Z(A, None, beta, p, k)
    exact = "" if r.exact_logZ is None else f"{r.exact_logZ:14.4f}"
    diff = "" if r.error is None else f"{r.error:8.4f}"
    print(f"{k:>4} {r.fiber_size or '':>9} {exact:>14} {r.approx_logZ:14.4f} {diff}")

# far out only the formula is cheap
for k in (200, 300):
    print(f"k={k}: approx log Z = {approx_log_Z(A, None, beta, p, k, exact=False).approx_logZ:.4f}")

# plugging the estimate into a single probability shows how much the error matters
u = (33, 1, 1, 1, 48, 44, 26, 53)
rep = approx_log_Z(A, None, beta, p, 9)
exact = float(probability(A, tuple(9 * b for b in beta), ModelPoint(p), u))
est = math.exp(approx_log_probability(u, p, rep))
print(f"P(u) exact {exact:.6g}, from the estimate {est:.6g}, ratio {est / exact:.2f}")
