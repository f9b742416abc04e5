"""Terminating F_D as the normalizing constant of 2 x (m+1) tables."""

from fractions import Fraction

from ahg.dist import ModelPoint, summarize
from ahg.lauricella import FDParams, fd_eval, fd_moment_map, fd_normalizing_constant, fd_table

params = FDParams(a=-36, b=(-11,), c=2)
for z in (Fraction(1, 10), 1, 10):
    eta = fd_moment_map(params, [z])[0]
    print(f"z = {z}: F_D = {float(fd_eval(params, [z])):.6g}, eta = {float(eta):.4f}")

# the same number from enumerating tables; mu is the base table
params = FDParams(a=-4, b=(-2, -3), c=2)
A, beta, mu = fd_table(params)
print("base table", mu, "margins", beta)
p = [1, Fraction(2, 3), 3, Fraction(1, 2), 5, 1]
Z_fd = fd_normalizing_constant(params, p)
Z_fiber = summarize(A, beta, ModelPoint(p), moments=False).Z
print("Z via F_D  :", Z_fd)
print("Z by fiber :", Z_fiber, "(equal)" if Z_fd == Z_fiber else "(DIFFERENT)")
