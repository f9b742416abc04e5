"""Conditional MLE for a 7-cell model with an observed table."""

import numpy as np

from ahg.fiber import enumerate_fiber
from ahg.mle import MLEProblem, invert_moment_map, pinned_newton_step

A = [
    [0, 0, 0, 1, 1, 1, 1],
    [1, 0, 0, 1, 0, 1, 0],
    [0, 1, 1, 0, 1, 0, 1],
    [1, 1, 0, 1, 1, 0, 0],
]
u = (19, 132, 9, 11, 52, 6, 97)

prob = MLEProblem.from_data(A, u, mode="pinned")
fib = enumerate_fiber(prob.A, prob.beta)
print("fiber size", len(fib))

p0 = np.array(u) / sum(u)
h, eta, eta_new = pinned_newton_step(prob, p0, fib)
print("E[U] at u/|u|, last three:", eta[4:].round(5))
print("pinned step h            :", h.round(8))
print("E[U] after one step      :", eta_new[4:].round(5))

# the default solver works in reduced coordinates and needs two or three steps
fit = invert_moment_map(MLEProblem.from_data(A, u), fiber=fib)
for t in fit.trace:
    print(f"  iter {t['iteration']}: residual {t['residual']:.3e}")
print("p_hat      :", fit.p_hat.round(6))
print("lambda_hat :", fit.lambda_hat.round(6))
print("log-likelihood", round(fit.loglik, 6))
