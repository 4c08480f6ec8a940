"""Closed-form solutions and a cached evaluation grid shared by the tests."""
import math
from functools import lru_cache

from halfheat import (FOKAS, GAUSS, SINE, caloric_problem, ehrenpreis, erfc_problem, eval_dt,
                      eval_dx, evaluate, gaussian_problem)

XS = (0.1, 0.5, 1.0, 2.0, 5.0)
TS = (0.1, 0.5, 1.0, 2.0)
HORIZON = max(TS) + 1.0
REPS = (FOKAS, ehrenpreis(HORIZON), GAUSS, SINE)


def erfc_series(z: float) -> float:
    """erfc by the Maclaurin series of erf (z < 2) or the Laplace continued fraction."""
    if z < 0:
        return 2.0 - erfc_series(-z)
    if z < 2.0:
        term, total, n = z, z, 0
        while abs(term) > 1e-17 * abs(total):
            n += 1
            term *= -z * z / n
            total += term / (2 * n + 1)
        return 1.0 - 2.0 / math.sqrt(math.pi) * total
    # erfc z = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    f = z
    for k in range(200, 0, -1):
        f = z + (k / 2.0) / f
    return math.exp(-z * z) / math.sqrt(math.pi) / f


# Abramowitz & Stegun table 7.1 values of erfc
ERFC_TABLE = {
    0.1: 0.887537083982,
    0.5: 0.479500122187,
    1.0: 0.157299207050,
    1.5: 0.033894853525,
    2.0: 0.004677734981,
    3.0: 2.20904969986e-5,
}


def caloric_exact(a, b):
    return lambda x, t: a * math.exp(b * b * t - b * x)


def erfc_exact(x, t):
    return erfc_series(x / (2 * math.sqrt(t)))


def gaussian_exact(x, t):
    """u0 = exp(-x^2), g0 = 1."""
    q = 1 + 4 * t
    return erfc_exact(x, t) + math.erf(x / (2 * math.sqrt(t * q))) * math.exp(-x * x / q) \
        / math.sqrt(q)


PROBLEMS = {
    "caloric-b1": (lambda: caloric_problem(1.0, 1.0), caloric_exact(1.0, 1.0)),
    "caloric-b2": (lambda: caloric_problem(1.0, 2.0), caloric_exact(1.0, 2.0)),
    "erfc": (erfc_problem, erfc_exact),
    "gaussian": (gaussian_problem, gaussian_exact),
}


@lru_cache(maxsize=None)
def grid(name):
    """{(x, t): [EvalResult per representation in REPS]}"""
    prob = PROBLEMS[name][0]()
    return {(x, t): [evaluate(prob, rep, x, t) for rep in REPS] for x in XS for t in TS}


@lru_cache(maxsize=None)
def residuals(name):
    """{(x, t): (u_t result, u_xx result)}"""
    prob = PROBLEMS[name][0]()
    return {(x, t): (eval_dt(prob, 1, x, t, HORIZON), eval_dx(prob, 2, x, t))
            for x in XS for t in TS}
