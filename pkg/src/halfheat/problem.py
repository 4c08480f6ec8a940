"""Data model for the Dirichlet heat problem on the half-line.

Initial data u0(x) and boundary data g0(t) are drawn from a small set of
closed-form families.  Each family knows its derivatives of every order
(up to ``DERIVATIVE_CAP``) exactly, which is what the transform and trace
machinery relies on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import List, Sequence, Tuple

import numpy as np
from numpy.polynomial import hermite as _herm
from numpy.polynomial import polynomial as _poly

DERIVATIVE_CAP = 10

INITIAL = "initial"
BOUNDARY = "boundary"


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class UnsupportedOrder(ValueError):
    """Requested derivative order exceeds ``DERIVATIVE_CAP``."""


@dataclass(frozen=True)
class DataFamily:
    """A named closed-form function of one variable.

    ``kind`` is one of ExpDecay, Gaussian, PolyExp, Constant, ExpGrow, Poly;
    ``params`` holds the family parameters in the order documented in
    :func:`make_family`.
    """

    kind: str
    params: Tuple = ()

    def __post_init__(self):
        k = self.kind
        p = self.params
        if k in ("ExpDecay", "Gaussian"):
            if len(p) != 2 or not p[1] > 0:
                raise ValueError(f"{k} needs (a, b) with b > 0, got {p}")
        elif k == "PolyExp":
            if len(p) != 2 or not p[1] > 0 or len(p[0]) == 0:
                raise ValueError(f"PolyExp needs (coeffs, b) with b > 0, got {p}")
        elif k == "Constant":
            if len(p) != 1:
                raise ValueError(f"Constant needs (c,), got {p}")
        elif k == "ExpGrow":
            if len(p) != 2:
                raise ValueError(f"ExpGrow needs (a, c), got {p}")
        elif k == "Poly":
            if len(p) != 1 or len(p[0]) == 0:
                raise ValueError(f"Poly needs (coeffs,), got {p}")
        else:
            raise ValueError(f"unknown family {k!r}")

    @property
    def initial_admissible(self) -> bool:
        """Rapidly decreasing on [0, inf)."""
        if self.kind in ("ExpDecay", "Gaussian", "PolyExp"):
            return True
        if self.kind == "Constant":
            return self.params[0] == 0
        if self.kind == "ExpGrow":
            return self.params[0] == 0
        return all(c == 0 for c in self.params[0])

    @property
    def is_zero(self) -> bool:
        k, p = self.kind, self.params
        if k in ("ExpDecay", "Gaussian", "ExpGrow"):
            return p[0] == 0
        if k == "Constant":
            return p[0] == 0
        return all(c == 0 for c in p[0])

    def derivative(self, order: int, z):
        """d^order f / dz^order evaluated at z (scalar or array, real or complex)."""
        if order < 0:
            raise ValueError("order must be nonnegative")
        if order > DERIVATIVE_CAP:
            raise UnsupportedOrder(f"order {order} exceeds cap {DERIVATIVE_CAP}")
        z = np.asarray(z)
        k, p = self.kind, self.params
        if k == "ExpDecay":
            a, b = p
            return a * (-b) ** order * np.exp(-b * z)
        if k == "ExpGrow":
            a, c = p
            return a * c ** order * np.exp(c * z)
        if k == "Constant":
            return np.full(z.shape, float(p[0]) if order == 0 else 0.0) + 0 * z
        if k == "Poly":
            cs = np.asarray(p[0], dtype=float)
            d = _poly.polyder(cs, order) if order else cs
            return _poly.polyval(z, d)
        if k == "Gaussian":
            a, b = p
            # d^n/dz^n e^{-b z^2} = (-sqrt b)^n H_n(sqrt b z) e^{-b z^2}
            sb = np.sqrt(b)
            hn = np.zeros(order + 1)
            hn[order] = 1.0
            return a * (-sb) ** order * _herm.hermval(sb * z, hn) * np.exp(-b * z * z)
        if k == "PolyExp":
            cs, b = np.asarray(p[0], dtype=float), p[1]
            acc = 0.0
            for j in range(order + 1):
                dj = _poly.polyder(cs, j) if j else cs
                if not np.any(dj):
                    continue
                acc = acc + comb(order, j) * (-b) ** (order - j) * _poly.polyval(z, dj)
            return acc * np.exp(-b * z)
        raise AssertionError(k)

    def __call__(self, z):
        return self.derivative(0, z)

    def log_abs(self, z):
        """(log|f(z)|, sign f(z)) for real z; lets callers work below the underflow threshold."""
        z = np.asarray(z, dtype=float)
        k, p = self.kind, self.params
        if self.is_zero:
            return np.full(z.shape, -np.inf), np.zeros(z.shape)
        if k in ("ExpDecay", "Gaussian"):
            a, b = p
            expo = -b * z if k == "ExpDecay" else -b * z * z
            return np.log(abs(a)) + expo, np.full(z.shape, np.sign(a))
        if k == "PolyExp":
            pv = _poly.polyval(z, np.asarray(p[0], dtype=float))
            with np.errstate(divide="ignore"):
                return np.log(np.abs(pv)) - p[1] * z, np.sign(pv)
        v = self.derivative(0, z)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(v)), np.sign(v)

    def decay_cutoff(self, order: int = 0, rel: float = 1e-16) -> float:
        """Point beyond which |f^(order)| stays below ``rel`` times its peak on [0, inf).

        Only meaningful for initial-admissible families; returns inf otherwise.
        """
        if not self.initial_admissible:
            return float("inf")
        if self.is_zero:
            return 0.0
        xs = np.linspace(0.0, 200.0, 40001)
        vals = np.abs(self.derivative(order, xs))
        peak = vals.max()
        above = np.nonzero(vals > rel * peak)[0]
        return float(xs[min(above[-1] + 1, xs.size - 1)])


def make_family(kind: str, *params) -> DataFamily:
    """Build a family; list-valued coefficients are frozen into tuples."""
    frozen = tuple(tuple(float(c) for c in v) if isinstance(v, (list, tuple)) else float(v)
                   for v in params)
    return DataFamily(kind, frozen)


def ExpDecay(a: float, b: float) -> DataFamily:
    return make_family("ExpDecay", a, b)


def Gaussian(a: float, b: float) -> DataFamily:
    return make_family("Gaussian", a, b)


def PolyExp(coeffs: Sequence[float], b: float) -> DataFamily:
    return make_family("PolyExp", list(coeffs), b)


def Constant(c: float) -> DataFamily:
    return make_family("Constant", c)


def ExpGrow(a: float, c: float) -> DataFamily:
    return make_family("ExpGrow", a, c)


def Poly(coeffs: Sequence[float]) -> DataFamily:
    return make_family("Poly", list(coeffs))


@dataclass(frozen=True)
class HalfLineProblem:
    u0: DataFamily
    g0: DataFamily
    label: str = ""

    def __post_init__(self):
        if not self.u0.initial_admissible:
            raise ValueError(f"initial data {self.u0.kind} is not rapidly decreasing")


@dataclass
class CompatibilityReport:
    discrepancies: List[Tuple[int, float]] = field(default_factory=list)
    order: int = -1


def eval_data(problem: HalfLineProblem, which: str, order: int, point: float) -> float:
    """Closed-form derivative of the initial (``which='initial'``) or boundary data."""
    if point < 0:
        raise DomainError(f"point {point} < 0")
    if order > DERIVATIVE_CAP:
        raise UnsupportedOrder(f"order {order} exceeds cap {DERIVATIVE_CAP}")
    fam = {INITIAL: problem.u0, BOUNDARY: problem.g0}[which]
    return float(fam.derivative(order, point))


def check_compatibility(problem: HalfLineProblem, max_n: int,
                        tol: float = 1e-10) -> CompatibilityReport:
    disc = []
    for l in range(max_n + 1):
        d = eval_data(problem, INITIAL, 2 * l, 0.0) - eval_data(problem, BOUNDARY, l, 0.0)
        disc.append((l, d))
    order = -1
    for l, d in disc:
        if abs(d) > tol:
            break
        order = l
    return CompatibilityReport(disc, order)


def caloric_problem(a: float = 1.0, b: float = 1.0) -> HalfLineProblem:
    """u0 = a e^{-bx}, g0 = a e^{b^2 t}; solution a e^{b^2 t - b x}."""
    return HalfLineProblem(ExpDecay(a, b), ExpGrow(a, b * b), f"caloric(a={a:g},b={b:g})")


def erfc_problem() -> HalfLineProblem:
    """u0 = 0, g0 = 1; solution erfc(x / (2 sqrt t))."""
    return HalfLineProblem(ExpDecay(0.0, 1.0), Constant(1.0), "erfc")


def gaussian_problem() -> HalfLineProblem:
    return HalfLineProblem(Gaussian(1.0, 1.0), Constant(1.0), "gauss-initial")


def zero_problem() -> HalfLineProblem:
    return HalfLineProblem(ExpDecay(0.0, 1.0), Constant(0.0), "zero")
