"""Four equivalent ways to evaluate the solution u(x, t).

fokas       contour form: a real-line integral against u0_hat plus two
            integrals over the two-ray contour, the last one carrying the
            damped boundary transform at time t
ehrenpreis  same, but the boundary transform is taken at a fixed horizon T > t
gauss       image-kernel convolution of u0 plus the boundary layer integral
sine        a single half-line sine-transform integral

Contour integrals at x >= cfg.conditional_below are done by plain truncated
quadrature.  Closer to the boundary (and at x = 0) the transforms are split
by integration by parts: the boundary terms are monomials whose contour
integrals are known, and only a fast-decaying remainder is integrated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import sici

from . import transforms as tr
from .problem import DERIVATIVE_CAP, DomainError, HalfLineProblem, UnsupportedOrder
from .quadrature import (DEFAULT, BoundaryTerm, ContourSpec, QuadratureConfig, QuadResult,
                         SplitIntegrand, contour_tail, fit_radius, integrate_gamma,
                         integrate_gamma_conditional, integrate_interval,
                         integrate_real_damped, real_cutoff)

DX_CAP = 6
DT_CAP = 3
EPS = np.finfo(float).eps


class HorizonError(ValueError):
    """The Ehrenpreis horizon T must exceed the evaluation time."""


@dataclass(frozen=True)
class Representation:
    kind: str
    T: Optional[float] = None

    def __str__(self):
        return self.kind if self.T is None else f"{self.kind}(T={self.T:g})"


FOKAS = Representation("fokas")
GAUSS = Representation("gauss")
SINE = Representation("sine")


def ehrenpreis(T: float) -> Representation:
    return Representation("ehrenpreis", T)


@dataclass
class EvalResult:
    value: float
    est_error: float
    representation: Representation
    x: float
    t: float
    imag: float = 0.0
    log_abs: Optional[float] = None


def _finish(res: QuadResult, scale_sum: float, rep, x, t) -> EvalResult:
    err = float(res.error) + 8 * EPS * scale_sum
    return EvalResult(float(res.value.real), err, rep, x, t, float(res.value.imag))


# --- spectral (contour) forms ----------------------------------------------------

def _spectral(problem: HalfLineProblem, x: float, t: float, H: float,
              alpha: complex, q: int, cfg: QuadratureConfig) -> Tuple[QuadResult, float]:
    """(1/2pi) I1 - (1/2pi) I2 - (i/pi) I3 with multiplier alpha*lam^q.

    I3 uses the boundary transform at horizon H (H = t for the plain form).
    Returns the combined result and a magnitude scale for roundoff.
    """
    u0_zero = problem.u0.is_zero
    g0_zero = problem.g0.is_zero
    total = QuadResult(0j, 0.0)
    scale = 0.0
    if not u0_zero:
        def f1(lam):
            return alpha * lam ** q * np.exp(1j * lam * x - lam * lam * t) * tr.u0_hat(problem, lam)
        r1 = integrate_real_damped(f1, t, cfg, poly_degree=q).scale(1 / (2 * math.pi))
        total = total + r1
        scale += abs(r1.value)
    if u0_zero and g0_zero:
        return total, scale

    shift = H - t

    def f2(lam):
        return alpha * lam ** q * np.exp(1j * lam * x - lam * lam * t) * tr.u0_hat(problem, -lam)

    def f3(lam):
        l2 = lam * lam
        return alpha * lam ** (q + 1) * np.exp(1j * lam * x + l2 * shift) \
            * tr.damped_transform_of(problem.g0, lam, H)

    use_split = x < cfg.conditional_below or x == 0.0
    if not use_split:
        def f(lam):
            acc = 0j
            if not u0_zero:
                acc = acc - f2(lam) / (2 * math.pi)
            if not g0_zero:
                acc = acc - 1j / math.pi * f3(lam)
            return acc
        if cfg.radius:
            R, tail = cfg.radius, contour_tail(f, x, q, cfg.radius)
        else:
            R, tail = fit_radius(f, x, q, target=cfg.abs_tol)
        r = integrate_gamma(f, ContourSpec(R, cfg.nodes_per_unit), cfg)
        r = QuadResult(r.value, r.error + tail)
        return total + r, scale + abs(r.value)

    if not u0_zero:
        r2 = integrate_gamma_conditional(_split_initial(problem, x, t, alpha, q, cfg), None, cfg)
        r2 = r2.scale(-1 / (2 * math.pi))
        total = total + r2
        scale += abs(r2.value)
    if not g0_zero:
        r3 = integrate_gamma_conditional(_split_boundary(problem, x, t, H, alpha, q, cfg), None, cfg)
        r3 = r3.scale(-1j / math.pi)
        total = total + r3
        scale += abs(r3.value)
    return total, scale


def _split_initial(problem, x, t, alpha, q, cfg) -> SplitIntegrand:
    fam = problem.u0
    m = cfg.ibp_depth if cfg.ibp_depth is not None else min(DERIVATIVE_CAP - 1, max(3, q + 4))
    coeffs = [float(fam.derivative(k, 0.0)) for k in range(m + 1)]

    def full(lam):
        return alpha * lam ** q * np.exp(1j * lam * x - lam * lam * t) * tr.u0_hat(problem, -lam)

    def rem(lam):
        # u0_hat(-lam) minus its first m+1 boundary terms
        rho = tr.initial_remainder(fam, m, -lam)
        return alpha * lam ** q * np.exp(1j * lam * x - lam * lam * t) * rho

    terms = [BoundaryTerm(alpha * c * 1j ** (k + 1), q - k - 1, x, t)
             for k, c in enumerate(coeffs) if c != 0]
    return SplitIntegrand(full, rem, terms)


def _split_boundary(problem, x, t, H, alpha, q, cfg) -> SplitIntegrand:
    fam = problem.g0
    if cfg.ibp_depth is not None:
        m = cfg.ibp_depth
    else:
        m = min(DERIVATIVE_CAP - 1, max(2, (q + 4) // 2))
    shift = H - t

    def full(lam):
        return alpha * lam ** (q + 1) * np.exp(1j * lam * x + lam * lam * shift) \
            * tr.damped_transform_of(fam, lam, H)

    def rem(lam):
        d = tr.damped_transform_of(fam, lam, H, m + 1)
        return alpha * (-1) ** (m + 1) * lam ** (q - 2 * m - 1) \
            * np.exp(1j * lam * x + lam * lam * shift) * d

    terms = []
    for k in range(m + 1):
        gh = float(fam.derivative(k, H))
        g0 = float(fam.derivative(k, 0.0))
        sgn = (-1) ** k
        if gh != 0:
            terms.append(BoundaryTerm(alpha * sgn * gh, q - 2 * k - 1, x, -shift))
        if g0 != 0:
            terms.append(BoundaryTerm(-alpha * sgn * g0, q - 2 * k - 1, x, t))
    higher = tr.derived_family(fam, m + 1)
    return SplitIntegrand(full, None if higher is not None and higher.is_zero else rem, terms)


def _check_xt(x: float, t: float, allow_x0: bool = False):
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if x < 0 or (x == 0 and not allow_x0):
        raise DomainError(f"x must be positive, got {x}")


def _dx(problem, n: int, x: float, t: float, cfg) -> EvalResult:
    res, scale = _spectral(problem, x, t, t, 1j ** n, n, cfg)
    return _finish(res, scale, FOKAS, x, t)


def eval_fokas(problem: HalfLineProblem, x: float, t: float,
               cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    _check_xt(x, t)
    return _dx(problem, 0, x, t, cfg)


def _horizon(t: float, T: Optional[float]) -> float:
    T = t + 1.0 if T is None else T
    if not T > t:
        raise HorizonError(f"horizon T={T} must exceed t={t}")
    return T


def eval_ehrenpreis(problem: HalfLineProblem, x: float, t: float, T: Optional[float] = None,
                    cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    T = _horizon(t, T)
    _check_xt(x, t)
    res, scale = _spectral(problem, x, t, T, 1.0, 0, cfg)
    return _finish(res, scale, ehrenpreis(T), x, t)


def eval_dx(problem: HalfLineProblem, n: int, x: float, t: float,
            cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    """n-th x-derivative through the contour form (1 <= n <= 6)."""
    if not 1 <= n <= DX_CAP:
        raise UnsupportedOrder(f"x-derivative order must be in 1..{DX_CAP}")
    _check_xt(x, t)
    return _dx(problem, n, x, t, cfg)


def eval_dt(problem: HalfLineProblem, n: int, x: float, t: float, T: Optional[float] = None,
            cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    """n-th t-derivative through the fixed-horizon form (0 <= n <= 3)."""
    if not 0 <= n <= DT_CAP:
        raise UnsupportedOrder(f"t-derivative order must be in 0..{DT_CAP}")
    T = _horizon(t, T)
    _check_xt(x, t)
    res, scale = _spectral(problem, x, t, T, (-1.0) ** n, 2 * n, cfg)
    return _finish(res, scale, ehrenpreis(T), x, t)


def eval_fokas_at_x0(problem: HalfLineProblem, t: float,
                     cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    """The contour form with x set to exactly 0 (not the limit x -> 0+)."""
    _check_xt(0.0, t, allow_x0=True)
    res, scale = _spectral(problem, 0.0, t, t, 1.0, 0, cfg)
    return _finish(res, scale, FOKAS, 0.0, t)


def eval_ehrenpreis_at_x0(problem: HalfLineProblem, t: float, T: Optional[float] = None,
                          cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    T = _horizon(t, T)
    _check_xt(0.0, t, allow_x0=True)
    res, scale = _spectral(problem, 0.0, t, T, 1.0, 0, cfg)
    return _finish(res, scale, ehrenpreis(T), 0.0, t)


# --- Gauss kernel ------------------------------------------------------------------

def _gauss_parts(problem: HalfLineProblem, x: float, t: float, cfg: QuadratureConfig):
    """Returns (v, err, E) with u = v * exp(-E), so tiny values survive underflow."""
    st = math.sqrt(t)
    fam = problem.u0
    sig0 = x / (2 * st)
    exps = []
    if not fam.is_zero and x > 0:
        lo = max(0.0, x - 14 * st)
        hi = x + 14 * st
        grid = np.linspace(0.0, hi, 4001)
        la, _ = fam.log_abs(grid)
        e_init = -float(np.max(la - (grid - x) ** 2 / (4 * t)))
        exps.append(e_init)
    if not problem.g0.is_zero and x > 0:
        exps.append(sig0 * sig0)
    if not exps:
        return 0.0, 0.0, 0.0
    E = min(exps)
    v = QuadResult(0j, 0.0)

    if not fam.is_zero and x > 0:
        def f_init(s):
            la, sg = fam.log_abs(s)
            ker = np.exp(la - (s - x) ** 2 / (4 * t) + E) * sg
            return ker * -np.expm1(-s * x / t)
        pts = list(np.linspace(0.0, lo, 9)[:-1]) + list(np.linspace(lo, hi, 57))
        r = integrate_interval(f_init, pts, cfg)
        v = v + r.scale(1 / (2 * math.sqrt(math.pi * t)))

    if not problem.g0.is_zero and x > 0:
        g = problem.g0
        L = -sig0 + math.sqrt(sig0 * sig0 + 48.0)
        pref = math.exp(E - sig0 * sig0)

        def f_bdry(s):
            sig = sig0 + s
            arg = t - x * x / (4 * sig * sig)
            return g(np.maximum(arg, 0.0)) * np.exp(-(2 * sig0 * s + s * s))
        width = min(1.0, 0.5 / max(sig0, 1e-300))
        pts = [0.0]
        w = width / 16
        while w < L:
            pts.append(w)
            w *= 2
        pts.append(L)
        r = integrate_interval(f_bdry, pts, cfg)
        v = v + r.scale(2 / math.sqrt(math.pi) * pref)
    return float(v.value.real), float(v.error), E


def eval_gauss(problem: HalfLineProblem, x: float, t: float,
               cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    """Image-kernel form; at x = 0 the boundary integral is 0 by definition."""
    _check_xt(x, t, allow_x0=True)
    v, err, E = _gauss_parts(problem, x, t, cfg)
    scale = math.exp(-E)
    res = EvalResult(v * scale, (err + 8 * EPS * abs(v)) * scale, GAUSS, x, t)
    res.log_abs = (math.log(abs(v)) - E) if v != 0 else -math.inf
    return res


# --- sine transform ------------------------------------------------------------------

def _sin_power_tail(q: int, x: float) -> float:
    """int_1^inf sin(lam x) lam^-q dlam for odd q >= 1, via Si/Ci and recursion."""
    si, ci = sici(x)
    I = -ci + 1j * (math.pi / 2 - si)
    e = complex(math.cos(x), math.sin(x))
    for k in range(2, q + 1):
        I = (e + 1j * x * I) / (k - 1)
    return I.imag


def eval_sine(problem: HalfLineProblem, x: float, t: float,
              cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    _check_xt(x, t, allow_x0=True)
    if x == 0.0:
        return EvalResult(0.0, 0.0, SINE, x, t)
    total = QuadResult(0j, 0.0)
    scale = 0.0
    if not problem.u0.is_zero:
        def fa(lam):
            S = -tr.u0_hat(problem, lam).imag
            return np.sin(lam * x) * np.exp(-lam * lam * t) * S
        L = real_cutoff(t)
        n = int(min(max(8, math.ceil(L * math.sqrt(t) * 4)), 256))
        ra = integrate_interval(fa, np.linspace(0.0, L, n + 1), cfg)
        total = total + ra
        scale += abs(ra.value)
    g = problem.g0
    if not g.is_zero:
        m = cfg.ibp_depth if cfg.ibp_depth is not None else 3

        def fb_full(lam):
            return np.sin(lam * x) * lam * tr.damped_transform_of(g, lam, t)
        total = total + integrate_interval(fb_full, [0.0, 0.5, 1.0], cfg)

        def fb_rem(lam):
            d = tr.damped_transform_of(g, lam, t, m + 1)
            return np.sin(lam * x) * (-1) ** (m + 1) * lam ** (-2 * m - 1) * d
        rem_null = tr.derived_family(g, m + 1)
        if not (rem_null is not None and rem_null.is_zero):
            # |integrand| <= G lam^-(2m+3) with G = max |g0^(m+1)| on [0, t]
            G = float(np.max(np.abs(g.derivative(m + 1, np.linspace(0.0, t, 65)))))
            p2 = 2 * m + 2
            Lr = max(8.0, (G / (p2 * 0.1 * cfg.abs_tol)) ** (1.0 / p2))
            total = total + integrate_interval(fb_rem, np.geomspace(1.0, Lr, 12), cfg)
            total = total + QuadResult(0j, G / (p2 * Lr ** p2))
        for k in range(m + 1):
            sgn = (-1) ** k
            gt, g0 = float(g.derivative(k, t)), float(g.derivative(k, 0.0))
            if gt:
                v = sgn * gt * _sin_power_tail(2 * k + 1, x)
                total = total + QuadResult(v, 0.0)
                scale += abs(v)
            if g0:
                def fd(lam, k=k):
                    return np.sin(lam * x) * np.exp(-lam * lam * t) * lam ** (-2 * k - 1)
                L = max(2.0, real_cutoff(t))
                n = int(min(max(8, math.ceil((L - 1) * math.sqrt(t) * 4)), 256))
                rd = integrate_interval(fd, np.linspace(1.0, L, n + 1), cfg).scale(-sgn * g0)
                total = total + rd
                scale += abs(rd.value)
    total = total.scale(2 / math.pi)
    return _finish(total, 2 / math.pi * scale, SINE, x, t)


# --- dispatch ------------------------------------------------------------------------

def evaluate(problem: HalfLineProblem, rep: Representation, x: float, t: float,
             cfg: QuadratureConfig = DEFAULT) -> EvalResult:
    if rep.kind == "fokas":
        return eval_fokas(problem, x, t, cfg)
    if rep.kind == "ehrenpreis":
        return eval_ehrenpreis(problem, x, t, rep.T, cfg)
    if rep.kind == "gauss":
        return eval_gauss(problem, x, t, cfg)
    if rep.kind == "sine":
        return eval_sine(problem, x, t, cfg)
    raise ValueError(f"unknown representation {rep.kind!r}")
