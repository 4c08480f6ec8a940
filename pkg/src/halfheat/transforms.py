"""Transforms of the data: the half-line Fourier transform of u0, the
boundary transform of g0 and its damped form, and the integration-by-parts
expansions that peel off their large-|lam| behaviour.

    u0_hat(lam)            = int_0^inf u0(x) exp(-i lam x) dx,      Im lam <= 0
    g0_tilde(lam, t)       = int_0^t exp(lam^2 tau) g0(tau) dtau
    g0_tilde_damped(lam,t) = exp(-lam^2 t) g0_tilde(lam, t),        Re lam^2 >= 0
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.special import wofz

from .problem import DataFamily, DomainError, HalfLineProblem
from .quadrature import (DEFAULT, QuadratureConfig, ToleranceNotMet,
                         integrate_real_damped, _gl)

EPS = np.finfo(float).eps
DEFAULT_U0_DEPTH = 3
DEFAULT_G0_DEPTH = 2
OVERFLOW_EXPONENT = 700.0


def derived_family(fam: DataFamily, n: int) -> Optional[DataFamily]:
    """The n-th derivative as a family, when the family is closed under d/dz."""
    k, p = fam.kind, fam.params
    if n == 0:
        return fam
    if k == "ExpDecay":
        return DataFamily(k, (p[0] * (-p[1]) ** n, p[1]))
    if k == "ExpGrow":
        return DataFamily(k, (p[0] * p[1] ** n, p[1]))
    if k == "Constant":
        return DataFamily(k, (0.0,))
    if k == "Poly":
        d = np.polynomial.polynomial.polyder(np.asarray(p[0]), n)
        return DataFamily(k, (tuple(float(c) for c in d) or (0.0,),))
    if k == "PolyExp":
        cs, b = np.asarray(p[0]), p[1]
        for _ in range(n):
            d = np.polynomial.polynomial.polyder(cs)
            cs = np.pad(d, (0, cs.size - d.size)) - b * cs
        return DataFamily(k, (tuple(float(c) for c in cs), b))
    return None


# --- initial data --------------------------------------------------------------

def _u0_hat_closed(fam: DataFamily, lam: np.ndarray) -> Optional[np.ndarray]:
    k, p = fam.kind, fam.params
    if fam.is_zero:
        return np.zeros(lam.shape, dtype=complex)
    if k == "ExpDecay":
        return p[0] / (p[1] + 1j * lam)
    if k == "PolyExp":
        z = p[1] + 1j * lam
        acc = np.zeros(lam.shape, dtype=complex)
        for j, c in enumerate(p[0]):
            if c:
                acc += c * math.factorial(j) / z ** (j + 1)
        return acc
    if k == "Gaussian":
        a, b = p
        sb = math.sqrt(b)
        # int_0^inf e^{-b x^2 - i lam x} dx = (1/2) sqrt(pi/b) w(-lam / (2 sqrt b))
        return a * 0.5 * math.sqrt(math.pi / b) * wofz(-lam / (2 * sb))
    return None


def _oscillatory_half_line(f: Callable, lam: np.ndarray, X: float) -> np.ndarray:
    """int_0^X f(x) exp(-i lam x) dx for each lam, fixed composite Gauss-Legendre.

    Panel count resolves the oscillation and is doubled once to check.
    """
    out = np.empty(lam.shape, dtype=complex)
    flat_l = lam.ravel()
    res = out.ravel()
    xg, wg = _gl(16)

    def rule(lv, panels):
        edges = np.linspace(0.0, X, panels + 1)
        h = 0.5 * (edges[1:] - edges[:-1])
        pts = (0.5 * (edges[1:] + edges[:-1])[:, None] + h[:, None] * xg[None, :]).ravel()
        w = (h[:, None] * wg[None, :]).ravel()
        fv = f(pts) * w
        return np.exp(-1j * np.outer(lv, pts)) @ fv

    for i, lv in enumerate(flat_l):
        freq = abs(lv.real) + abs(lv.imag) + 1.0
        panels = int(max(8, math.ceil(freq * X / 2.0)))
        a = rule(np.array([lv]), panels)[0]
        b = rule(np.array([lv]), 2 * panels)[0]
        if abs(a - b) > 1e-11 * max(1.0, abs(b)):
            raise ToleranceNotMet(f"half-line transform at lam={lv} did not settle")
        res[i] = b
    return res.reshape(lam.shape)


def deferred_initial(fam: DataFamily, m: int, lam) -> np.ndarray:
    """int_0^inf exp(-i lam x) u0^(m+1)(x) dx, the integral left after m+1 integrations by parts."""
    lam = np.asarray(lam, dtype=complex)
    der = derived_family(fam, m + 1)
    if der is not None:
        closed = _u0_hat_closed(der, lam)
        if closed is not None:
            return closed
    X = fam.decay_cutoff(m + 1)
    return _oscillatory_half_line(lambda x: fam.derivative(m + 1, x), lam, X)


_ORIGIN_CACHE: dict = {}


def _origin_derivatives(fam: DataFamily, count: int) -> Optional[np.ndarray]:
    """u0^(n)(0) for n < count, past the user-facing order cap; Gaussian only."""
    if fam.kind != "Gaussian":
        return None
    key = (fam.params, count)
    if key not in _ORIGIN_CACHE:
        a, b = fam.params
        # H_2k(0) = (-1)^k (2k)! / k!, odd orders vanish
        c = np.zeros(count)
        for k in range((count + 1) // 2):
            c[2 * k] = a * b ** k * (-1) ** k * math.factorial(2 * k) / math.factorial(k)
        _ORIGIN_CACHE[key] = c
    return _ORIGIN_CACHE[key]


SERIES_EXTRA = 48


def initial_remainder(fam: DataFamily, m: int, lam) -> np.ndarray:
    """u0_hat(lam) minus sum_{n<=m} u0^(n)(0) / (i lam)^(n+1).

    With a closed-form transform available the remainder is, by preference,
    the continued asymptotic series (far out, summed to its smallest term)
    or the closed form minus the leading terms (when that subtraction keeps
    nine digits); elsewhere the deferred integral is computed directly.
    """
    lam = np.asarray(lam, dtype=complex)
    der = derived_family(fam, m + 1)
    whole = _u0_hat_closed(fam, lam)
    if (der is not None and _u0_hat_closed(der, lam) is not None) or whole is None:
        return deferred_initial(fam, m, lam) / (1j * lam) ** (m + 1)
    c = _origin_derivatives(fam, m + 1 + SERIES_EXTRA)
    if c is None:
        c = np.array([float(fam.derivative(n, 0.0)) for n in range(m + 2)])
    flat = lam.reshape(-1)
    pw = (1j * flat[:, None]) ** -(np.arange(c.size) + 1.0)[None, :]
    terms = c[None, :] * pw
    head, tail = terms[:, :m + 1], terms[:, m + 1:]
    mag = np.abs(tail)
    # the series is asymptotic: stop at its smallest term
    stop = np.argmin(np.where(mag > 0, mag, np.inf), axis=1)
    keep = np.arange(tail.shape[1])[None, :] <= stop[:, None]
    series = np.where(keep, tail, 0).sum(axis=1)
    series_ok = mag[np.arange(flat.size), stop] <= 1e-16 * np.abs(series)
    diff = whole.reshape(-1) - head.sum(axis=1)
    size = np.abs(head).sum(axis=1)
    # subtraction loses about eps * size in absolute terms
    sub_ok = 4 * EPS * size <= 1e-9 * np.abs(diff)
    out = np.where(series_ok, series, diff)
    rest = ~series_ok & ~sub_ok
    if rest.any():
        out[rest] = deferred_initial(fam, m, flat[rest]) / (1j * flat[rest]) ** (m + 1)
    return out.reshape(lam.shape)


@dataclass
class IbpExpansion:
    """Boundary terms of an integration-by-parts expansion plus its remainder.

    For the initial transform ``terms[n] = u0^(n)(0)`` and the expansion is
    sum_n terms[n] / (i lam)^(n+1) + remainder(lam).  For the damped boundary
    transform ``terms[n] = (g0^(n)(t), g0^(n)(0))`` and the expansion is
    sum_n (-1)^n [g0^(n)(t) - g0^(n)(0) exp(-lam^2 t)] / lam^(2n+2) + remainder(lam).
    """

    kind: str
    depth: int
    terms: List
    remainder: Callable
    t: Optional[float] = None

    def term_sum(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        acc = np.zeros(lam.shape, dtype=complex)
        if self.kind == "initial":
            for n, c in enumerate(self.terms):
                acc += c / (1j * lam) ** (n + 1)
        else:
            decay = np.exp(-lam * lam * self.t)
            for n, (ct, c0) in enumerate(self.terms):
                acc += (-1) ** n * (ct - c0 * decay) / lam ** (2 * n + 2)
        return acc

    def __call__(self, lam) -> np.ndarray:
        return self.term_sum(lam) + self.remainder(lam)


def ibp_initial(problem: HalfLineProblem, depth: int = DEFAULT_U0_DEPTH) -> IbpExpansion:
    fam = problem.u0
    terms = [float(fam.derivative(n, 0.0)) for n in range(depth + 1)]

    def rem(lam):
        lam = np.asarray(lam, dtype=complex)
        return initial_remainder(fam, depth, lam)
    return IbpExpansion("initial", depth, terms, rem)


def u0_hat_ibp(problem: HalfLineProblem, lam, depth: int = DEFAULT_U0_DEPTH) -> np.ndarray:
    """u0_hat through the expansion plus quadrature of the remainder; for |lam| < 1
    the transform integral itself is integrated."""
    lam = np.asarray(lam, dtype=complex)
    _check_lower(lam)
    out = np.empty(lam.shape, dtype=complex)
    small = np.abs(lam) < 1.0
    if small.any():
        fam = problem.u0
        X = fam.decay_cutoff(0)
        out[small] = _oscillatory_half_line(fam, lam[small], X) if X > 0 else 0.0
    if (~small).any():
        out[~small] = ibp_initial(problem, depth)(lam[~small])
    return out


def _check_lower(lam: np.ndarray):
    if np.any(lam.imag > 0):
        raise DomainError("u0_hat is defined only for Im lam <= 0")


def u0_hat(problem: HalfLineProblem, lam):
    """Half-line Fourier transform of the initial data (Im lam <= 0)."""
    scalar = np.ndim(lam) == 0
    lam_a = np.asarray(lam, dtype=complex)
    _check_lower(lam_a)
    val = _u0_hat_closed(problem.u0, lam_a)
    if val is None:
        val = u0_hat_ibp(problem, lam_a)
    return complex(val) if scalar else val


def u0_hat_reflected(problem: HalfLineProblem, lam):
    """u0_hat(-lam) for Im lam >= 0."""
    lam_a = np.asarray(lam, dtype=complex)
    if np.any(lam_a.imag < 0):
        raise DomainError("reflected transform needs Im lam >= 0")
    return u0_hat(problem, -lam if np.ndim(lam) == 0 else -lam_a)


# --- boundary data -------------------------------------------------------------

def _exprel_neg(z: np.ndarray) -> np.ndarray:
    """(1 - exp(-z)) / z, with the removable point at z = 0."""
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    big = np.abs(z) > 1e-8
    zb = z[big]
    out[big] = -np.expm1(-zb) / zb
    zs = z[~big]
    out[~big] = 1.0 - zs / 2.0 + zs * zs / 6.0
    return out


def _tau_quadrature(fam: DataFamily, lam2: np.ndarray, t: float, damped: bool,
                    order: int = 0) -> np.ndarray:
    """Direct Gauss-Legendre quadrature in tau; only used where |lam^2| t is modest."""
    xg, wg = _gl(48)
    taus = 0.5 * t * (xg + 1.0)
    w = 0.5 * t * wg
    gv = fam.derivative(order, taus)
    shift = (taus - t) if damped else taus
    return np.exp(np.multiply.outer(lam2, shift)) @ (w * gv)


def _damped_closed(fam: DataFamily, lam2: np.ndarray, t: float) -> Optional[np.ndarray]:
    k, p = fam.kind, fam.params
    if fam.is_zero:
        return np.zeros(lam2.shape, dtype=complex)
    if k == "Constant":
        return p[0] * t * _exprel_neg(lam2 * t)
    if k in ("ExpGrow", "ExpDecay"):
        a, c = (p[0], p[1]) if k == "ExpGrow" else (p[0], -p[1])
        return a * math.exp(c * t) * t * _exprel_neg((lam2 + c) * t)
    if k == "Poly":
        out = np.empty(lam2.shape, dtype=complex)
        near = np.abs(lam2) * t <= 1.0
        if near.any():
            out[near] = _tau_quadrature(fam, lam2[near], t, True)
        far = ~near
        if far.any():
            l2 = lam2[far]
            decay = np.exp(-l2 * t)
            acc = np.zeros(l2.shape, dtype=complex)
            deg = len(p[0]) - 1
            for n in range(deg + 1):
                acc += (-1) ** n * (fam.derivative(n, t) - fam.derivative(n, 0.0) * decay) \
                    / l2 ** (n + 1)
            out[far] = acc
        return out
    return None


def _damped_generic(fam: DataFamily, lam2: np.ndarray, t: float, order: int = 0,
                    depth: int = DEFAULT_G0_DEPTH) -> np.ndarray:
    """Damped transform of fam^(order) for families without a closed form."""
    out = np.empty(lam2.shape, dtype=complex)
    near = np.abs(lam2) * t <= 4.0
    if near.any():
        out[near] = _tau_quadrature(fam, lam2[near], t, True, order)
    if (~near).any():
        l2 = lam2[~near]
        decay = np.exp(-l2 * t)
        acc = np.zeros(l2.shape, dtype=complex)
        for n in range(depth + 1):
            acc += (-1) ** n * (fam.derivative(order + n, t)
                                - fam.derivative(order + n, 0.0) * decay) / l2 ** (n + 1)
        rem = np.array([_damped_remainder_quad(fam, order + depth + 1, v, t) for v in l2])
        out[~near] = acc + (-1) ** (depth + 1) * rem / l2 ** (depth + 1)
    return out


def _damped_remainder_quad(fam: DataFamily, order: int, lam2: complex, t: float) -> complex:
    # integrand exp(-lam2 (t - tau)) g^(order)(tau); panels graded toward tau = t
    scale = 1.0 / max(abs(lam2), 1.0 / t)
    edges = [0.0]
    w = scale
    while t - w > edges[-1]:
        edges.append(t - w)
        w *= 2.0
    edges = sorted(set(edges[:1] + [e for e in edges[1:] if e > 0] + [t]))
    xg, wg = _gl(32)
    acc = 0j
    phase_panels = max(1, int(abs(lam2.imag) * t / 2))
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(1, min(phase_panels, 4096))
        sub = np.linspace(lo, hi, n + 1)
        for a, b in zip(sub[:-1], sub[1:]):
            h = 0.5 * (b - a)
            taus = 0.5 * (a + b) + h * xg
            acc += h * np.sum(wg * np.exp(-lam2 * (t - taus)) * fam.derivative(order, taus))
    return acc


def damped_transform_of(fam: DataFamily, lam, t: float, order: int = 0) -> np.ndarray:
    """exp(-lam^2 t) int_0^t exp(lam^2 tau) fam^(order)(tau) dtau, without forming exp(lam^2 t)."""
    lam = np.asarray(lam, dtype=complex)
    lam2 = lam * lam
    der = derived_family(fam, order)
    if der is not None:
        closed = _damped_closed(der, lam2, t)
        if closed is not None:
            return closed
    return _damped_generic(fam, lam2, t, order)


def g0_tilde_damped(problem: HalfLineProblem, lam, t: float):
    """exp(-lam^2 t) g0_tilde(lam, t) for Re lam^2 >= 0."""
    if t < 0:
        raise DomainError("t must be >= 0")
    scalar = np.ndim(lam) == 0
    lam_a = np.asarray(lam, dtype=complex)
    l2 = lam_a * lam_a
    if np.any(l2.real < -1e-12 * np.abs(l2)):
        raise DomainError("damped transform needs Re lam^2 >= 0")
    if t == 0:
        val = np.zeros(lam_a.shape, dtype=complex)
    else:
        val = damped_transform_of(problem.g0, lam_a, t)
    return complex(val) if scalar else val


def g0_tilde(problem: HalfLineProblem, lam, t: float):
    """int_0^t exp(lam^2 tau) g0(tau) dtau (entire in lam, even in lam)."""
    if t < 0:
        raise DomainError("t must be >= 0")
    scalar = np.ndim(lam) == 0
    lam_a = np.asarray(lam, dtype=complex)
    l2 = lam_a * lam_a
    if np.any(l2.real * t > OVERFLOW_EXPONENT):
        raise OverflowError("exp(lam^2 t) overflows; use g0_tilde_damped")
    fam = problem.g0
    k, p = fam.kind, fam.params
    if fam.is_zero or t == 0:
        val = np.zeros(l2.shape, dtype=complex)
    elif k == "Constant":
        val = p[0] * t * np.exp(l2 * t) * _exprel_neg(l2 * t)
    elif k in ("ExpGrow", "ExpDecay"):
        a, c = (p[0], p[1]) if k == "ExpGrow" else (p[0], -p[1])
        z = (l2 + c) * t
        val = a * t * np.exp(z) * _exprel_neg(z)
    elif k == "Poly":
        val = np.empty(l2.shape, dtype=complex)
        near = np.abs(l2) * t <= 1.0
        if near.any():
            val[near] = _tau_quadrature(fam, l2[near], t, False)
        if (~near).any():
            v2 = l2[~near]
            grow = np.exp(v2 * t)
            acc = np.zeros(v2.shape, dtype=complex)
            for n in range(len(p[0])):
                acc += (-1) ** n * (fam.derivative(n, t) * grow - fam.derivative(n, 0.0)) \
                    / v2 ** (n + 1)
            val[~near] = acc
    else:
        val = np.exp(l2 * t) * damped_transform_of(fam, lam_a, t)
    return complex(val) if scalar else val


def ibp_boundary(problem: HalfLineProblem, t: float,
                 depth: int = DEFAULT_G0_DEPTH) -> IbpExpansion:
    fam = problem.g0
    terms = [(float(fam.derivative(n, t)), float(fam.derivative(n, 0.0)))
             for n in range(depth + 1)]

    def rem(lam):
        lam = np.asarray(lam, dtype=complex)
        return (-1) ** (depth + 1) * damped_transform_of(fam, lam, t, depth + 1) \
            / lam ** (2 * depth + 2)
    return IbpExpansion("boundary", depth, terms, rem, t)


# --- Fourier helpers -------------------------------------------------------------

def gauss_fourier_kernel(kappa: float, x: float) -> float:
    """int_R exp(-i lam x) exp(-kappa lam^2) dlam = sqrt(pi/kappa) exp(-x^2/(4 kappa))."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    return math.sqrt(math.pi / kappa) * math.exp(-x * x / (4.0 * kappa))


def fourier_invert_regularized(fhat: Callable, x: float, eps: float,
                               cfg: QuadratureConfig = DEFAULT) -> complex:
    """(1/2pi) int exp(-eps lam^2) exp(i lam x) fhat(lam) dlam."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    r = integrate_real_damped(lambda l: np.exp(-eps * l * l + 1j * l * x) * fhat(l), eps, cfg)
    return r.value / (2.0 * math.pi)
