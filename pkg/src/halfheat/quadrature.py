"""Integration engine: composite Gauss-Legendre on real intervals, on the
two-ray contour in the upper half-plane, and the split evaluation of
contour integrals that converge only conditionally.

The contour ``Gamma`` is the pair of rays arg(lam) = 3pi/4 and arg(lam) = pi/4,
traversed from infinity along the first ray into the origin and then out
along the second.  ``Gamma0`` is its part with |lam| <= split radius and
``Gamma1`` the rest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

SQRT2 = math.sqrt(2.0)
E_RIGHT = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
E_LEFT = complex(-math.cos(math.pi / 4), math.sin(math.pi / 4))

_CHUNK = 1 << 21


class QuadratureError(RuntimeError):
    pass


class ToleranceNotMet(QuadratureError):
    pass


class NonDecayingIntegrand(QuadratureError):
    pass


class InsufficientDecay(QuadratureError):
    pass


class NoConvergence(QuadratureError):
    pass


class QuadResult(NamedTuple):
    value: complex
    error: float

    def __add__(self, other):  # type: ignore[override]
        return QuadResult(self.value + other.value, self.error + other.error)

    def scale(self, c) -> "QuadResult":
        return QuadResult(c * self.value, abs(c) * self.error)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and rule parameters shared by every integrator.

    ``nodes_per_unit`` switches every integrator to a fixed composite rule
    with that many nodes per unit parameter length (no adaptivity); it is
    used by convergence studies.  ``radius`` overrides the automatic
    contour truncation.  Contour evaluations at x below
    ``conditional_below`` use the split (integration-by-parts) route.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-11
    max_panels: int = 400_000
    order: int = 16
    ibp_depth: Optional[int] = None
    radius: Optional[float] = None
    nodes_per_unit: Optional[float] = None
    conditional_below: float = 0.3

    def __post_init__(self):
        if not self.abs_tol >= 1e-14:
            raise ValueError("abs_tol must be >= 1e-14")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_panels < 1 or self.order < 1:
            raise ValueError("max_panels and order must be positive")
        if self.radius is not None and not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.nodes_per_unit is not None and not self.nodes_per_unit > 0:
            raise ValueError("nodes_per_unit must be positive")


@dataclass(frozen=True)
class ContourSpec:
    R: float
    nodes_per_unit: Optional[float] = None
    split_radius: float = 1.0

    def __post_init__(self):
        if not self.R > 0 or not self.split_radius > 0:
            raise ValueError("R and split_radius must be positive")


DEFAULT = QuadratureConfig()


@lru_cache(maxsize=None)
def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def _node_values(f, a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """f at the Gauss-Legendre nodes of each panel, shape (panels, order)."""
    xg, _ = _gl(order)
    out = np.empty((a.size, order), dtype=complex)
    per = max(1, _CHUNK // order)
    for s in range(0, a.size, per):
        aa, bb = a[s:s + per], b[s:s + per]
        pts = 0.5 * (bb + aa)[:, None] + 0.5 * (bb - aa)[:, None] * xg[None, :]
        out[s:s + per] = np.asarray(f(pts.ravel()), dtype=complex).reshape(pts.shape)
    return out


def _panel_sums(f, a: np.ndarray, b: np.ndarray, order: int, with_abs: bool = False):
    """Gauss-Legendre value on each panel [a_i, b_i] (and of |Re f| + |Im f| if asked)."""
    _, wg = _gl(order)
    vals = _node_values(f, a, b, order)
    half = 0.5 * (b - a)
    out = half * (vals @ wg)
    if with_abs:
        return out, _abs_sums(vals, half, wg)
    return out


def _abs_sums(vals, half, wg):
    # |Re| + |Im| rather than |f|: a pure phase has a smooth modulus but its
    # parts still oscillate
    return np.abs(half) * ((np.abs(vals.real) + np.abs(vals.imag)) @ wg)


@lru_cache(maxsize=None)
def _halving_interp(order: int) -> np.ndarray:
    """Matrix taking values at the nodes of a panel to the interpolating
    polynomial's values at the nodes of its two halves."""
    xg, _ = _gl(order)
    diffs = xg[:, None] - xg[None, :]
    np.fill_diagonal(diffs, 1.0)
    bw = 1.0 / diffs.prod(axis=1)
    targets = np.concatenate([0.5 * (xg - 1.0), 0.5 * (xg + 1.0)])
    d = targets[:, None] - xg[None, :]
    exact = np.isclose(d, 0.0, atol=1e-15)
    d[exact] = 1.0
    m = bw[None, :] / d
    m /= m.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    m[rows] = exact[rows].astype(float)
    return m


def integrate_interval(f: Callable, breakpoints: Sequence[float],
                       cfg: QuadratureConfig = DEFAULT) -> QuadResult:
    """Integrate a vectorised f over [breakpoints[0], breakpoints[-1]].

    Panels are bisected locally until the two-level difference on each
    panel falls below its share of max(abs_tol, rel_tol*|I|).  A panel is
    only accepted once the polynomial through its nodes also reproduces f
    at the nodes of its halves to 1%; otherwise an unresolved oscillation
    could make both levels agree by accident.
    """
    bp = np.asarray(breakpoints, dtype=float)
    if bp.size < 2 or bp[-1] == bp[0]:
        return QuadResult(0j, 0.0)
    if cfg.nodes_per_unit is not None:
        return _fixed(f, bp, cfg)
    order = cfg.order
    _, wg = _gl(order)
    interp = _halving_interp(order)
    total_len = float(bp[-1] - bp[0])
    a, b = bp[:-1].copy(), bp[1:].copy()
    vals = _node_values(f, a, b, order)
    half = 0.5 * (b - a)
    q = half * (vals @ wg)
    # roundoff floor: nothing finer than a few ulps of int |f| is attainable
    floor = 64 * np.finfo(float).eps * float(_abs_sums(vals, half, wg).sum())
    acc = 0j
    err = 0.0
    npanels = a.size
    while a.size:
        m = 0.5 * (a + b)
        vl = _node_values(f, a, m, order)
        vr = _node_values(f, m, b, order)
        hh = 0.5 * (m - a)
        ql = hh * (vl @ wg)
        qr = hh * (vr @ wg)
        fine = ql + qr
        diff = np.abs(fine - q)
        est = abs(acc + fine.sum())
        tol = max(cfg.abs_tol, cfg.rel_tol * est, floor)
        share = tol * (b - a) / total_len
        children = np.concatenate([vl, vr], axis=1)
        mismatch = np.abs(vals @ interp.T - children).max(axis=1)
        peak = np.abs(children).max(axis=1)
        resolved = (mismatch <= 0.01 * peak) | (peak * (b - a) <= share)
        ok = (diff <= share) & resolved
        acc += fine[ok].sum()
        err += float(diff[ok].sum())
        bad = ~ok
        if bad.any() and np.all(diff[bad] <= floor) and np.all(resolved[bad]):
            acc += fine[bad].sum()
            err += float(diff[bad].sum())
            break
        npanels += 2 * int(bad.sum())
        if npanels > cfg.max_panels:
            raise ToleranceNotMet(
                f"adaptive refinement exceeded {cfg.max_panels} panels "
                f"(partial value {acc + fine[bad].sum()})")
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        q = np.concatenate([ql[bad], qr[bad]])
        vals = np.concatenate([vl[bad], vr[bad]])
    return QuadResult(acc, max(err, floor))


def _fixed(f, bp: np.ndarray, cfg: QuadratureConfig) -> QuadResult:
    acc = 0j
    for lo, hi in zip(bp[:-1], bp[1:]):
        n = max(1, int(math.ceil((hi - lo) * cfg.nodes_per_unit / cfg.order)))
        edges = np.linspace(lo, hi, n + 1)
        acc += _panel_sums(f, edges[:-1], edges[1:], cfg.order).sum()
    return QuadResult(acc, float("nan"))


def _geometric_breaks(lo: float, hi: float, first: float = 1.0) -> List[float]:
    pts = [lo]
    p = max(lo + first, first)
    while p < hi:
        pts.append(p)
        p *= 2.0
    pts.append(hi)
    return pts


# --- contour -----------------------------------------------------------------

def _ray_sum(f):
    """Parametrise the contour by r >= 0: both rays, correct orientation."""
    def h(r):
        return f(r * E_RIGHT) * E_RIGHT - f(r * E_LEFT) * E_LEFT
    return h


def gamma_tail_bound(x: float, R: float, poly_degree: int = 0) -> float:
    """Closed form of int_R^inf r^d exp(-x r / sqrt 2) dr (one ray)."""
    if x <= 0:
        raise ValueError("x must be positive")
    d = int(poly_degree)
    c = x / SQRT2
    z = c * R
    # Gamma(d+1, z) = d! e^{-z} sum_{k<=d} z^k / k!
    term, s = 1.0, 1.0
    for k in range(1, d + 1):
        term *= z / k
        s += term
    return math.factorial(d) * math.exp(-z) * s / c ** (d + 1)


def choose_radius(x: float, poly_degree: int = 0, target: float = 1e-12,
                  minimum: float = 2.0) -> float:
    """Smallest R (to 1%) with gamma_tail_bound(x, R, d) <= target."""
    lo = minimum
    if gamma_tail_bound(x, lo, poly_degree) <= target:
        return lo
    hi = lo
    while gamma_tail_bound(x, hi, poly_degree) > target:
        hi *= 2.0
    while hi - lo > 0.01 * hi:
        mid = 0.5 * (lo + hi)
        if gamma_tail_bound(x, mid, poly_degree) > target:
            lo = mid
        else:
            hi = mid
    return hi


def contour_tail(f: Callable, x: float, poly_degree: int, R: float) -> float:
    """Estimated size of the contour integral of f beyond |lam| = R.

    The amplitude C is the largest |f| / (r^d exp(-x r / sqrt 2)) seen on a
    probe just inside R; the estimate is C times the closed-form tail on
    both rays.
    """
    rs = R * np.linspace(0.8, 1.0, 9)
    env = rs ** poly_degree * np.exp(-x * rs / SQRT2)
    amp = max(float((np.abs(f(rs * E_RIGHT)) / env).max()),
              float((np.abs(f(rs * E_LEFT)) / env).max()))
    return 2.0 * amp * gamma_tail_bound(x, R, poly_degree)


def fit_radius(f: Callable, x: float, poly_degree: int = 0, target: float = 1e-12,
               minimum: float = 2.0) -> Tuple[float, float]:
    """Radius whose estimated tail (see contour_tail) stays below target.

    Returns (R, estimated tail).
    """
    R = choose_radius(x, poly_degree, target, minimum)
    for _ in range(4):
        tail = contour_tail(f, x, poly_degree, R)
        if tail <= target:
            return R, tail
        R = choose_radius(x, poly_degree, target * gamma_tail_bound(x, R, poly_degree) / tail,
                          R)
    return R, tail


def _probe(f, r: float) -> float:
    rs = r * np.linspace(1.0, 1.25, 9)
    return float(max(np.abs(f(rs * E_RIGHT)).max(), np.abs(f(rs * E_LEFT)).max()))


def integrate_gamma(f: Callable, spec: ContourSpec,
                    cfg: QuadratureConfig = DEFAULT) -> QuadResult:
    """Integral of f over the contour truncated at |lam| = spec.R.

    f must decay along both rays; a probe at R/2 and R raises
    NonDecayingIntegrand when it clearly does not.
    """
    a_half = _probe(f, 0.5 * spec.R)
    a_end = _probe(f, spec.R)
    if a_end > 1e3 * cfg.abs_tol / spec.R and a_end >= 0.5 * a_half:
        raise NonDecayingIntegrand(
            f"|f| at |lam|={spec.R:g} is {a_end:.3g}, at R/2 {a_half:.3g}")
    if spec.nodes_per_unit is not None:
        cfg = replace(cfg, nodes_per_unit=spec.nodes_per_unit)
    bps = [0.0] + _geometric_breaks(min(spec.split_radius, spec.R), spec.R,
                                    first=spec.split_radius)
    return integrate_interval(_ray_sum(f), bps, cfg)


def integrate_gamma_segment(f: Callable, r0: float, r1: float,
                            cfg: QuadratureConfig = DEFAULT) -> QuadResult:
    """Contour integral restricted to r0 <= |lam| <= r1."""
    bps = [r0] + [p for p in _geometric_breaks(r0, r1, first=max(r0, 1.0))[1:]]
    return integrate_interval(_ray_sum(f), bps, cfg)


# --- conditional integrals ---------------------------------------------------

@dataclass(frozen=True)
class BoundaryTerm:
    """coef * lam**power * exp(i lam x - lam**2 s), integrated over Gamma1."""

    coef: complex
    power: int
    x: float
    s: float


@dataclass
class SplitIntegrand:
    """Integrand prepared for conditional contour integration.

    ``full`` is the original integrand (used on Gamma0 only); on Gamma1 it
    equals the sum of ``terms`` plus ``remainder``, and the remainder must
    decay at least like |lam|^-3.
    """

    full: Callable
    remainder: Optional[Callable]
    terms: List[BoundaryTerm] = field(default_factory=list)


def _arc(g: Callable, th0: float, th1: float, cfg: QuadratureConfig) -> QuadResult:
    """int g(lam) dlam along the unit circle from angle th0 to th1."""
    def h(th):
        e = np.exp(1j * th)
        return g(e) * 1j * e
    sign = 1.0
    if th1 < th0:
        th0, th1, sign = th1, th0, -1.0
    r = integrate_interval(h, np.linspace(th0, th1, 5), cfg)
    return r.scale(sign)


def gamma1_monomial(p: int, x: float, s: float,
                    cfg: QuadratureConfig = DEFAULT) -> QuadResult:
    """int over Gamma1 of lam^p exp(i lam x - lam^2 s) dlam (split radius 1).

    Evaluated by Cauchy's theorem: for s > 0 the two rays swing down to
    the real axis (|lam| >= 1) plus two unit-circle arcs; for s < 0, or s = 0
    with x > 0, they swing up to the imaginary axis where the two pieces
    cancel, leaving the upper unit arc.  At x = s = 0 the integral exists only
    for p <= -1 and is elementary.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    cfg = replace(cfg, nodes_per_unit=None)

    def g(lam):
        return lam ** p * np.exp(1j * lam * x - lam * lam * s)

    if s > 0:
        pp = max(p, 0)
        L = max(2.0, math.sqrt((40.0 + 2 * pp + pp * math.log(1.0 + pp / s)) / s))
        def real_part(lam):
            return g(lam) + g(-lam)
        width = min(1.0, 1.0 / math.sqrt(s), 2 * math.pi / x if x > 0 else 1.0)
        n0 = int(min(max(4, math.ceil((L - 1.0) / width)), 4096))
        bps = np.linspace(1.0, L, n0 + 1)
        line = integrate_interval(real_part, bps, cfg)
        return line + _arc(g, math.pi / 4, 0.0, cfg) + _arc(g, math.pi, 3 * math.pi / 4, cfg)
    if s < 0 or x > 0:
        return _arc(g, math.pi / 4, 3 * math.pi / 4, cfg)
    if p >= 0:
        raise NonDecayingIntegrand(f"lam^{p} has no contour integral at x = s = 0")
    if p == -1:
        return QuadResult(0j, 0.0)
    k = p + 1
    val = (np.exp(0.75j * math.pi * k) - np.exp(0.25j * math.pi * k)) / k
    return QuadResult(complex(val), 0.0)


def _remainder_radius(rem: Callable, tol: float, r_start: float,
                      r_max: float = 8192.0) -> float:
    r = max(4.0, 2 * r_start)
    a_prev = _probe(rem, r / 2)
    while True:
        a = _probe(rem, r)
        if a == 0.0 or a * r < 1e-3 * tol:
            return r
        slope = math.log2(a_prev / a) if a_prev > 0 else 0.0
        if slope > 1.0:
            tail = a * r / (slope - 1.0)
            if tail <= 0.1 * tol:
                return r
        if r >= r_max:
            if slope < 2.5:
                raise InsufficientDecay(
                    f"remainder decays like |lam|^-{slope:.2f} near |lam|={r:g}")
            return r
        a_prev = a
        r *= 2.0


def integrate_gamma_conditional(core: SplitIntegrand, spec: Optional[ContourSpec] = None,
                                cfg: QuadratureConfig = DEFAULT) -> QuadResult:
    """Contour integral of an integrand that may decay only like 1/|lam|.

    Gamma0 is integrated directly, the remainder over Gamma1 by adaptive
    quadrature, and each boundary term by :func:`gamma1_monomial`.
    """
    split = spec.split_radius if spec is not None else 1.0
    if split != 1.0:
        raise ValueError("boundary-term integrals assume split radius 1")
    out = integrate_gamma_segment(core.full, 0.0, split, cfg)
    if core.remainder is not None:
        tol = max(cfg.abs_tol, 1e-14)
        if spec is not None and cfg.radius is None and spec.R > split:
            R = spec.R
        elif cfg.radius is not None:
            R = cfg.radius
        else:
            R = _remainder_radius(core.remainder, tol, split)
        if R > split:
            a_half, a_end = _probe(core.remainder, R / 2), _probe(core.remainder, R)
            if a_end > 0 and a_end * R > tol and a_half / a_end < 2 ** 2.5:
                raise InsufficientDecay(
                    f"remainder decays too slowly between |lam|={R / 2:g} and {R:g}")
            out = out + integrate_gamma_segment(core.remainder, split, R, cfg)
    for term in core.terms:
        if term.coef == 0:
            continue
        out = out + gamma1_monomial(term.power, term.x, term.s, cfg).scale(term.coef)
    return out


# --- real line ---------------------------------------------------------------

def real_cutoff(t_damp: float, poly_degree: int = 0) -> float:
    d = max(int(poly_degree), 0)
    return max(8.0, math.sqrt((40.0 + 2.0 * d) / t_damp))


def integrate_real_damped(f: Callable, t_damp: float, cfg: QuadratureConfig = DEFAULT,
                          poly_degree: int = 0) -> QuadResult:
    """int_R f for f carrying a factor bounded by exp(-lam^2 t_damp).

    Truncates at |lam| = max(8, sqrt((40 + 2d)/t_damp)), d the polynomial
    growth of the remaining factor.
    """
    if not t_damp > 0:
        raise ValueError("t_damp must be positive")
    L = real_cutoff(t_damp, poly_degree)
    n = int(min(max(8, math.ceil(L * math.sqrt(t_damp) * 4)), 256))
    bps = np.linspace(-L, L, 2 * n + 1)
    return integrate_interval(f, bps, cfg)


def _window(u: np.ndarray) -> np.ndarray:
    """Smooth even cutoff: 1 for |u| <= 1/2, 0 for |u| >= 1, C-infinity between."""
    a = np.abs(u)
    s = np.clip(2.0 * a - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        p = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1 - s, 1.0)), 0.0)
        q = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return p / (p + q)


def integrate_real_symmetric(f: Callable, cfg: QuadratureConfig = DEFAULT,
                             A_sequence: Sequence[float] = (20.0, 40.0, 80.0, 160.0)
                             ) -> QuadResult:
    """Limit of symmetric partial integrals int_{-A}^{A} f as A -> inf.

    Each partial integral carries a smooth window equal to one on
    [-A/2, A/2], which suppresses the oscillating end contribution; the
    last three values are then Aitken/Richardson extrapolated.
    """
    A_sequence = list(A_sequence)
    if len(A_sequence) < 3:
        raise ValueError("need at least three truncation radii")
    vals = []
    for A in A_sequence:
        def g(lam, A=A):
            return f(lam) * _window(lam / A)
        n = int(max(8, math.ceil(A)))
        vals.append(integrate_interval(g, np.linspace(-A, A, 2 * n + 1), cfg).value)
    f1, f2, f3 = vals[-3:]
    d1, d2 = f2 - f1, f3 - f2
    floor = 10 * cfg.abs_tol + 1e-13 * abs(f3)
    if abs(d2) > abs(d1) + floor:
        raise NoConvergence(f"partial integrals diverge: steps {abs(d1):.3g}, {abs(d2):.3g}")
    denom = d2 - d1
    if abs(d2) <= floor or abs(denom) <= floor:
        lim = f3
    else:
        lim = f3 - d2 * d2 / denom
    return QuadResult(lim, float(abs(lim - f3) + abs(d2) + floor))
