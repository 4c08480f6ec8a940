"""One-sided limits of the solution and its derivatives at the edges of the
quarter plane, obtained by Richardson extrapolation over geometric
sequences of sample points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .problem import HalfLineProblem, check_compatibility, DERIVATIVE_CAP
from .quadrature import DEFAULT, QuadratureConfig
from .representations import _dx, eval_dt, eval_gauss, eval_dx


@dataclass
class TraceResult:
    value: float
    approximants: List[Tuple[float, float]]
    est_error: float
    converged: bool
    extrapolants: List[float] = field(default_factory=list)


@dataclass
class CornerReport:
    k: int
    paths: List[Tuple[str, TraceResult]]
    compat_order: int
    predicted_limit: Optional[float]
    agrees: Optional[bool]

    def spread(self) -> float:
        vals = [tr.value for _, tr in self.paths]
        return max(vals) - min(vals)


def richardson(params: Sequence[float], values: Sequence[float], order: int,
               eval_errors: Optional[Sequence[float]] = None,
               floor: float = 1e-12) -> TraceResult:
    """Extrapolate values(h) to h = 0 for h halving at each step.

    Assumes values(h) = L + c1 h + c2 h^2 + ...; eliminates ``order``
    powers using the trailing order+1 samples for each extrapolant.
    ``floor`` is the relative accuracy assumed for each sample when the
    supplied ``eval_errors`` are smaller.
    """
    v = np.asarray(values, dtype=float)
    h = np.asarray(params, dtype=float)
    if np.any(h[1:] >= h[:-1]):
        raise ValueError("parameters must decrease strictly")
    ratio = h[:-1] / h[1:]
    if not np.allclose(ratio, 2.0):
        raise ValueError("parameters must halve at each step")
    n = v.size
    order = max(0, min(order, n - 3))
    table = [v.copy()]
    for k in range(1, order + 1):
        prev = table[-1]
        cur = np.full(n, np.nan)
        cur[k:] = prev[k:] + (prev[k:] - prev[k - 1:-1]) / (2.0 ** k - 1.0)
        table.append(cur)
    ext = list(table[-1][order:])
    amp = 1.0
    for k in range(1, order + 1):
        amp *= (2.0 ** k + 1.0) / (2.0 ** k - 1.0)
    per_sample = floor * max(1.0, float(np.max(np.abs(v))))
    if eval_errors is not None and len(eval_errors):
        per_sample = max(per_sample, float(max(eval_errors)))
    noise = amp * per_sample
    d_last, d_prev = abs(ext[-1] - ext[-2]), abs(ext[-2] - ext[-3])
    est = 2.0 * d_last + noise
    # the last three extrapolants either contract toward a common value or
    # already agree to within the amplified sample noise; stalled or
    # oscillating tables fail both
    converged = d_last <= 0.5 * d_prev or max(d_last, d_prev) <= 16 * noise
    return TraceResult(float(ext[-1]), list(zip(h.tolist(), v.tolist())), float(est),
                       bool(converged), [float(e) for e in ext])


def _sequence(start: float, J: int) -> List[float]:
    return [start * 2.0 ** -j for j in range(J + 1)]


def trace_x_to_0(problem: HalfLineProblem, n: int, t: float, cfg: QuadratureConfig = DEFAULT,
                 x0: float = 0.5, J: int = 8, order: int = 5) -> TraceResult:
    """lim_{x -> 0+} d^n u / dx^n (x, t)."""
    if not t > 0:
        raise ValueError("t must be positive")
    xs = _sequence(x0, J)
    res = [_dx(problem, n, x, t, cfg) for x in xs]
    return richardson(xs, [r.value for r in res], order, [r.est_error for r in res],
                      cfg.abs_tol)


def trace_t_to_0(problem: HalfLineProblem, n: int, x: float, cfg: QuadratureConfig = DEFAULT,
                 t0: float = 0.25, J: int = 8, T: float = 1.0, order: int = 5) -> TraceResult:
    """lim_{t -> 0+} d^n u / dt^n (x, t)."""
    if not x > 0:
        raise ValueError("x must be positive")
    ts = _sequence(t0, J)
    res = [eval_dt(problem, n, x, t, T, cfg) for t in ts]
    return richardson(ts, [r.value for r in res], order, [r.est_error for r in res],
                      cfg.abs_tol)


PATHS = {
    "diagonal": lambda h: (h, h),
    "parabolic": lambda h: (h, h * h),
    "flat": lambda h: (h * h, h),
}


def corner_limit(problem: HalfLineProblem, k: int, cfg: QuadratureConfig = DEFAULT,
                 h0: float = 0.25, J: int = 6, order: int = 3,
                 paths: Sequence[str] = ("diagonal", "parabolic", "flat")) -> CornerReport:
    """Limits of d^k u / dx^k along several paths into the corner (0, 0)."""
    if k > 2 * DERIVATIVE_CAP:
        raise ValueError("derivative order too large")
    hs = _sequence(h0, J)
    out = []
    for name in paths:
        vals, errs = [], []
        for h in hs:
            x, t = PATHS[name](h)
            r = _dx(problem, k, x, t, cfg)
            vals.append(r.value)
            errs.append(r.est_error)
        out.append((name, richardson(hs, vals, order, errs, cfg.abs_tol)))
    compat = check_compatibility(problem, DERIVATIVE_CAP // 2).order
    predicted = None
    agrees = None
    if k <= 2 * compat + 1 and k <= DERIVATIVE_CAP:
        predicted = float(problem.u0.derivative(k, 0.0))
        agrees = all(abs(tr.value - predicted) <= 10 * tr.est_error for _, tr in out)
    return CornerReport(k, out, compat, predicted, agrees)


@dataclass
class ChainReport:
    rows: List[Tuple[int, float, float, float]]
    max_mismatch: float


def corollary_chain_check(problem: HalfLineProblem, n: int, cfg: QuadratureConfig = DEFAULT,
                          ts: Sequence[float] = (0.2, 0.5, 1.0), delta: float = 0.005,
                          trace_kw: Optional[dict] = None) -> ChainReport:
    """Compare d/dt of the odd trace g_{2l-1} with g_{2l+1} for l = 1..n.

    Rows are (l, t, d g_{2l-1}/dt, g_{2l+1}).
    """
    compat = check_compatibility(problem, DERIVATIVE_CAP // 2).order
    if compat < n:
        raise ValueError(f"compatibility order {compat} < {n}")
    kw = trace_kw or {}
    rows = []
    worst = 0.0
    for l in range(1, n + 1):
        for t in ts:
            g = {s: trace_x_to_0(problem, 2 * l - 1, t + s * delta, cfg, **kw).value
                 for s in (-2, -1, 1, 2)}
            deriv = (g[-2] - 8 * g[-1] + 8 * g[1] - g[2]) / (12 * delta)
            nxt = trace_x_to_0(problem, 2 * l + 1, t, cfg, **kw).value
            rows.append((l, t, deriv, nxt))
            worst = max(worst, abs(deriv - nxt))
    return ChainReport(rows, worst)


@dataclass
class DecayRow:
    x: float
    value: float
    log10_value: float


def decay_profile(problem: HalfLineProblem, m: int, n: int, t: float, xs: Sequence[float],
                  cfg: QuadratureConfig = DEFAULT) -> List[DecayRow]:
    """Rows (x, x^m |d^n u/dx^n|).  The n = 0 profile comes from the Gauss-kernel
    form, whose integrands are positive and so keep relative accuracy far
    below the level where contour integrals cancel to roundoff."""
    xs = list(xs)
    if any(b <= a for a, b in zip(xs, xs[1:])) or xs[0] <= 0:
        raise ValueError("xs must be positive and increasing")
    rows = []
    for x in xs:
        if n == 0:
            r = eval_gauss(problem, x, t, cfg)
            la = r.log_abs
        else:
            r = eval_dx(problem, n, x, t, cfg)
            la = math.log(abs(r.value)) if r.value != 0 else -math.inf
        lv = m * math.log(x) + la
        rows.append(DecayRow(x, math.exp(lv) if lv > -745 else 0.0,
                             lv / math.log(10.0) if lv != -math.inf else -math.inf))
    return rows
