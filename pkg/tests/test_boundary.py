import math
from functools import lru_cache

import pytest

from halfheat import (caloric_problem, corner_limit, corollary_chain_check, decay_profile,
                      erfc_problem, eval_dt, eval_fokas, trace_t_to_0, trace_x_to_0, zero_problem)
from halfheat.boundary import richardson
from oracles import erfc_series

PROBS = {"caloric": caloric_problem(), "erfc": erfc_problem()}


@lru_cache(maxsize=None)
def x_trace(name, n, t):
    return trace_x_to_0(PROBS[name], n, t)


@lru_cache(maxsize=None)
def t_trace(name, n, x):
    return trace_t_to_0(PROBS[name], n, x)


def boundary_target(name, n, t):
    # g_{2k}(t) = d^k g0 / dt^k; for the caloric problem every g_n(t) = (-1)^n e^t
    if name == "erfc":
        # u_x = -exp(-x^2/4t) / sqrt(pi t); the odd traces survive
        odd = {1: -1.0, 3: 1.0 / (2 * t)}
        return 1.0 if n == 0 else odd.get(n, 0.0) / math.sqrt(math.pi * t)
    return (-1) ** n * math.exp(t)


def initial_target(name, n, x):
    return 0.0 if name == "erfc" else math.exp(-x)


# --- extrapolation ---------------------------------------------------------------

def test_richardson_polynomial_exact():
    hs = [0.5 * 2.0 ** -j for j in range(8)]
    vals = [3.0 + 2 * h - h ** 2 + 0.5 * h ** 3 for h in hs]
    r = richardson(hs, vals, 3)
    assert abs(r.value - 3.0) <= 1e-13 and r.converged


def test_richardson_flags_oscillation():
    hs = [0.5 * 2.0 ** -j for j in range(9)]
    r = richardson(hs, [1.0 + 0.1 * (-1) ** j for j in range(9)], 3)
    assert not r.converged


def test_richardson_flags_slow_rate():
    hs = [0.5 * 2.0 ** -j for j in range(9)]
    r = richardson(hs, [1.0 + math.sqrt(h) for h in hs], 3)
    assert not r.converged
    assert abs(r.value - 1.0) > 1e-3


def test_richardson_validates_parameters():
    with pytest.raises(ValueError):
        richardson([1.0, 1.0, 0.5, 0.25], [1, 2, 3, 4], 1)
    with pytest.raises(ValueError):
        richardson([1.0, 0.3, 0.1, 0.01], [1, 2, 3, 4], 1)


# --- traces --------------------------------------------------------------------------

def test_trace_examples():
    r = x_trace("caloric", 0, 1.0)
    assert r.value == pytest.approx(math.e, abs=1e-8) and r.converged
    assert x_trace("caloric", 2, 1.0).value == pytest.approx(math.e, abs=1e-6)
    z = trace_x_to_0(zero_problem(), 3, 0.7)
    assert z.value == 0 and z.converged
    assert t_trace("caloric", 0, 1.0).value == pytest.approx(math.exp(-1), abs=1e-8)
    assert t_trace("caloric", 1, 1.0).value == pytest.approx(math.exp(-1), abs=1e-6)
    assert t_trace("erfc", 0, 1.0).value == pytest.approx(0.0, abs=1e-8)


def test_trace_sequences():
    r = x_trace("caloric", 0, 1.0)
    hs = [h for h, _ in r.approximants]
    assert len(hs) == 9 and hs[0] == 0.5
    assert all(b == a / 2 for a, b in zip(hs, hs[1:]))
    with pytest.raises(ValueError):
        trace_x_to_0(PROBS["caloric"], 0, 0.0)
    with pytest.raises(ValueError):
        trace_t_to_0(PROBS["caloric"], 0, 0.0)


@pytest.mark.parametrize("name", ["caloric", "erfc"])
@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("t", [0.5, 1.0])
def test_even_boundary_traces(name, n, t):
    r = x_trace(name, 2 * n, t)
    assert abs(r.value - boundary_target(name, 2 * n, t)) <= 10 * r.est_error


@pytest.mark.parametrize("name", ["caloric", "erfc"])
@pytest.mark.parametrize("n", [0, 1])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_initial_traces(name, n, x):
    r = t_trace(name, n, x)
    assert abs(r.value - initial_target(name, n, x)) <= 10 * r.est_error


def test_estimates_bound_errors_in_most_cases():
    hits = []
    for name in PROBS:
        for t in (0.5, 1.0):
            for n in range(5):
                r = x_trace(name, n, t)
                hits.append(abs(r.value - boundary_target(name, n, t)) <= r.est_error)
        for x in (0.5, 1.0, 2.0):
            for n in (0, 1):
                r = t_trace(name, n, x)
                hits.append(abs(r.value - initial_target(name, n, x)) <= r.est_error)
    assert len(hits) == 32
    assert sum(hits) >= 0.9 * len(hits)


@pytest.mark.parametrize("name", ["caloric", "erfc"])
def test_boundary_approach_uniform_proxy(name):
    prob = PROBS[name]
    ts = (0.2, 0.5, 1.0, 2.0)
    sups = [max(abs(eval_fokas(prob, 2.0 ** -j, t).value - prob.g0(t)) for t in ts)
            for j in range(1, 7)]
    assert all(b < a for a, b in zip(sups, sups[1:]))


@pytest.mark.parametrize("name", ["caloric", "erfc"])
def test_initial_approach_uniform_proxy(name):
    prob = PROBS[name]
    xs = (0.5, 1.0, 2.0)
    sups = [max(abs(eval_dt(prob, 0, x, 2.0 ** -j, 1.0).value - prob.u0(x)) for x in xs)
            for j in range(1, 7)]
    assert all(b < a for a, b in zip(sups, sups[1:]))


# --- corner ------------------------------------------------------------------------

@pytest.mark.parametrize("b", [1.0, 2.0])
def test_corner_compatible(b):
    prob = caloric_problem(1.0, b)
    for k in range(6):
        rep = corner_limit(prob, k)
        assert rep.compat_order >= 3
        assert rep.predicted_limit == pytest.approx((-b) ** k, rel=1e-14)
        assert rep.agrees, k
        for name, tr in rep.paths:
            assert abs(tr.value - (-b) ** k) <= 1e-2, (k, name)


def test_corner_incompatible():
    rep = corner_limit(erfc_problem(), 0)
    lim = dict((name, tr.value) for name, tr in rep.paths)
    assert rep.compat_order == -1
    assert rep.predicted_limit is None and rep.agrees is None
    assert rep.spread() > 0.3
    assert abs(lim["diagonal"] - lim["parabolic"]) > 0.3
    assert lim["parabolic"] == pytest.approx(erfc_series(0.5), abs=1e-6)
    # along the diagonal u = erfc(sqrt(h)/2), which tends to 1 like sqrt(h)
    assert lim["diagonal"] > 0.9
    assert lim["flat"] == pytest.approx(1.0, abs=1e-3)


def test_corner_diagonal_path_values():
    rep = corner_limit(erfc_problem(), 0, paths=("diagonal",))
    for h, v in rep.paths[0][1].approximants:
        assert v == pytest.approx(erfc_series(math.sqrt(h) / 2), abs=1e-10)


def test_corner_zero_data():
    rep = corner_limit(zero_problem(), 2)
    assert all(tr.value == 0 for _, tr in rep.paths)
    assert rep.agrees


def test_corner_order_cap():
    with pytest.raises(ValueError):
        corner_limit(caloric_problem(), 21)


# --- chain and decay -------------------------------------------------------------------

def test_chain_caloric():
    rep = corollary_chain_check(caloric_problem(), 1)
    assert len(rep.rows) == 3
    assert rep.max_mismatch <= 1e-4
    for _, t, d, g3 in rep.rows:
        assert g3 == pytest.approx(-math.exp(t), abs=1e-6)


def test_chain_caloric_steep():
    rep = corollary_chain_check(caloric_problem(1.0, 2.0), 1)
    assert rep.max_mismatch <= 1e-3
    for _, t, d, g3 in rep.rows:
        assert d == pytest.approx(-8 * math.exp(4 * t), rel=1e-6)


def test_chain_zero_and_gate():
    rep = corollary_chain_check(zero_problem(), 1)
    assert rep.max_mismatch == 0 and all(r[2] == 0 and r[3] == 0 for r in rep.rows)
    with pytest.raises(ValueError):
        corollary_chain_check(erfc_problem(), 1)


def test_decay_examples():
    rows = decay_profile(caloric_problem(), 3, 0, 1.0, [5.0, 10.0, 20.0])
    for row, approx in zip(rows, (2.29, 0.1234, 4.482e-5)):
        assert row.value == pytest.approx(math.e * row.x ** 3 * math.exp(-row.x), rel=1e-10)
        assert row.value == pytest.approx(approx, rel=1e-2)
    assert all(r.value == 0 for r in decay_profile(zero_problem(), 3, 0, 1.0, [1.0, 2.0]))
    rows = decay_profile(erfc_problem(), 2, 0, 1.0, [5.0, 10.0, 20.0])
    for row in rows:
        assert row.value == pytest.approx(row.x ** 2 * erfc_series(row.x / 2), rel=1e-10)
    assert rows[0].value > rows[1].value > rows[2].value


def test_decay_derivative_profile():
    rows = decay_profile(caloric_problem(), 2, 1, 0.5, [2.0, 4.0, 8.0])
    logs = [r.log10_value for r in rows]
    assert logs == sorted(logs, reverse=True)
    for r in rows:
        assert r.value == pytest.approx(r.x ** 2 * math.exp(0.5 - r.x), rel=1e-9)
    with pytest.raises(ValueError):
        decay_profile(caloric_problem(), 2, 0, 1.0, [2.0, 1.0])
