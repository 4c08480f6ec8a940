import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from halfheat.problem import (BOUNDARY, DERIVATIVE_CAP, INITIAL, Constant, DomainError, ExpDecay,
                              ExpGrow, Gaussian, HalfLineProblem, Poly, PolyExp,
                              UnsupportedOrder, caloric_problem, check_compatibility, eval_data)

FAMILIES = [
    ExpDecay(1.3, 0.7),
    Gaussian(0.8, 1.5),
    PolyExp([1.0, -2.0, 0.5], 1.2),
    Constant(2.5),
    ExpGrow(1.1, 0.9),
    Poly([1.0, 0.5, -0.25, 0.1]),
]


def test_eval_data_examples():
    p = HalfLineProblem(ExpDecay(1, 1), ExpGrow(1, 1))
    assert eval_data(p, INITIAL, 0, 0.0) == 1.0
    assert eval_data(p, INITIAL, 3, 0.0) == -1.0
    assert eval_data(p, BOUNDARY, 2, 0.5) == pytest.approx(math.exp(0.5), rel=1e-15)


def test_eval_data_errors():
    p = caloric_problem()
    with pytest.raises(DomainError):
        eval_data(p, INITIAL, 0, -0.1)
    with pytest.raises(UnsupportedOrder):
        eval_data(p, INITIAL, DERIVATIVE_CAP + 1, 0.0)


def test_initial_data_must_decay():
    with pytest.raises(ValueError):
        HalfLineProblem(Constant(1.0), Constant(1.0))
    with pytest.raises(ValueError):
        ExpDecay(1.0, -1.0)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.kind)
@pytest.mark.parametrize("n", range(1, 7))
def test_derivative_matches_finite_difference(fam, n):
    h = 1e-3
    xs = np.linspace(0.0, 5.0, 20)
    lower = lambda z: np.array([float(fam.derivative(n - 1, v)) for v in np.atleast_1d(z)])
    fd = (lower(xs - 2 * h) - 8 * lower(xs - h) + 8 * lower(xs + h) - lower(xs + 2 * h)) / (12 * h)
    exact = np.array([float(fam.derivative(n, v)) for v in xs])
    scale = np.maximum(np.abs(exact), np.max(np.abs(exact)) * 1e-3)
    assert np.all(np.abs(fd - exact) <= 1e-6 * scale + 1e-9)


def test_compatibility_examples():
    rep = check_compatibility(HalfLineProblem(ExpDecay(1, 1), ExpGrow(1, 1)), 3)
    assert all(d == 0 for _, d in rep.discrepancies) and rep.order >= 3
    rep = check_compatibility(HalfLineProblem(ExpDecay(0, 1), Constant(1)), 0)
    assert rep.discrepancies[0] == (0, -1.0) and rep.order == -1
    rep = check_compatibility(HalfLineProblem(ExpDecay(1, 2), ExpGrow(1, 4)), 2)
    assert all(d == 0 for _, d in rep.discrepancies) and rep.order == 2


@given(a=st.floats(0.1, 5.0) | st.floats(-5.0, -0.1), b=st.floats(0.2, 2.0))
def test_caloric_data_compatible_to_cap(a, b):
    p = HalfLineProblem(ExpDecay(a, b), ExpGrow(a, b * b))
    for n in range(DERIVATIVE_CAP // 2 + 1):
        # derivatives reach a*b^10, so the tolerance scales with them
        rep = check_compatibility(p, n, tol=1e-12 * abs(a) * max(1.0, b) ** (2 * n))
        assert rep.order >= n
