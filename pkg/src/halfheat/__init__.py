"""Dirichlet heat problem on the half-line: transform-based evaluation of the
solution, its derivatives, and its limits at the boundary."""
from .problem import (BOUNDARY, DERIVATIVE_CAP, INITIAL, CompatibilityReport, Constant,
                      DataFamily, DomainError, ExpDecay, ExpGrow, Gaussian, HalfLineProblem,
                      Poly, PolyExp, UnsupportedOrder, caloric_problem, check_compatibility,
                      erfc_problem, eval_data, gaussian_problem, zero_problem)
from .quadrature import (DEFAULT, ContourSpec, QuadratureConfig, QuadratureError, QuadResult,
                         gamma_tail_bound, integrate_gamma, integrate_gamma_conditional,
                         integrate_interval, integrate_real_symmetric)
from .transforms import g0_tilde, g0_tilde_damped, ibp_boundary, ibp_initial, u0_hat
from .representations import (FOKAS, GAUSS, SINE, EvalResult, HorizonError, Representation,
                              ehrenpreis, eval_dt, eval_dx, eval_ehrenpreis,
                              eval_ehrenpreis_at_x0, eval_fokas, eval_fokas_at_x0, eval_gauss,
                              eval_sine, evaluate)
from .boundary import (CornerReport, TraceResult, corner_limit, corollary_chain_check,
                       decay_profile, trace_t_to_0, trace_x_to_0)

__version__ = "0.1.0"
