"""Discrete Riemann-Liouville space-fractional diffusion problems.

Space: shifted Grunwald (first order, ``grunwald1``) or weighted-shifted
Grunwald with shifts (1, 0) (second order, ``wsgd2``). Time: backward Euler
or Crank-Nicolson. Grids use interior nodes ``x_i = a + i h``, ``i = 1..n``,
with homogeneous Dirichlet values eliminated.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .coefficients import wsgd_coeffs
from .krylov import SolveReport, solve_symmetrized
from .preconditioners import (FdeParams1D, FdeParams2D, build_abs_circulant, build_P_1d,
                              build_P_2d, identity)
from .symbols import CoeffTensor, fourier_coeffs_closed
from .toeplitz import build_toeplitz

__all__ = [
    "FdeProblem",
    "TimeStepSystem",
    "MarchResult",
    "SolverDidNotConverge",
    "wsgd_coeffs",
    "assemble_1d",
    "assemble_2d",
    "grid_1d",
    "example2_problem",
    "example3_problem",
    "example_rhs",
    "example2_tau",
    "example3_tau",
    "bump_frac_derivative",
    "march",
]

STEPPER_WEIGHT = {"backward_euler": 1.0, "crank_nicolson": 0.5}


@dataclass
class FdeProblem:
    dimension: int
    bounds: Sequence[Tuple[float, float]]
    t_final: float
    alphas: Sequence[float]
    d_plus: Sequence[float]
    d_minus: Sequence[float]
    source: Callable
    initial: Callable
    exact: Optional[Callable] = None
    scheme: str = "grunwald1"
    stepper: str = "backward_euler"

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        for seq in (self.bounds, self.alphas, self.d_plus, self.d_minus):
            if len(seq) != self.dimension:
                raise ValueError("per-direction parameters must have one entry per dimension")
        if any(not 1.0 < a < 2.0 for a in self.alphas):
            raise ValueError("fractional orders must lie in (1, 2)")
        if min(self.d_plus) < 0 or min(self.d_minus) < 0:
            raise ValueError("diffusion coefficients must be nonnegative")
        if self.scheme not in ("grunwald1", "wsgd2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.stepper not in STEPPER_WEIGHT:
            raise ValueError(f"unknown stepper {self.stepper!r}")


@dataclass
class TimeStepSystem:
    """``K u^l = rhs(u^{l-1}, t_{l-1})`` with a constant Toeplitz ``K``.

    For the 1D scaling ``K = nu I + theta L`` (``L = d+ T(v) + d- T(v)^T``)
    and the right-hand side is ``nu u - (1 - theta) L u + h^alpha f``; in 2D
    ``K = I + A`` and the right-hand side is
    ``u - ((1 - theta)/theta) A u + tau f``.
    """

    operator: object
    params: object
    grid: List[np.ndarray]
    tau_time: float
    mass: float
    source_scale: float
    theta: float
    problem: FdeProblem = field(repr=False)

    @property
    def dims(self):
        return self.operator.dims

    def source_at(self, t):
        mesh = np.meshgrid(*self.grid, indexing="ij")
        return np.asarray(self.problem.source(*mesh, t), dtype=float).reshape(-1, order="F")

    def rhs(self, u_prev, t_prev):
        """Right-hand side of the step from ``t_prev`` to ``t_prev + tau``."""
        t_src = t_prev + self.tau_time if self.theta == 1.0 else t_prev + 0.5 * self.tau_time
        out = self.mass * u_prev + self.source_scale * self.source_at(t_src)
        if self.theta != 1.0:
            explicit = (self.operator.matvec(u_prev) - self.mass * u_prev)
            out = out - (1.0 - self.theta) / self.theta * explicit
        return out


def grid_1d(a, b, n):
    h = (b - a) / (n + 1)
    return a + h * np.arange(1, n + 1), h


def assemble_1d(problem, n, tau_time):
    """``T_n(g)`` with ``g = nu + theta (d+ v + d- conj(v))``, ``nu = h^alpha / tau``."""
    if problem.dimension != 1:
        raise ValueError("assemble_1d needs a one-dimensional problem")
    (a, b), = problem.bounds
    x, h = grid_1d(a, b, n)
    alpha = problem.alphas[0]
    theta = STEPPER_WEIGHT[problem.stepper]
    params = FdeParams1D(n, alpha, problem.d_plus[0], problem.d_minus[0], h, tau_time,
                         scheme=problem.scheme)
    v = fourier_coeffs_closed("v_alpha", n, alpha=alpha, scheme=problem.scheme).data
    data = theta * (params.d_plus * v + params.d_minus * v[::-1])
    data[n - 1] += params.nu
    op = build_toeplitz(CoeffTensor((n,), data))
    return TimeStepSystem(op, params, [x], tau_time, params.nu, h ** alpha, theta, problem)


def assemble_2d(problem, n1, n2, tau_time):
    """``T_n(1 + w_1 + w_2)``, i.e. ``I + I (x) A_1 + A_2 (x) I``."""
    if problem.dimension != 2:
        raise ValueError("assemble_2d needs a two-dimensional problem")
    theta = STEPPER_WEIGHT[problem.stepper]
    dims = (int(n1), int(n2))
    grids, hs = zip(*(grid_1d(a, b, n) for (a, b), n in zip(problem.bounds, dims)))
    params = FdeParams2D(dims, tuple(problem.alphas), tuple(problem.d_plus),
                         tuple(problem.d_minus), tuple(hs), tau_time,
                         scheme=problem.scheme, theta_weight=theta)
    coeffs = fourier_coeffs_closed("g_2d", dims, alphas=params.alphas, d_plus=params.d_plus,
                                   d_minus=params.d_minus, tau_time=tau_time, h=params.h,
                                   theta_weight=theta, scheme=problem.scheme)
    op = build_toeplitz(coeffs)
    return TimeStepSystem(op, params, list(grids), tau_time, 1.0, tau_time, theta, problem)


# ---------------------------------------------------------------------------
# benchmark problems


def example2_tau(n, alpha1):
    """Time step ``1 / ceil(n^alpha_1)``."""
    return 1.0 / math.ceil(n ** alpha1)


def example3_tau(n, t_final=1.0):
    return t_final / (n + 1)


def example2_problem(alphas):
    """Unit square, ``T = 1``, ``d = (50, 10), (20, 30)``, zero initial data."""
    def source(x, y, t):
        return 100.0 * np.sin(10.0 * x) * np.cos(y) + np.sin(10.0 * t) * x * y

    return FdeProblem(2, ((0.0, 1.0), (0.0, 1.0)), 1.0, tuple(alphas), (50.0, 20.0),
                      (10.0, 30.0), source, lambda x, y: np.zeros_like(x * y))


def bump_frac_derivative(x, alpha, length=2.0):
    """Left and right Riemann-Liouville derivatives of ``x^2 (L - x)^2`` on (0, L).

    Uses ``D^alpha x^p = Gamma(p+1)/Gamma(p+1-alpha) x^(p-alpha)`` termwise on
    ``L^2 x^2 - 2L x^3 + x^4``; the right derivative is the mirror image.
    """
    x = np.asarray(x, dtype=float)
    terms = ((2, length ** 2), (3, -2.0 * length), (4, 1.0))

    def left(z):
        return sum(c * math.gamma(p + 1) / math.gamma(p + 1 - alpha) * z ** (p - alpha)
                   for p, c in terms)

    return left(x), left(length - x)


def example3_problem(alphas, stepper="crank_nicolson"):
    """``(0, 2)^2``, ``T = 1``, ``d = (2, 35), (1, 20)``, exact solution
    ``e^t x1^2 (2 - x1)^2 x2^2 (2 - x2)^2`` with the matching source."""
    a1, a2 = alphas
    dp, dm = (2.0, 1.0), (35.0, 20.0)

    def bump(z):
        return z * z * (2.0 - z) ** 2

    def exact(x1, x2, t):
        return np.exp(t) * bump(x1) * bump(x2)

    def source(x1, x2, t):
        l1, r1 = bump_frac_derivative(x1, a1)
        l2, r2 = bump_frac_derivative(x2, a2)
        u1, u2 = bump(x1), bump(x2)
        return np.exp(t) * (u1 * u2 - u2 * (dp[0] * l1 + dm[0] * r1)
                            - u1 * (dp[1] * l2 + dm[1] * r2))

    return FdeProblem(2, ((0.0, 2.0), (0.0, 2.0)), 1.0, (a1, a2), dp, dm, source,
                      lambda x1, x2: exact(x1, x2, 0.0), exact=exact, scheme="wsgd2",
                      stepper=stepper)


def example_rhs(example_id, grid, t, alphas=(1.5, 1.5)):
    """Source samples at interior nodes, flattened with level 1 fastest."""
    mesh = np.meshgrid(*grid, indexing="ij")
    if example_id == 2:
        prob = example2_problem(alphas)
    elif example_id == 3:
        prob = example3_problem(alphas)
    else:
        raise ValueError(f"no source term for example {example_id!r}")
    return np.asarray(prob.source(*mesh, t), dtype=float).reshape(-1, order="F")


# ---------------------------------------------------------------------------
# time marching


class SolverDidNotConverge(RuntimeError):
    def __init__(self, step, report):
        super().__init__(f"solver did not converge at time step {step} "
                         f"(relres {report.final_residual:.3e}, {report.iterations} its)")
        self.step = step
        self.report = report


@dataclass
class MarchResult:
    solution: np.ndarray
    reports: List[SolveReport]
    error_inf: Optional[float] = None

    @property
    def first_step_iterations(self):
        return self.reports[0].iterations if self.reports else 0

    @property
    def max_iterations(self):
        return max((r.iterations for r in self.reports), default=0)


def build_preconditioner(system, kind):
    if kind == "symbol_tau":
        p = system.params
        return build_P_1d(p) if isinstance(p, FdeParams1D) else build_P_2d(p)
    if kind == "abs_circulant":
        return build_abs_circulant(system.operator)
    if kind == "none":
        return identity(system.dims)
    raise ValueError(f"preconditioner {kind!r} is not available for FDE systems")


def march(system, steps=None, preconditioner="symbol_tau", tol=1e-8, maxit=1000):
    """Advance from ``u_0`` over ``steps`` time steps (default: up to ``T``).

    Each step solves the symmetrized system with preconditioned MINRES from a
    zero initial guess, so per-step iteration counts are comparable. A zero
    right-hand side costs no iterations.
    """
    problem = system.problem
    if steps is None:
        steps = int(round(problem.t_final / system.tau_time))
    m = build_preconditioner(system, preconditioner) if isinstance(preconditioner, str) \
        else preconditioner
    mesh = np.meshgrid(*system.grid, indexing="ij")
    u = np.asarray(problem.initial(*mesh), dtype=float).reshape(-1, order="F")
    reports = []
    t = 0.0
    for step in range(1, steps + 1):
        b = system.rhs(u, t)
        report = solve_symmetrized(system.operator, m, b, tol=tol, maxit=maxit)
        if not report.converged:
            raise SolverDidNotConverge(step, report)
        reports.append(report)
        u = report.solution
        t = step * system.tau_time
    err = None
    if problem.exact is not None:
        ref = np.asarray(problem.exact(*mesh, t), dtype=float).reshape(-1, order="F")
        err = float(np.max(np.abs(u - ref)))
    return MarchResult(u, reports, err)
