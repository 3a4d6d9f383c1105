import math

import numpy as np
import pytest

from tauprec.coefficients import grunwald_coeffs
from tauprec.fde import (FdeProblem, SolverDidNotConverge, assemble_1d, assemble_2d,
                         bump_frac_derivative, example2_problem, example2_tau,
                         example3_problem, example3_tau, example_rhs, grid_1d, march,
                         wsgd_coeffs)
from tauprec.spectra import dense_from_coeffs, dense_from_toeplitz
from tauprec.symbols import fourier_coeffs_closed


def dense_shifted_grunwald(alpha, n, scheme="grunwald1"):
    """Dense ``-D`` with ``D[i, j] = w_{i-j+1}`` (zero outside ``-1 <= i-j <= n-1``)."""
    w = grunwald_coeffs(alpha, n + 1) if scheme == "grunwald1" else wsgd_coeffs(alpha, n + 1)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            k = i - j + 1
            if 0 <= k <= n:
                out[i, j] = -w[k]
    return out


def problem_1d(alpha=1.6, dp=1.3, dm=0.4, source=None, initial=None, **kw):
    source = source or (lambda x, t: np.sin(np.pi * x) * (1 + t))
    initial = initial or (lambda x: x * (1 - x))
    return FdeProblem(1, ((0.0, 1.0),), 1.0, (alpha,), (dp,), (dm,), source, initial, **kw)


def test_1d_dense_assembly():
    n, tau = 32, 0.01
    prob = problem_1d()
    sysm = assemble_1d(prob, n, tau)
    h = 1.0 / 33
    nu = h ** 1.6 / tau
    assert sysm.params.nu == pytest.approx(nu)
    d = dense_shifted_grunwald(1.6, n)
    np.testing.assert_allclose(dense_from_toeplitz(sysm.operator),
                               nu * np.eye(n) + 1.3 * d + 0.4 * d.T, atol=1e-13)


def test_1d_symmetric_when_diffusion_balanced():
    sysm = assemble_1d(problem_1d(dp=0.8, dm=0.8), 64, 0.02)
    a = dense_from_toeplitz(sysm.operator)
    np.testing.assert_allclose(a, a.T, atol=1e-14)


def test_laplacian_limit_of_assembly():
    n, d, nu = 9, 0.7, 2.0
    g = fourier_coeffs_closed("g_1d", n, nu=nu, d_plus=d, d_minus=d, alpha=2.0)
    lap = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    np.testing.assert_allclose(dense_from_coeffs(g), nu * np.eye(n) + 2 * d * lap, atol=1e-14)


def test_2d_dense_kronecker_assembly():
    prob = example3_problem((1.3, 1.8), stepper="backward_euler")
    prob.scheme = "grunwald1"
    tau = 0.05
    sysm = assemble_2d(prob, 8, 8, tau)
    h = 2.0 / 9
    blocks = []
    for i, a in enumerate((1.3, 1.8)):
        d = dense_shifted_grunwald(a, 8)
        blocks.append(tau / h ** a * (prob.d_plus[i] * d + prob.d_minus[i] * d.T))
    ref = np.eye(64) + np.kron(np.eye(8), blocks[0]) + np.kron(blocks[1], np.eye(8))
    np.testing.assert_allclose(dense_from_toeplitz(sysm.operator), ref, atol=1e-12)


def test_2d_wsgd_crank_nicolson_assembly():
    prob = example3_problem((1.5, 1.7))
    tau = example3_tau(6)
    sysm = assemble_2d(prob, 6, 5, tau)
    assert sysm.theta == 0.5
    blocks = []
    for i, (a, n) in enumerate(zip((1.5, 1.7), (6, 5))):
        d = dense_shifted_grunwald(a, n, "wsgd2")
        h = 2.0 / (n + 1)
        blocks.append(0.5 * tau / h ** a * (prob.d_plus[i] * d + prob.d_minus[i] * d.T))
    ref = np.eye(30) + np.kron(np.eye(5), blocks[0]) + np.kron(blocks[1], np.eye(6))
    np.testing.assert_allclose(dense_from_toeplitz(sysm.operator), ref, atol=1e-12)


def test_2d_zero_diffusion_is_identity():
    prob = FdeProblem(2, ((0, 1), (0, 1)), 1.0, (1.5, 1.5), (0, 0), (0, 0),
                      lambda x, y, t: x + y, lambda x, y: 0 * x)
    sysm = assemble_2d(prob, 5, 4, 0.1)
    np.testing.assert_allclose(dense_from_toeplitz(sysm.operator), np.eye(20), atol=1e-15)


def test_zero_data_needs_no_iterations():
    prob = problem_1d(source=lambda x, t: 0 * x, initial=lambda x: 0 * x)
    res = march(assemble_1d(prob, 50, 0.1))
    assert len(res.reports) == 10
    assert res.max_iterations == 0 and res.first_step_iterations == 0
    assert not res.solution.any()


@pytest.mark.parametrize("stepper", ["backward_euler", "crank_nicolson"])
def test_one_step_without_diffusion(stepper):
    prob = problem_1d(dp=0.0, dm=0.0, stepper=stepper)
    tau = 0.05
    sysm = assemble_1d(prob, 40, tau)
    res = march(sysm, steps=1)
    x = sysm.grid[0]
    t_src = tau if stepper == "backward_euler" else tau / 2
    np.testing.assert_allclose(res.solution, x * (1 - x) + tau * prob.source(x, t_src),
                               atol=1e-12)


def test_example2_source_at_time_zero():
    x, _ = grid_1d(0.0, 1.0, 7)
    y, _ = grid_1d(0.0, 1.0, 5)
    f = example_rhs(2, [x, y], 0.0).reshape((7, 5), order="F")
    np.testing.assert_allclose(f, 100 * np.sin(10 * x)[:, None] * np.cos(y)[None, :],
                               atol=1e-12)
    with pytest.raises(ValueError):
        example_rhs(5, [x, y], 0.0)


def test_example2_problem_setup():
    prob = example2_problem((1.5, 1.5))
    assert prob.d_plus == (50.0, 20.0) and prob.d_minus == (10.0, 30.0)
    assert example2_tau(127, 1.5) == pytest.approx(1.0 / math.ceil(127 ** 1.5))
    assert not prob.initial(np.ones(3), np.ones(3)).any()


def test_example3_boundary_and_derivative_limits():
    prob = example3_problem((1.5, 1.5))
    edge = np.array([0.0, 2.0])
    mid = np.array([0.3, 1.1])
    np.testing.assert_allclose(prob.exact(edge, mid, 0.7), 0.0)
    np.testing.assert_allclose(prob.exact(mid, edge, 0.7), 0.0)
    left, right = bump_frac_derivative(edge, 1.5)
    assert left[0] == 0.0 and right[1] == 0.0
    # mirror symmetry of x^2 (2 - x)^2
    x = np.linspace(0.1, 1.9, 7)
    l, r = bump_frac_derivative(x, 1.7)
    np.testing.assert_allclose(l, r[::-1], rtol=1e-12)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_fractional_derivative_against_grunwald_sums(alpha):
    # second-order weighted-shifted sums of the bump approach the closed form
    bump = lambda z: z * z * (2 - z) ** 2
    errs = []
    for n in (400, 800):
        x, h = grid_1d(0.0, 2.0, n)
        full = np.r_[0.0, bump(x), 0.0]
        w = wsgd_coeffs(alpha, n + 2)
        approx = np.array([w[: i + 2] @ full[i + 1::-1][: i + 2] for i in range(1, n + 1)])
        approx /= h ** alpha
        exact = bump_frac_derivative(x, alpha)[0]
        inner = (x > 0.5) & (x < 1.5)
        errs.append(np.max(np.abs(approx - exact)[inner]))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 3.0


def test_example3_continuous_residual():
    # the source makes the exact solution satisfy u_t = L u + f pointwise
    a = (1.4, 1.7)
    prob = example3_problem(a)
    rng = np.random.default_rng(7)
    x1, x2 = rng.uniform(0.05, 1.95, (2, 20))
    t = 0.37
    u = prob.exact(x1, x2, t)
    l1, r1 = bump_frac_derivative(x1, a[0])
    l2, r2 = bump_frac_derivative(x2, a[1])
    b1, b2 = x1 ** 2 * (2 - x1) ** 2, x2 ** 2 * (2 - x2) ** 2
    lu = np.exp(t) * (b2 * (2.0 * l1 + 35.0 * r1) + b1 * (1.0 * l2 + 20.0 * r2))
    np.testing.assert_allclose(u, lu + prob.source(x1, x2, t), rtol=1e-12, atol=1e-12)


def test_example3_self_convergence():
    errs = []
    for n in (15, 31):
        sysm = assemble_2d(example3_problem((1.5, 1.5)), n, n, example3_tau(n))
        res = march(sysm)
        assert len(res.reports) == n + 1
        assert np.isfinite(res.error_inf)
        errs.append(res.error_inf)
    assert errs[1] < errs[0] / 2


def test_schemes_converge_to_each_other():
    diffs = []
    for n in (15, 31, 63):
        sols = []
        for scheme in ("grunwald1", "wsgd2"):
            prob = example3_problem((1.5, 1.5))
            prob.scheme = scheme
            sols.append(march(assemble_2d(prob, n, n, example3_tau(n))).solution)
        diffs.append(np.max(np.abs(sols[0] - sols[1])))
    assert diffs[0] / diffs[1] >= 1.8 and diffs[1] / diffs[2] >= 1.8


def test_march_raises_on_nonconvergence():
    sysm = assemble_2d(example2_problem((1.5, 1.5)), 31, 31, example2_tau(31, 1.5))
    with pytest.raises(SolverDidNotConverge) as err:
        march(sysm, steps=1, preconditioner="none", maxit=2)
    assert err.value.step == 1


def test_preconditioner_kinds_agree():
    sysm = assemble_2d(example2_problem((1.3, 1.7)), 15, 13, example2_tau(15, 1.3))
    sols = [march(sysm, steps=2, preconditioner=k).solution
            for k in ("symbol_tau", "abs_circulant", "none")]
    for s in sols[1:]:
        np.testing.assert_allclose(s, sols[0], atol=1e-6 * np.abs(sols[0]).max())
    with pytest.raises(ValueError):
        march(sysm, steps=1, preconditioner="tauR")


@pytest.mark.parametrize("bad", [
    dict(alphas=(2.0,)), dict(d_plus=(-1.0,)), dict(scheme="weird"), dict(stepper="rk4"),
    dict(dimension=3), dict(bounds=((0, 1), (0, 1))),
])
def test_problem_validation(bad):
    kw = dict(dimension=1, bounds=((0, 1),), t_final=1.0, alphas=(1.5,), d_plus=(1.0,),
              d_minus=(1.0,), source=lambda x, t: x, initial=lambda x: x)
    kw.update(bad)
    with pytest.raises(ValueError):
        FdeProblem(**kw)


def test_wrong_dimension_assembly():
    with pytest.raises(ValueError):
        assemble_2d(problem_1d(), 4, 4, 0.1)
    with pytest.raises(ValueError):
        assemble_1d(example2_problem((1.5, 1.5)), 4, 0.1)
