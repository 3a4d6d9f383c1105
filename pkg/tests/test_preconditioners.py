import numpy as np
import pytest

from tauprec.preconditioners import (FdeParams1D, FdeParams2D, Preconditioner, apply_inverse,
                                     build_abs_circulant, build_example1_P, build_natural_tau,
                                     build_P_1d, build_P_2d, build_strang_circulant, build_tauR,
                                     identity, level_symmetrized)
from tauprec.spectra import dense_from_toeplitz
from tauprec.symbols import (CoeffTensor, eval_abs_g_1d, example4_coeffs,
                             fourier_coeffs_closed)
from tauprec.tau import TauOperator
from tauprec.toeplitz import build_toeplitz

from test_tau import hankel_correction, sym_toeplitz_dense


def dense_tau_of_symmetric(first_col):
    return sym_toeplitz_dense(first_col) - hankel_correction(first_col)


def sqrtm_spd(a):
    lam, vec = np.linalg.eigh(0.5 * (a + a.T))
    return (vec * np.sqrt(np.maximum(lam, 0))) @ vec.T


def powm_spd(a, p):
    lam, vec = np.linalg.eigh(0.5 * (a + a.T))
    return (vec * np.maximum(lam, 0) ** p) @ vec.T


def dense_blocks_1d(alpha, n, scheme="grunwald1"):
    """Dense ``S = tau(T(v) + T(v)^T)`` and ``L = T(2 - 2 cos)``."""
    v = fourier_coeffs_closed("v_alpha", n, alpha=alpha, scheme=scheme).data
    sym_first = (v + v[::-1])[n - 1:]
    lap = dense_from_toeplitz(build_toeplitz(fourier_coeffs_closed("laplacian", n)))
    return dense_tau_of_symmetric(sym_first), lap


def params_1d(n=16, alpha=1.5, dp=1.0, dm=0.2, nu=None):
    h = 1.0 / (n + 1)
    tau = h ** alpha if nu is None else h ** alpha / nu
    return FdeParams1D(n, alpha, dp, dm, h, tau)


def test_p1d_zero_diffusion_is_scaled_identity():
    p = params_1d(dp=0.0, dm=0.0, nu=0.37)
    np.testing.assert_allclose(build_P_1d(p).eigenvalues(), 0.37, rtol=1e-14)


def test_p1d_laplacian_case_is_perfect_square():
    n, d = 20, 0.7
    p = params_1d(n=n, alpha=2.0, dp=d, dm=d, nu=0.5)
    s = 2 - 2 * np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
    np.testing.assert_allclose(build_P_1d(p).eigenvalues(), 0.5 + 2 * d * s, rtol=1e-12)


def test_p1d_matches_dense_matrix_square_root():
    n, a, dp, dm = 16, 1.5, 1.0, 0.2
    p = params_1d(n, a, dp, dm, nu=0.8)
    s, lap = dense_blocks_1d(a, n)
    nu = p.nu
    inside = (nu ** 2 * np.eye(n) + nu * (dp + dm) * s + (dp - dm) ** 2 * powm_spd(lap, a)
              + dp * dm * s @ s)
    np.testing.assert_allclose(build_P_1d(p).dense(), sqrtm_spd(inside), atol=1e-12)


def test_p1d_wsgd_block_is_tau_matrix():
    # the |v2|^2 stand-in must itself be diagonalised by the sine transform
    n, a = 12, 1.4
    p = FdeParams1D(n, a, 1.0, 0.3, 1.0 / (n + 1), 1.0 / (n + 1) ** a, scheme="wsgd2")
    d = build_P_1d(p).dense()
    np.testing.assert_allclose(d, d.T, atol=1e-13)
    assert np.all(build_P_1d(p).eigenvalues() >= p.nu * (1 - 1e-12))


@pytest.mark.parametrize("nu", [0.05, 1.0, 7.0])
def test_p1d_lower_bound_and_centrosymmetry(nu):
    p = params_1d(n=16, nu=nu)
    m = build_P_1d(p)
    assert m.eigenvalues().min() >= nu * (1 - 1e-12)
    d = m.dense()
    np.testing.assert_allclose(d[::-1, ::-1], d, atol=1e-11)


def test_p1d_symbol_matching_trend():
    errs = []
    for n in (128, 256, 512):
        p = params_1d(n=n, alpha=1.5, dp=1.0, dm=0.2)
        theta = np.pi * np.arange(1, n + 1) / (n + 1)
        absg = eval_abs_g_1d(p.nu, 1.0, 0.2, 1.5, theta)
        errs.append(np.max(np.abs(build_P_1d(p).eigenvalues() - absg)) / absg.max())
    assert errs[0] > errs[1] > errs[2]


def params_2d(dims=(12, 10), alphas=(1.3, 1.7), dp=(1.0, 2.0), dm=(0.5, 0.1), tau=0.01,
              **kw):
    return FdeParams2D.on_box(dims, alphas, dp, dm, tau, **kw)


def test_p2d_zero_diffusion_is_identity():
    p = params_2d(dp=(0.0, 0.0), dm=(0.0, 0.0))
    np.testing.assert_allclose(build_P_2d(p).eigenvalues(), 1.0)


def test_p2d_equal_diffusion_keeps_only_symmetric_part():
    p = params_2d(dims=(9, 7), dp=(0.6, 1.1), dm=(0.6, 1.1))
    from tauprec.preconditioners import symmetric_part_tau
    r1 = p.scale(0) * 0.6 * np.abs(symmetric_part_tau(1.3, 9))
    r2 = p.scale(1) * 1.1 * np.abs(symmetric_part_tau(1.7, 7))
    expected = 1 + r1[:, None] + r2[None, :]
    np.testing.assert_allclose(build_P_2d(p).tau.eigs, expected, rtol=1e-12)


@pytest.mark.parametrize("scheme, theta_weight", [("grunwald1", 1.0), ("wsgd2", 0.5)])
def test_p2d_matches_dense_kronecker(scheme, theta_weight):
    p = params_2d(scheme=scheme, theta_weight=theta_weight)
    blocks = []
    for i, n in enumerate(p.dims):
        s, lap = dense_blocks_1d(p.alphas[i], n, scheme)
        mid = powm_spd(lap, p.alphas[i])
        if scheme == "wsgd2":
            a, b = p.alphas[i] / 2, 1 - p.alphas[i] / 2
            # |a e^{-i t} + b|^2 = a^2 + b^2 + 2ab cos t = (a + b)^2 - ab (2 - 2 cos t)
            mid = mid @ ((a + b) ** 2 * np.eye(n) - a * b * lap)
        inner = (p.d_plus[i] - p.d_minus[i]) ** 2 * mid + p.d_plus[i] * p.d_minus[i] * s @ s
        blocks.append(p.scale(i) * sqrtm_spd(inner))
    n1, n2 = p.dims
    ref = np.eye(n1 * n2) + np.kron(np.eye(n2), blocks[0]) + np.kron(blocks[1], np.eye(n1))
    d = build_P_2d(p).dense()
    np.testing.assert_allclose(d, ref, atol=1e-10)
    np.testing.assert_allclose(d[::-1, ::-1], d, atol=1e-11)
    assert build_P_2d(p).eigenvalues().min() >= 1 - 1e-12


def test_tauR_laplacian_limit():
    m = build_tauR((6, 5), (2.0, 2.0))
    s1 = 2 - 2 * np.cos(np.pi * np.arange(1, 7) / 7)
    s2 = 2 - 2 * np.cos(np.pi * np.arange(1, 6) / 6)
    np.testing.assert_allclose(m.tau.eigs, s1[:, None] + s2[None, :], atol=1e-13)


def test_tauR_one_level_dense():
    n, a = 16, 1.5
    r = fourier_coeffs_closed("r_alpha", n, alpha=a).data[n - 1:]
    np.testing.assert_allclose(build_tauR((n,), (a,)).dense(), dense_tau_of_symmetric(r),
                               atol=1e-12)


@pytest.mark.parametrize("alpha", [1.1, 1.5, 1.9])
def test_tauR_relative_spectrum(alpha):
    n = 32
    m = build_tauR((n,), (alpha,))
    r = dense_from_toeplitz(build_toeplitz(fourier_coeffs_closed("r_alpha", n, alpha=alpha)))
    lam = np.linalg.eigvals(np.linalg.solve(m.dense(), r)).real
    assert lam.min() > 0.5 and lam.max() < 1.5


def test_tauR_validation():
    with pytest.raises(ValueError):
        build_tauR((4, 4), (1.5,))
    with pytest.raises(ValueError):
        build_tauR((4, 4), (1.5, 1.5), (1.0, -1.0))


def test_natural_tau_tridiagonal_and_dense():
    lap = build_toeplitz(fourier_coeffs_closed("laplacian", 7))
    np.testing.assert_allclose(build_natural_tau(lap).dense(), dense_from_toeplitz(lap),
                               atol=1e-13)
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    a[0] += 10
    b[0] += 10
    op = build_toeplitz(CoeffTensor.separable([CoeffTensor.from_symmetric_1d(a),
                                               CoeffTensor.from_symmetric_1d(b)]))
    ref = np.kron(dense_tau_of_symmetric(b), dense_tau_of_symmetric(a))
    np.testing.assert_allclose(build_natural_tau(op).dense(), ref, atol=1e-11)


def test_natural_tau_spd_for_example4():
    op = build_toeplitz(example4_coeffs(1.5, 1.5, (16, 16)))
    m = build_natural_tau(op)
    assert np.all(np.linalg.eigvalsh(m.dense()) > 0)


def test_natural_tau_symmetrize_option():
    v = build_toeplitz(fourier_coeffs_closed("g_1d", 10, nu=1.0, d_plus=1.0, d_minus=0.2,
                                             alpha=1.5))
    with pytest.raises(ValueError):
        build_natural_tau(v)
    m = build_natural_tau(v, symmetrize=True)
    d = dense_from_toeplitz(v)
    sym = level_symmetrized(v.coeffs).data[9:]
    np.testing.assert_allclose(sym, (0.5 * (d + d.T))[:, 0])
    np.testing.assert_allclose(m.dense(), dense_tau_of_symmetric(sym), atol=1e-12)


def test_abs_circulant_reproduces_spd_circulant():
    n = 8
    c = np.array([4.0, -1.0, 0.3, 0.1, 0.05, 0.1, 0.3, -1.0])  # symmetric circulant column
    data = np.concatenate((c[1:][::-1] * 0 + c[:0:-1][::-1][::-1], c))
    # Toeplitz coefficients of the circulant: t_j = c_j, t_{-j} = c_{n-j}
    neg = c[::-1][:-1]  # c_{n-1}, ..., c_1 -> indices -(n-1)..-1
    data = np.concatenate((neg[::-1][::-1], c))
    op = build_toeplitz(CoeffTensor((n,), data))
    dense_circ = np.array([[c[(i - j) % n] for j in range(n)] for i in range(n)])
    assert np.all(np.linalg.eigvalsh(dense_circ) > 0)
    np.testing.assert_allclose(build_abs_circulant(op).dense(), dense_circ, atol=1e-12)


def test_abs_circulant_optimal_first_column(rng):
    n = 8
    data = rng.standard_normal(2 * n - 1)
    op = build_toeplitz(CoeffTensor((n,), data))
    t = lambda j: data[j + n - 1]
    col = np.array([((n - j) * t(j) + (j * t(j - n) if j else 0.0)) / n for j in range(n)])
    lam = np.abs(np.fft.fft(col))
    np.testing.assert_allclose(np.sort(build_abs_circulant(op).eigenvalues()),
                               np.sort(np.maximum(lam, 1e-14 * lam.max())), rtol=1e-12)
    # the optimal circulant minimises the Frobenius distance: compare with a perturbation
    t_dense = dense_from_toeplitz(op)
    circ = lambda cc: np.array([[cc[(i - j) % n] for j in range(n)] for i in range(n)])
    best = np.linalg.norm(circ(col) - t_dense)
    for _ in range(5):
        assert np.linalg.norm(circ(col + 1e-3 * rng.standard_normal(n)) - t_dense) > best


def test_abs_circulant_floor_is_reported():
    # symbol 2 - 2cos: the circulant has an exactly zero eigenvalue at theta = 0
    lap = build_toeplitz(fourier_coeffs_closed("laplacian", 8))
    m = build_strang_circulant(lap)
    assert np.all(m.eigenvalues() > 0)
    assert "floor" in m.note


def test_apply_inverse_contract(rng):
    m = build_P_2d(params_2d(dims=(10, 9)))
    r = rng.standard_normal(90)
    np.testing.assert_allclose(apply_inverse(identity((10, 9)), r), r, atol=1e-13)
    np.testing.assert_allclose(m.apply(apply_inverse(m, r)), r, atol=1e-11)
    np.testing.assert_allclose(apply_inverse(m, r), np.linalg.solve(m.dense(), r), atol=1e-11)
    x, y = rng.standard_normal((2, 90))
    assert x @ m.apply_inverse(y) == pytest.approx(m.apply_inverse(x) @ y, rel=1e-11)
    with pytest.raises(ValueError):
        m.apply_inverse(np.ones(5))


def test_circulant_apply_inverse_symmetric(rng):
    op = build_toeplitz(fourier_coeffs_closed("example1", 32))
    m = build_abs_circulant(op)
    x, y = rng.standard_normal((2, 32))
    assert x @ m.apply_inverse(y) == pytest.approx(m.apply_inverse(x) @ y, rel=1e-11)


def test_preconditioner_rejects_indefinite():
    with pytest.raises(ValueError):
        Preconditioner("bad", (3,), tau=TauOperator(np.array([1.0, -1.0, 2.0])))
    with pytest.raises(ValueError):
        Preconditioner("bad", (3,))


def test_example1_P():
    n = 10
    s = 2 - 2 * np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
    np.testing.assert_allclose(build_example1_P(n).eigenvalues(), np.sqrt(s ** 2 + s ** 3))
