"""Generating functions (symbols) and their Fourier coefficients.

Convention: ``T_n(f)[i, j] = c_{i-j}`` with
``c_j = (1 / 2pi) * integral_{-pi}^{pi} f(theta) exp(-1j * j * theta) dtheta``.
Multilevel coefficient arrays keep one axis per level, level 1 first; the
index ``j_i`` is stored at position ``j_i + n_i - 1``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi

from .coefficients import frac_centered_coeffs, grunwald_coeffs, wsgd_coeffs

__all__ = [
    "Symbol",
    "CoeffTensor",
    "eval_v_alpha",
    "eval_v2_alpha",
    "eval_g_1d",
    "eval_abs_g_1d",
    "eval_g_2d",
    "eval_example1_symbol",
    "eval_plateau_power",
    "eval_example4_symbol",
    "eval_q_alpha",
    "eval_r_alpha",
    "example4_symbol",
    "q_alpha_symbol",
    "fourier_coeffs_closed",
    "fourier_coeffs_numeric",
    "power_coeffs",
    "plateau_power_coeffs",
    "example4_coeffs",
    "q_alpha_coeffs",
]


@dataclass(frozen=True)
class Symbol:
    """A generating function on ``[-pi, pi]^k``.

    ``func`` takes ``k`` broadcastable arrays (one per level) and returns the
    symbol values. ``terms`` optionally records a separable structure
    ``sum_t coef_t * prod_i f_{t,i}(theta_i)`` so that Fourier coefficients can
    be obtained from 1D quadratures only.
    """

    levels: int
    func: Callable
    real_coeffs: bool = True
    even: bool = False
    name: str = ""
    terms: Optional[Tuple[Tuple[float, Tuple[Callable, ...]], ...]] = field(
        default=None, compare=False)

    def __call__(self, *theta):
        if len(theta) != self.levels:
            raise ValueError(f"{self.name or 'symbol'} expects {self.levels} "
                             f"angle arrays, got {len(theta)}")
        return self.func(*theta)


@dataclass(frozen=True)
class CoeffTensor:
    """Fourier coefficients ``c_j`` for ``|j_i| <= n_i - 1``."""

    dims: Tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims or min(dims) < 1:
            raise ValueError(f"invalid dims {self.dims!r}")
        expected = tuple(2 * n - 1 for n in dims)
        data = np.asarray(self.data)
        if data.shape != expected:
            raise ValueError(f"coefficient array has shape {data.shape}, "
                             f"expected {expected} for dims {dims}")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @property
    def levels(self):
        return len(self.dims)

    def at(self, *j):
        """Coefficient with multi-index ``j`` (zero outside the stored range)."""
        idx = []
        for ji, n in zip(j, self.dims):
            if abs(ji) > n - 1:
                return 0.0
            idx.append(ji + n - 1)
        return self.data[tuple(idx)]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.data)

    def real_if_close(self, rtol=1e-10):
        """Drop a negligible imaginary part, as real-coefficient symbols need."""
        if self.is_real:
            return self
        scale = max(np.abs(self.data).max(), 1e-300)
        if np.abs(self.data.imag).max() > rtol * scale:
            raise ValueError("coefficients have a non-negligible imaginary part")
        return CoeffTensor(self.dims, self.data.real)

    def reflected(self):
        """Coefficients of ``f(-theta)``: ``c_j -> c_{-j}`` on every level."""
        return CoeffTensor(self.dims, self.data[(slice(None, None, -1),) * self.levels])

    @classmethod
    def from_1d(cls, values_neg_to_pos):
        values = np.asarray(values_neg_to_pos)
        return cls(((values.size + 1) // 2,), values)

    @classmethod
    def from_symmetric_1d(cls, first_column):
        """1-level coefficients with ``c_{-j} = c_j`` from ``c_0 .. c_{n-1}``."""
        t = np.asarray(first_column)
        return cls((t.size,), np.concatenate((t[:0:-1], t)))

    @classmethod
    def identity(cls, dims):
        dims = tuple(int(n) for n in dims)
        data = np.zeros(tuple(2 * n - 1 for n in dims))
        data[tuple(n - 1 for n in dims)] = 1.0
        return cls(dims, data)

    @classmethod
    def separable(cls, factors):
        """Coefficients of ``prod_i f_i(theta_i)`` from per-level 1D tensors."""
        factors = list(factors)
        out = factors[0].data
        for f in factors[1:]:
            out = np.multiply.outer(out, f.data)
        return cls(tuple(f.dims[0] for f in factors), out)

    def __add__(self, other):
        if not isinstance(other, CoeffTensor) or other.dims != self.dims:
            return NotImplemented
        return CoeffTensor(self.dims, self.data + other.data)

    def scaled(self, factor):
        return CoeffTensor(self.dims, factor * self.data)


# ---------------------------------------------------------------------------
# scalar symbols


def _one_minus_exp_pow(theta, alpha):
    """``(1 - exp(i theta))^alpha`` on the principal branch, 0 at theta = 0."""
    theta = np.asarray(theta, dtype=float)
    z = 1.0 - np.exp(1j * theta)
    out = np.zeros(np.broadcast(theta).shape, dtype=complex)
    nz = np.abs(z) > 0
    out[nz] = np.exp(alpha * np.log(z[nz]))
    return out


def eval_v_alpha(alpha, theta):
    """``v_alpha(theta) = -exp(-i theta) (1 - exp(i theta))^alpha``."""
    theta = np.asarray(theta, dtype=float)
    return -np.exp(-1j * theta) * _one_minus_exp_pow(theta, alpha)


def eval_v2_alpha(alpha, theta):
    """Symbol of the weighted-shifted Grunwald operator with shifts (1, 0).

    ``-[(alpha/2) exp(-i theta) + (2 - alpha)/2] (1 - exp(i theta))^alpha``.
    """
    theta = np.asarray(theta, dtype=float)
    mult = 0.5 * alpha * np.exp(-1j * theta) + 0.5 * (2.0 - alpha)
    return -mult * _one_minus_exp_pow(theta, alpha)


def eval_g_1d(nu, d_plus, d_minus, alpha, theta):
    """``g = nu + d_plus v_alpha + d_minus conj(v_alpha)``."""
    v = eval_v_alpha(alpha, theta)
    return nu + d_plus * v + d_minus * np.conj(v)


def eval_abs_g_1d(nu, d_plus, d_minus, alpha, theta):
    """``|g|`` through the expansion that only involves ``v + conj(v)``
    and ``|v|^2 = (2 - 2 cos theta)^alpha``."""
    theta = np.asarray(theta, dtype=float)
    v = eval_v_alpha(alpha, theta)
    s = 2.0 * v.real
    sq = (nu * nu + nu * (d_plus + d_minus) * s
          + (d_plus - d_minus) ** 2 * (2.0 - 2.0 * np.cos(theta)) ** alpha
          + d_plus * d_minus * s * s)
    return np.sqrt(np.maximum(sq, 0.0))


def _w_symbol(alpha, d_plus, d_minus, scale, theta, scheme):
    v = eval_v_alpha(alpha, theta) if scheme == "grunwald1" else eval_v2_alpha(alpha, theta)
    return scale * (d_plus * v + d_minus * np.conj(v))


def eval_g_2d(alphas, d_plus, d_minus, tau_time, h, theta1, theta2,
              theta_weight=1.0, scheme="grunwald1"):
    """Two-level symbol ``1 + w_1(theta_1) + w_2(theta_2)``.

    ``w_i = theta_weight * tau_time / h_i^alpha_i * (d_{i,+} v + d_{i,-} conj(v))``;
    ``theta_weight`` is 1 for backward Euler and 1/2 for Crank-Nicolson.
    """
    out = 1.0 + 0j
    for i, th in enumerate((theta1, theta2)):
        scale = theta_weight * tau_time / h[i] ** alphas[i]
        out = out + _w_symbol(alphas[i], d_plus[i], d_minus[i], scale, th, scheme)
    return out


def eval_example1_symbol(theta):
    """``(2 - 2 cos theta)(1 + i theta)``."""
    theta = np.asarray(theta, dtype=float)
    return (2.0 - 2.0 * np.cos(theta)) * (1.0 + 1j * theta)


def eval_plateau_power(a, theta):
    """``|theta|^a`` for ``|theta| < pi/2`` and 1 elsewhere."""
    t = np.abs(np.asarray(theta, dtype=float))
    return np.where(t < 0.5 * np.pi, t ** a, 1.0)


def eval_example4_symbol(alpha1, alpha2, theta1, theta2):
    """``p(theta) = p_a1(theta1) + p_a2(theta2) - p_1(theta1) p_1(theta2)``."""
    return (eval_plateau_power(alpha1, theta1) + eval_plateau_power(alpha2, theta2)
            - eval_plateau_power(1.0, theta1) * eval_plateau_power(1.0, theta2))


def eval_q_alpha(alphas, weights, *theta):
    """``q(theta) = sum_i l_i |theta_i|^alpha_i``."""
    return sum(l * np.abs(np.asarray(t, dtype=float)) ** a
               for a, l, t in zip(alphas, weights, theta))


def eval_r_alpha(alpha, theta):
    """``(2 - 2 cos theta)^(alpha/2) = |2 sin(theta/2)|^alpha``."""
    return np.abs(2.0 * np.sin(0.5 * np.asarray(theta, dtype=float))) ** alpha


def example4_symbol(alpha1, alpha2):
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    terms = (
        (1.0, (lambda t: eval_plateau_power(alpha1, t), one)),
        (1.0, (one, lambda t: eval_plateau_power(alpha2, t))),
        (-1.0, (lambda t: eval_plateau_power(1.0, t),
                lambda t: eval_plateau_power(1.0, t))),
    )
    return Symbol(2, lambda t1, t2: eval_example4_symbol(alpha1, alpha2, t1, t2),
                  real_coeffs=True, even=True, name="p_alpha", terms=terms)


def q_alpha_symbol(alphas, weights=None):
    alphas = tuple(alphas)
    weights = tuple(weights) if weights is not None else (1.0,) * len(alphas)
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    terms = []
    for i, (a, l) in enumerate(zip(alphas, weights)):
        fs = [one] * len(alphas)
        fs[i] = (lambda a_: (lambda t: np.abs(np.asarray(t, dtype=float)) ** a_))(a)
        terms.append((l, tuple(fs)))
    return Symbol(len(alphas), lambda *t: eval_q_alpha(alphas, weights, *t),
                  real_coeffs=True, even=True, name="q_alpha", terms=tuple(terms))


# ---------------------------------------------------------------------------
# exact coefficients


def _v_alpha_coeffs(alpha, n, scheme="grunwald1"):
    """Coefficients of ``v_alpha`` (or its WSGD variant) for |j| <= n - 1.

    ``c_j = -w_{j+1}`` for ``j >= -1`` and 0 below, where ``w`` are the
    Grunwald weights (or the weighted-shifted weights).
    """
    if scheme == "grunwald1":
        w = grunwald_coeffs(alpha, n + 1)
    elif scheme == "wsgd2":
        w = wsgd_coeffs(alpha, n + 1)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    data = np.zeros(2 * n - 1)
    # position of j is j + n - 1; j = -1 .. n-1 maps to w_0 .. w_n
    lo = n - 2
    if lo >= 0:
        data[lo:] = -w[: n + 1]
    else:  # n == 1: only j = 0
        data[:] = -w[1:2]
    return data


def _example1_coeffs(n):
    j = np.arange(-(n - 1) - 1, n + 1)
    a = np.zeros(j.size)
    nz = j != 0
    a[nz] = (-1.0) ** (j[nz] + 1) / j[nz]
    a[~nz] = 1.0
    # (2 - 2cos) * (1 + i theta): c_j = 2 a_j - a_{j-1} - a_{j+1}
    return 2.0 * a[1:-1] - a[:-2] - a[2:]


def fourier_coeffs_closed(kind, dims, **params):
    """Exact Fourier coefficients for the symbols with known closed forms.

    Parameters
    ----------
    kind : str
        ``"laplacian"``, ``"v_alpha"``, ``"g_1d"``, ``"g_2d"``, ``"r_alpha"``
        or ``"example1"``.
    dims : int or sequence of int
        Matrix size per level.
    **params
        Symbol parameters: ``alpha`` (and ``scheme``) for ``v_alpha``;
        ``nu, d_plus, d_minus, alpha`` for ``g_1d``;
        ``alphas, d_plus, d_minus, tau_time, h`` (``theta_weight``, ``scheme``)
        for ``g_2d``; ``alpha`` for ``r_alpha``.
    """
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(n) for n in dims)
    if kind == "g_2d":
        if len(dims) != 2:
            raise ValueError("g_2d needs two levels")
        out = CoeffTensor.identity(dims)
        theta_weight = params.get("theta_weight", 1.0)
        scheme = params.get("scheme", "grunwald1")
        eye = [CoeffTensor.identity((n,)) for n in dims]
        for i in range(2):
            scale = theta_weight * params["tau_time"] / params["h"][i] ** params["alphas"][i]
            v = _v_alpha_coeffs(params["alphas"][i], dims[i], scheme)
            w = scale * (params["d_plus"][i] * v + params["d_minus"][i] * v[::-1])
            factors = list(eye)
            factors[i] = CoeffTensor((dims[i],), w)
            out = out + CoeffTensor.separable(factors)
        return out

    if len(dims) != 1:
        raise ValueError(f"{kind!r} coefficients are 1-level")
    n = dims[0]
    if kind == "laplacian":
        data = np.zeros(2 * n - 1)
        data[n - 1] = 2.0
        if n > 1:
            data[n - 2] = data[n] = -1.0
    elif kind == "v_alpha":
        data = _v_alpha_coeffs(params["alpha"], n, params.get("scheme", "grunwald1"))
    elif kind == "g_1d":
        v = _v_alpha_coeffs(params["alpha"], n, params.get("scheme", "grunwald1"))
        data = params["d_plus"] * v + params["d_minus"] * v[::-1]
        data[n - 1] += params["nu"]
    elif kind == "r_alpha":
        rho = frac_centered_coeffs(params["alpha"], n)
        data = np.concatenate((rho[:0:-1], rho))
    elif kind == "example1":
        data = _example1_coeffs(n)
    else:
        raise ValueError(f"unsupported symbol kind {kind!r}")
    return CoeffTensor((n,), data)


# ---------------------------------------------------------------------------
# quadrature-based coefficients


def _fft_coeffs_1d(f, n, oversample, min_grid):
    m = max(oversample * 2 * n, min_grid)
    theta = 2.0 * np.pi * np.arange(m) / m
    theta = np.where(theta >= np.pi, theta - 2.0 * np.pi, theta)
    c = np.fft.fft(f(theta)) / m
    idx = np.arange(-(n - 1), n) % m
    return c[idx]


def fourier_coeffs_numeric(symbol, dims, oversample=16):
    """Fourier coefficients by trapezoidal (FFT) quadrature of symbol samples.

    The grid has ``oversample * 2 * max(n_i)`` points per axis (at least 2**14
    for one level). Separable symbols are handled as sums of products of 1D
    quadratures.
    """
    if oversample < 8:
        raise ValueError("oversample must be >= 8")
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(n) for n in dims)
    if len(dims) != symbol.levels:
        raise ValueError("dims do not match the symbol's number of levels")
    if symbol.levels == 1:
        data = _fft_coeffs_1d(symbol.func, dims[0], oversample, 2 ** 14)
    elif symbol.terms is not None:
        data = 0
        for coef, fs in symbol.terms:
            parts = [_fft_coeffs_1d(f, n, oversample, 2 ** 14) for f, n in zip(fs, dims)]
            prod = parts[0]
            for p in parts[1:]:
                prod = np.multiply.outer(prod, p)
            data = data + coef * prod
    else:
        ms = [oversample * 2 * n for n in dims]
        axes = []
        for m in ms:
            th = 2.0 * np.pi * np.arange(m) / m
            axes.append(np.where(th >= np.pi, th - 2.0 * np.pi, th))
        grids = np.meshgrid(*axes, indexing="ij")
        c = np.fft.fftn(symbol.func(*grids)) / np.prod(ms)
        idx = np.ix_(*[np.arange(-(n - 1), n) % m for n, m in zip(dims, ms)])
        data = c[idx]
    tensor = CoeffTensor(dims, data)
    return tensor.real_if_close() if symbol.real_coeffs else tensor


def _power_cos_moments(a, length, js):
    """``integral_0^length t^a cos(j t) dt`` for every ``j`` in ``js``.

    Gauss-Jacobi quadrature with weight ``t^a`` integrates the entire
    function ``cos(j t)`` to machine precision once the node count exceeds
    the oscillation count.
    """
    js = np.asarray(js, dtype=float)
    npts = int(0.6 * length * max(js.max(initial=0.0), 1.0)) + 48
    x, w = roots_jacobi(npts, 0.0, a)
    s = 0.5 * (x + 1.0)
    scale = 0.5 ** (a + 1.0) * length ** (a + 1.0)
    return scale * (np.cos(np.outer(js, length * s)) @ w)


def power_coeffs(a, n):
    """Exact-to-rounding coefficients of ``|theta|^a`` for ``|j| <= n - 1``."""
    j = np.arange(n)
    c = _power_cos_moments(a, np.pi, j) / np.pi
    return CoeffTensor.from_symmetric_1d(c)


def plateau_power_coeffs(a, n):
    """Coefficients of ``|theta|^a`` on ``|theta| < pi/2``, 1 elsewhere."""
    j = np.arange(n)
    head = _power_cos_moments(a, 0.5 * np.pi, j)
    tail = np.empty(n)
    tail[0] = 0.5 * np.pi
    jj = j[1:].astype(float)
    tail[1:] = (np.sin(jj * np.pi) - np.sin(0.5 * jj * np.pi)) / jj
    return CoeffTensor.from_symmetric_1d((head + tail) / np.pi)


def example4_coeffs(alpha1, alpha2, dims):
    """Two-level coefficients of the Example 4 symbol, assembled from 1D
    coefficient vectors through the separable-sum structure."""
    n1, n2 = dims
    e1, e2 = CoeffTensor.identity((n1,)), CoeffTensor.identity((n2,))
    return (CoeffTensor.separable([plateau_power_coeffs(alpha1, n1), e2])
            + CoeffTensor.separable([e1, plateau_power_coeffs(alpha2, n2)])
            + CoeffTensor.separable([plateau_power_coeffs(1.0, n1),
                                     plateau_power_coeffs(1.0, n2)]).scaled(-1.0))


def q_alpha_coeffs(alphas, dims, weights=None):
    """Coefficients of ``sum_i l_i |theta_i|^alpha_i``."""
    dims = tuple(dims)
    weights = tuple(weights) if weights is not None else (1.0,) * len(dims)
    out = None
    for i, (a, l) in enumerate(zip(alphas, weights)):
        factors = [CoeffTensor.identity((n,)) for n in dims]
        factors[i] = power_coeffs(a, dims[i]).scaled(l)
        term = CoeffTensor.separable(factors)
        out = term if out is None else out + term
    return out

