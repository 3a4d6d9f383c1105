"""Symbol-based tau preconditioners and circulant / natural-tau baselines.

Every preconditioner is symmetric positive definite and exposes
``apply_inverse``; tau-based ones cost two multilevel DSTs per application,
circulant ones two FFTs.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .symbols import CoeffTensor, fourier_coeffs_closed
from .tau import TauOperator, tau_kron_embed, tau_laplacian, tau_project

__all__ = [
    "FdeParams1D",
    "FdeParams2D",
    "Preconditioner",
    "symmetric_part_tau",
    "abs_v_squared_tau",
    "build_P_1d",
    "build_P_2d",
    "build_tauR",
    "build_natural_tau",
    "level_symmetrized",
    "build_abs_circulant",
    "build_strang_circulant",
    "build_example1_P",
    "identity",
    "apply_inverse",
]


@dataclass(frozen=True)
class FdeParams1D:
    """One-dimensional fractional diffusion system ``nu I + d+ T(v) + d- T(v)^T``."""

    n: int
    alpha: float
    d_plus: float
    d_minus: float
    h: float
    tau_time: float
    scheme: str = "grunwald1"

    def __post_init__(self):
        if self.d_plus < 0 or self.d_minus < 0:
            raise ValueError("diffusion coefficients must be nonnegative")
        if self.tau_time <= 0 or self.h <= 0:
            raise ValueError("step sizes must be positive")

    @property
    def nu(self):
        return self.h ** self.alpha / self.tau_time

    @classmethod
    def on_interval(cls, n, alpha, d_plus, d_minus, tau_time, a=0.0, b=1.0, **kw):
        return cls(n, alpha, d_plus, d_minus, (b - a) / (n + 1), tau_time, **kw)


@dataclass(frozen=True)
class FdeParams2D:
    """Two-dimensional system ``I + I (x) A_1 + A_2 (x) I``.

    ``A_i = theta_weight * tau_time / h_i^alpha_i * (d_{i,+} T(v) + d_{i,-} T(v)^T)``;
    ``theta_weight`` is 1 for backward Euler and 1/2 for Crank-Nicolson.
    """

    dims: Tuple[int, int]
    alphas: Tuple[float, float]
    d_plus: Tuple[float, float]
    d_minus: Tuple[float, float]
    h: Tuple[float, float]
    tau_time: float
    scheme: str = "grunwald1"
    theta_weight: float = 1.0

    def __post_init__(self):
        if min(self.d_plus) < 0 or min(self.d_minus) < 0:
            raise ValueError("diffusion coefficients must be nonnegative")
        if self.tau_time <= 0 or min(self.h) <= 0:
            raise ValueError("step sizes must be positive")

    def scale(self, i):
        return self.theta_weight * self.tau_time / self.h[i] ** self.alphas[i]

    @classmethod
    def on_box(cls, dims, alphas, d_plus, d_minus, tau_time, bounds=((0, 1), (0, 1)), **kw):
        h = tuple((b - a) / (n + 1) for n, (a, b) in zip(dims, bounds))
        return cls(tuple(dims), tuple(alphas), tuple(d_plus), tuple(d_minus), h,
                   tau_time, **kw)


class Preconditioner:
    """SPD preconditioner held either as a tau operator or a circulant spectrum."""

    def __init__(self, kind, dims, tau=None, circ_spectrum=None, note=""):
        if (tau is None) == (circ_spectrum is None):
            raise ValueError("give exactly one of tau / circ_spectrum")
        self.kind = kind
        self.dims = tuple(dims)
        self.size = int(np.prod(self.dims))
        self.tau = tau
        self.circ_spectrum = circ_spectrum
        self.note = note
        eigs = self.eigenvalues()
        if not np.all(eigs > 0):
            raise ValueError(f"{kind} preconditioner is not positive definite "
                             f"(min eigenvalue {eigs.min():.3e})")

    def eigenvalues(self):
        if self.tau is not None:
            return self.tau.eigenvalues()
        return self.circ_spectrum.reshape(-1, order="F")

    def _circ(self, x, spec):
        block = np.asarray(x).reshape(self.dims, order="F")
        y = np.fft.ifftn(np.fft.fftn(block) * spec)
        if not np.iscomplexobj(x):
            y = y.real
        return y.reshape(-1, order="F")

    def apply_inverse(self, r):
        r = np.asarray(r)
        if r.shape != (self.size,):
            raise ValueError(f"vector of length {r.size} does not match "
                             f"preconditioner of size {self.size}")
        if self.tau is not None:
            return self.tau.solve(r)
        return self._circ(r, 1.0 / self.circ_spectrum)

    def apply(self, x):
        if self.tau is not None:
            return self.tau.apply(x)
        return self._circ(x, self.circ_spectrum)

    def dense(self):
        if self.tau is not None:
            return self.tau.dense()
        eye = np.eye(self.size)
        return np.column_stack([self.apply(e) for e in eye])

    def __repr__(self):
        return f"Preconditioner(kind={self.kind!r}, dims={self.dims})"


def identity(dims):
    return Preconditioner("none", dims, tau=TauOperator(np.ones(tuple(dims))))


def apply_inverse(m, r):
    return m.apply_inverse(r)


# ---------------------------------------------------------------------------
# building blocks


def symmetric_part_tau(alpha, n, scheme="grunwald1"):
    """Eigenvalues of ``tau(T_n(v) + T_n(v)^T)``."""
    v = fourier_coeffs_closed("v_alpha", n, alpha=alpha, scheme=scheme)
    sym = CoeffTensor((n,), v.data + v.data[::-1])
    return tau_project(sym).eigs


def abs_v_squared_tau(alpha, n, scheme="grunwald1"):
    """Eigenvalues of the tau matrix standing in for ``|v|^2``.

    ``|v_alpha|^2 = (2 - 2 cos theta)^alpha`` gives ``(T_n(2 - 2 cos))^alpha``.
    The weighted-shifted symbol carries the extra factor
    ``|a e^{-i theta} + b|^2 = a^2 + b^2 + 2ab cos theta`` (``a = alpha/2``,
    ``b = 1 - alpha/2``), itself a tau matrix with eigenvalues at
    ``theta_j = pi j / (n+1)``.
    """
    s = tau_laplacian(n).eigs
    out = np.maximum(s, 0.0) ** alpha
    if scheme == "wsgd2":
        a, b = 0.5 * alpha, 1.0 - 0.5 * alpha
        theta = np.pi * np.arange(1, n + 1) / (n + 1)
        out = out * (a * a + b * b + 2.0 * a * b * np.cos(theta))
    elif scheme != "grunwald1":
        raise ValueError(f"unknown scheme {scheme!r}")
    return out


def _sqrt_checked(x, what):
    x = np.asarray(x, dtype=float)
    scale = max(np.abs(x).max(), 1e-300)
    if np.any(x < -1e-12 * scale):
        raise ValueError(f"negative value {x.min():.3e} under the square root in {what}")
    return np.sqrt(np.maximum(x, 0.0))


# ---------------------------------------------------------------------------
# proposed preconditioners


def build_P_1d(p):
    """``P_n = [nu^2 I + nu (d+ + d-) S + (d+ - d-)^2 L^alpha + d+ d- S^2]^{1/2}``.

    ``S = tau(T(v) + T(v)^T)`` and ``L = T(2 - 2 cos theta)`` share the sine
    eigenbasis, so the square root is taken eigenvalue by eigenvalue.
    """
    mu = symmetric_part_tau(p.alpha, p.n, p.scheme)
    vv = abs_v_squared_tau(p.alpha, p.n, p.scheme)
    nu = p.nu
    lam = _sqrt_checked(nu * nu + nu * (p.d_plus + p.d_minus) * mu
                        + (p.d_plus - p.d_minus) ** 2 * vv
                        + p.d_plus * p.d_minus * mu * mu, "P_n (1D)")
    return Preconditioner("symbol_tau", (p.n,), tau=TauOperator(lam))


def _r_block_eigs(alpha, n, d_plus, d_minus, scale, scheme):
    mu = symmetric_part_tau(alpha, n, scheme)
    vv = abs_v_squared_tau(alpha, n, scheme)
    return scale * _sqrt_checked((d_plus - d_minus) ** 2 * vv + d_plus * d_minus * mu * mu,
                                 "R_n block")


def build_P_2d(p):
    """``P = I + I (x) R_1 + R_2 (x) I`` where ``R_i`` follows ``|w_i|``."""
    dims = tuple(p.dims)
    total = np.ones(dims)
    for i in range(2):
        r = _r_block_eigs(p.alphas[i], dims[i], p.d_plus[i], p.d_minus[i], p.scale(i), p.scheme)
        total = total + tau_kron_embed(TauOperator(r), i + 1, dims).eigs
    return Preconditioner("symbol_tau", dims, tau=TauOperator(total, dims))


def build_tauR(dims, alphas, weights=None):
    """``tau(R_n)`` with ``R_n = sum_i I (x) l_i T(r_alpha_i) (x) I``.

    ``r_alpha = |2 sin(theta/2)|^alpha`` has the fractional centred
    coefficients; each level is projected onto the tau algebra separately.
    """
    dims = tuple(int(n) for n in dims)
    weights = tuple(weights) if weights is not None else (1.0,) * len(dims)
    if len(alphas) != len(dims) or len(weights) != len(dims):
        raise ValueError("need one alpha and one weight per level")
    if min(weights) <= 0:
        raise ValueError("weights must be positive")
    total = np.zeros(dims)
    for i, (n, a, l) in enumerate(zip(dims, alphas, weights)):
        r1 = tau_project(fourier_coeffs_closed("r_alpha", n, alpha=a))
        total = total + l * tau_kron_embed(r1, i + 1, dims).eigs
    if not np.all(total > 0):
        raise ValueError(f"tau(R_n) has a nonpositive eigenvalue {total.min():.3e}")
    return Preconditioner("tauR", dims, tau=TauOperator(total, dims))


def build_example1_P(n):
    """``sqrt(L^2 + L^3)`` with ``L = T_n(2 - 2 cos theta)``.

    Mimics ``|(2 - 2 cos theta)(1 + i theta)|`` with ``theta^2`` replaced by
    ``2 - 2 cos theta`` (same order zero at the origin).
    """
    s = tau_laplacian(n).eigs
    return Preconditioner("symbol_tau", (n,), tau=TauOperator(np.sqrt(s * s + s ** 3)))


# ---------------------------------------------------------------------------
# baselines


def level_symmetrized(coeffs):
    """Average of the coefficients over every per-level reflection ``j_i -> -j_i``.

    For a 1-level operator (or a sum of 1-level terms) this is the symmetric
    part ``(T + T^T)/2``.
    """
    data = np.asarray(coeffs.data, dtype=float)
    for axis in range(data.ndim):
        data = 0.5 * (data + np.flip(data, axis=axis))
    return CoeffTensor(coeffs.dims, data)


def build_natural_tau(op, symmetrize=False):
    """``tau(T)`` for a real Toeplitz operator symmetric on every level.

    With ``symmetrize=True`` a nonsymmetric ``T`` is first replaced by its
    level-symmetrized part, which is what MINRES needs (an SPD preconditioner).
    """
    coeffs = level_symmetrized(op.coeffs) if symmetrize else op.coeffs
    tau = tau_project(coeffs)
    if np.min(tau.eigs) <= 0:
        raise ValueError(f"natural tau preconditioner is not positive definite "
                         f"(eigenvalue {np.min(tau.eigs):.3e})")
    return Preconditioner("natural_tau", op.dims, tau=tau)


def _fold_circulant(coeffs, weighted):
    """First column of a multilevel circulant approximation of ``T``.

    ``weighted=True`` gives T. Chan's optimal (Frobenius) circulant
    ``c_j = ((n - j) t_j + j t_{j-n}) / n`` on each level; ``False`` gives
    Strang's circulant (central coefficients copied).
    """
    col = np.asarray(coeffs.data)
    for axis, n in enumerate(coeffs.dims):
        col = np.moveaxis(col, axis, 0)
        j = np.arange(n)
        pos = col[n - 1 + j]                       # t_j, j = 0..n-1
        neg = np.zeros_like(pos)
        neg[1:] = col[j[1:] - 1]                   # t_{j-n}, j = 1..n-1
        shape = (n,) + (1,) * (col.ndim - 1)
        if weighted:
            wj = (j / n).reshape(shape)
            new = (1.0 - wj) * pos + wj * neg
        else:
            keep = (j <= n // 2).reshape(shape)
            new = np.where(keep, pos, neg)
        col = np.moveaxis(new, 0, axis)
    return col


def _abs_circulant(kind, coeffs, weighted, floor_rel=1e-14):
    col = _fold_circulant(coeffs, weighted)
    lam = np.abs(np.fft.fftn(col))
    floor = floor_rel * lam.max()
    note = ""
    n_small = int(np.count_nonzero(lam < floor))
    if n_small:
        lam = np.maximum(lam, floor)
        note = f"{n_small} eigenvalue(s) raised to the floor {floor:.3e}"
    return Preconditioner(kind, coeffs.dims, circ_spectrum=lam, note=note)


def build_abs_circulant(op):
    """``|C_n| = (C_n^T C_n)^{1/2}`` for T. Chan's optimal circulant ``C_n``."""
    return _abs_circulant("abs_circulant", op.coeffs, weighted=True)


def build_strang_circulant(op):
    """Strang's circulant (absolute value of its spectrum, floored)."""
    return _abs_circulant("strang", op.coeffs, weighted=False)
