"""Multilevel tau algebra: matrices diagonalised by the DST-I.

``Q_n[i, j] = sqrt(2/(n+1)) sin(pi i j / (n+1))`` is symmetric and
orthogonal; the multilevel transform is ``Q_{n_k} (x) ... (x) Q_{n_1}`` in the
level-1-fastest ordering used throughout the package. A ``TauOperator`` is
stored as its eigenvalue tensor (axis ``i`` = level ``i + 1``).
"""

import numpy as np
from scipy import fft as spfft

__all__ = [
    "SineTransformPlan",
    "TauOperator",
    "dst1_apply",
    "tau_eigs_from_first_column",
    "tau_first_column",
    "tau_project",
    "tau_laplacian",
    "tau_pow",
    "tau_combine",
    "tau_kron_embed",
    "tau_solve",
]


class SineTransformPlan:
    """Orthonormal multilevel DST-I for fixed dims."""

    def __init__(self, dims):
        self.dims = (int(dims),) if np.isscalar(dims) else tuple(int(n) for n in dims)
        self.size = int(np.prod(self.dims))

    def apply_tensor(self, block):
        return spfft.dstn(block, type=1, norm="ortho", axes=range(len(self.dims)))

    def apply(self, x):
        x = np.asarray(x)
        if x.shape != (self.size,):
            raise ValueError(f"vector of length {x.size} does not match plan size {self.size}")
        block = x.reshape(self.dims, order="F")
        if np.iscomplexobj(block):
            out = self.apply_tensor(block.real) + 1j * self.apply_tensor(block.imag)
        else:
            out = self.apply_tensor(block)
        return out.reshape(-1, order="F")

    __call__ = apply


def dst1_apply(plan, x):
    """``y = Q_n x``."""
    return plan.apply(x)


class TauOperator:
    """``Q diag(eigs) Q`` with ``eigs`` given as a tensor of shape ``dims``."""

    def __init__(self, eigs, dims=None):
        eigs = np.asarray(eigs, dtype=float)
        if dims is None:
            dims = eigs.shape
        dims = tuple(int(n) for n in dims)
        eigs = eigs.reshape(dims, order="F")
        eigs.setflags(write=False)
        self.dims = dims
        self.eigs = eigs
        self.size = int(np.prod(dims))
        self.shape = (self.size, self.size)
        self.plan = SineTransformPlan(dims)

    @property
    def levels(self):
        return len(self.dims)

    def eigenvalues(self):
        """Eigenvalues flattened in multilevel (level 1 fastest) order."""
        return self.eigs.reshape(-1, order="F")

    def _diag_apply(self, x, scale):
        x = np.asarray(x)
        if x.shape != (self.size,):
            raise ValueError(f"vector of length {x.size} does not match operator "
                             f"of size {self.size}")
        block = x.reshape(self.dims, order="F")
        if np.iscomplexobj(block):
            return self._diag_apply(x.real, scale) + 1j * self._diag_apply(x.imag, scale)
        y = self.plan.apply_tensor(block)
        y = self.plan.apply_tensor(y * scale)
        return y.reshape(-1, order="F")

    def apply(self, x):
        return self._diag_apply(x, self.eigs)

    matvec = apply

    def __matmul__(self, x):
        return self.apply(x)

    def solve(self, r):
        if np.min(np.abs(self.eigs)) == 0.0:
            raise np.linalg.LinAlgError("tau operator is singular (zero eigenvalue)")
        return self._diag_apply(r, 1.0 / self.eigs)

    def dense(self):
        """Dense matrix; intended for oracles on small sizes."""
        q = _dense_q(self.dims)
        return (q * self.eigenvalues()) @ q

    def __repr__(self):
        return f"TauOperator(dims={self.dims})"


def _dense_q(dims):
    q = np.ones((1, 1))
    for n in dims:
        i = np.arange(1, n + 1)
        qn = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(i, i) / (n + 1))
        q = np.kron(qn, q)
    return q


def tau_eigs_from_first_column(column, dims):
    """Eigenvalues of the tau matrix whose first column is ``column``.

    Any matrix ``Q D Q`` satisfies ``Q c = D Q e_1`` where ``c`` is its first
    column, and ``(Q e_1)_j = sqrt(2/(n+1)) sin(pi j/(n+1))`` never vanishes.
    """
    dims = tuple(dims)
    col = np.asarray(column, dtype=float).reshape(dims, order="F")
    e1 = np.zeros(dims)
    e1[(0,) * len(dims)] = 1.0
    plan = SineTransformPlan(dims)
    return plan.apply_tensor(col) / plan.apply_tensor(e1)


def tau_first_column(coeffs):
    """First column of ``tau(T)`` for a per-level symmetric Toeplitz ``T``.

    On each level the Hankel correction subtracts ``t_{i+2}`` from ``t_i``
    (antidiagonals ``t_2, ..., t_{n-1}, 0, 0, 0, t_{n-1}, ..., t_2``).
    """
    dims = coeffs.dims
    col = np.asarray(coeffs.data[tuple(slice(n - 1, None) for n in dims)], dtype=float)
    for axis, n in enumerate(dims):
        shifted = np.zeros_like(col)
        if n > 2:
            src = [slice(None)] * len(dims)
            dst = [slice(None)] * len(dims)
            src[axis] = slice(2, None)
            dst[axis] = slice(0, n - 2)
            shifted[tuple(dst)] = col[tuple(src)]
        col = col - shifted
    return col


def _is_level_symmetric(data):
    for axis in range(data.ndim):
        if not np.allclose(data, np.flip(data, axis=axis), rtol=1e-13, atol=0.0):
            return False
    return True


def tau_project(op):
    """Natural tau projection ``tau(T) = T - H(T)`` of a symmetric Toeplitz
    operator.

    Multilevel inputs must be symmetric on every level; the 1-level rule is
    applied along each level of the coefficient tensor.
    """
    coeffs = getattr(op, "coeffs", op)
    if not coeffs.is_real or not _is_level_symmetric(coeffs.data):
        raise ValueError("tau_project needs a real Toeplitz operator symmetric on every level")
    col = tau_first_column(coeffs)
    return TauOperator(tau_eigs_from_first_column(col.reshape(-1, order="F"), coeffs.dims),
                       coeffs.dims)


def tau_laplacian(n):
    """``T_n(2 - 2 cos theta)``, whose eigenvalues are ``2 - 2 cos(pi j/(n+1))``."""
    j = np.arange(1, n + 1)
    return TauOperator(2.0 - 2.0 * np.cos(np.pi * j / (n + 1)))


def tau_pow(op, exponent, clamp=1e-12):
    """Eigenvalue-wise power.

    Eigenvalues in ``[-clamp * max|eig|, 0)`` are rounding noise of a
    semidefinite operator and are set to zero first.
    """
    eigs = np.array(op.eigs, dtype=float)
    scale = np.max(np.abs(eigs)) if eigs.size else 0.0
    small = (eigs < 0) & (eigs >= -clamp * scale)
    eigs[small] = 0.0
    if float(exponent) != int(exponent) and np.any(eigs < 0):
        worst = eigs.min()
        raise ValueError(f"non-integer power of an operator with eigenvalue {worst:.3e}")
    return TauOperator(eigs ** exponent, op.dims)


def tau_combine(terms):
    """``sum_i c_i A_i`` for ``terms = [(c_1, A_1), ...]``."""
    terms = list(terms)
    dims = terms[0][1].dims
    total = np.zeros(dims)
    for c, op in terms:
        if op.dims != dims:
            raise ValueError(f"dims mismatch: {op.dims} vs {dims}")
        total = total + c * op.eigs
    return TauOperator(total, dims)


def tau_kron_embed(op1d, position, dims):
    """``I (x) ... (x) A (x) ... (x) I`` with ``A`` on level ``position`` (1-based)."""
    dims = tuple(int(n) for n in dims)
    if op1d.levels != 1:
        raise ValueError("op1d must be 1-level")
    if not 1 <= position <= len(dims) or dims[position - 1] != op1d.dims[0]:
        raise ValueError("position/dims inconsistent with the operator")
    shape = [1] * len(dims)
    shape[position - 1] = dims[position - 1]
    eigs = np.broadcast_to(op1d.eigs.reshape(shape), dims)
    return TauOperator(np.array(eigs), dims)


def tau_solve(op, r):
    """``op^{-1} r`` by DST, division, DST."""
    return op.solve(r)
