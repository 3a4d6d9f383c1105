"""Multilevel Toeplitz operators applied through circulant embedding.

Vectors use lexicographic multilevel ordering with level 1 varying fastest,
so ``x.reshape(dims, order="F")`` gives an array whose axis ``i`` is level
``i + 1``. Under this ordering ``T_{n2}(f2) (x) T_{n1}(f1)`` (Kronecker
product) is the two-level Toeplitz matrix of ``f1(theta1) f2(theta2)``.
"""

import numpy as np

from .symbols import CoeffTensor

__all__ = [
    "ToeplitzOperator",
    "build_toeplitz",
    "matvec",
    "transpose",
    "flip",
    "kron_identity_embed",
]


def _circulant_column(data, dims):
    """Circulant embedding of size ``2 n_i`` per level (slot ``n_i`` is zero)."""
    out = np.zeros(tuple(2 * n for n in dims), dtype=data.dtype)
    # source position of index j is j + n - 1; target is j mod 2n
    src, dst = [], []
    for n in dims:
        j = np.arange(-(n - 1), n)
        src.append(j + n - 1)
        dst.append(j % (2 * n))
    out[np.ix_(*dst)] = data[np.ix_(*src)]
    return out


class ToeplitzOperator:
    """``T_n(f)`` for a coefficient tensor, with an FFT-based matvec.

    The spectrum of the circulant embedding is computed once at construction;
    ``matvec`` only allocates per-call buffers, so a shared operator can be
    applied from several threads.
    """

    def __init__(self, coeffs):
        if not isinstance(coeffs, CoeffTensor):
            raise TypeError("expected a CoeffTensor")
        self.coeffs = coeffs
        self.dims = coeffs.dims
        self.size = int(np.prod(self.dims))
        self.shape = (self.size, self.size)
        self.is_real = coeffs.is_real
        self.dtype = np.dtype(float) if self.is_real else np.dtype(complex)
        self._fft_shape = tuple(2 * n for n in self.dims)
        col = _circulant_column(coeffs.data, self.dims)
        if self.is_real:
            self.embedded_spectrum = np.fft.rfftn(col)
        else:
            self.embedded_spectrum = np.fft.fftn(col)
        self.embedded_spectrum.setflags(write=False)

    @property
    def levels(self):
        return len(self.dims)

    @property
    def symmetric(self):
        d = self.coeffs.data
        return bool(np.array_equal(d, d[(slice(None, None, -1),) * d.ndim]))

    def matvec(self, x):
        x = np.asarray(x)
        if x.shape != (self.size,):
            raise ValueError(f"vector of length {x.size} does not match operator "
                             f"of size {self.size}")
        block = x.reshape(self.dims, order="F")
        crop = tuple(slice(0, n) for n in self.dims)
        shape, axes = self._fft_shape, tuple(range(len(self.dims)))
        if self.is_real and not np.iscomplexobj(x):
            y = np.fft.irfftn(np.fft.rfftn(block, s=shape, axes=axes) * self.embedded_spectrum,
                              s=shape, axes=axes)
        elif self.is_real:
            return self.matvec(x.real) + 1j * self.matvec(x.imag)
        else:
            y = np.fft.ifftn(np.fft.fftn(block, s=shape, axes=axes) * self.embedded_spectrum,
                             axes=axes)
        return y[crop].reshape(-1, order="F")

    __call__ = matvec

    def __matmul__(self, x):
        return self.matvec(x)

    def transpose(self):
        return ToeplitzOperator(self.coeffs.reflected())

    @property
    def T(self):
        return self.transpose()

    def first_column(self):
        idx = tuple(slice(n - 1, None) for n in self.dims)
        return self.coeffs.data[idx].reshape(-1, order="F")

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"ToeplitzOperator(dims={self.dims}, {kind})"


def build_toeplitz(coeffs):
    """Operator for ``T_n`` with the given coefficients."""
    if not coeffs.dims:
        raise ValueError("empty dims")
    return ToeplitzOperator(coeffs)


def matvec(op, x):
    return op.matvec(x)


def transpose(op):
    """``T_n(f)^T = T_n(f(-theta))``: every coefficient index is reflected."""
    return op.transpose()


def flip(x):
    """Multiply by the anti-identity ``Y_N`` (full end-to-end reversal).

    The multilevel anti-identity ``Y_{n1} (x) ... (x) Y_{nk}`` equals
    ``Y_{n1 ... nk}``, so no reshaping is needed.
    """
    return np.asarray(x)[::-1].copy()


def kron_identity_embed(op1d, position, dims):
    """``I (x) ... (x) T (x) ... (x) I`` with ``T`` acting on level ``position``.

    ``position`` is 1-based. The result is itself multilevel Toeplitz: its
    coefficient tensor is the 1D one placed on axis ``position - 1`` with
    Kronecker deltas on the other axes.
    """
    dims = tuple(int(n) for n in dims)
    if op1d.levels != 1:
        raise ValueError("op1d must be a 1-level operator")
    if not 1 <= position <= len(dims):
        raise ValueError(f"position {position} outside 1..{len(dims)}")
    if op1d.dims[0] != dims[position - 1]:
        raise ValueError("operator size does not match dims at that level")
    if len(dims) == 1:
        return op1d
    factors = [CoeffTensor.identity((n,)) for n in dims]
    factors[position - 1] = op1d.coeffs
    return ToeplitzOperator(CoeffTensor.separable(factors))
