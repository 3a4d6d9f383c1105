"""Dense oracles and empirical spectral analysis.

Everything here builds dense matrices and is meant for small problems
(``N <= 4096``): cross-checking the fast operators, and measuring clustering
and eigenvalue bounds of preconditioned sequences.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "MAX_DENSE",
    "SpectrumReport",
    "dense_from_toeplitz",
    "dense_from_coeffs",
    "dense_flip",
    "sym_eigs",
    "singular_values",
    "cluster_count",
    "spectrum_report",
    "phi_samples",
    "distribution_distance",
    "check_rayleigh_bounds",
    "pencil_eigs",
    "preconditioned_symmetrized",
]

MAX_DENSE = 4096


def _guard(size):
    if size > MAX_DENSE:
        raise ValueError(f"dense size {size} exceeds the guard of {MAX_DENSE}")


def dense_from_coeffs(coeffs):
    """Entry ``(i, j)`` is the coefficient at the per-level index difference."""
    dims = coeffs.dims
    size = int(np.prod(dims))
    _guard(size)
    # multi-index of every row, level 1 fastest
    idx = np.array(np.unravel_index(np.arange(size), dims, order="F"))
    pos = []
    for level, n in enumerate(dims):
        diff = idx[level][:, None] - idx[level][None, :]
        pos.append(diff + n - 1)
    return np.asarray(coeffs.data)[tuple(pos)]


def dense_from_toeplitz(op):
    return dense_from_coeffs(op.coeffs)


def dense_flip(size):
    """Anti-identity ``Y_N``."""
    _guard(size)
    return np.eye(size)[::-1]


def sym_eigs(a, check_tol=1e-10):
    """Sorted eigenvalues of a real symmetric (or Hermitian) dense matrix."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    _guard(a.shape[0])
    scale = max(np.abs(a).max(), 1e-300)
    if np.abs(a - a.conj().T).max() > check_tol * scale:
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigvalsh(a)


def singular_values(a):
    a = np.asarray(a)
    _guard(max(a.shape))
    return np.sort(np.linalg.svd(a, compute_uv=False))


def cluster_count(eigs, centers, eps):
    """Number of eigenvalues farther than ``eps`` from every center."""
    eigs = np.asarray(eigs)
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    dist = np.min(np.abs(eigs[:, None] - centers[None, :]), axis=1)
    return int(np.count_nonzero(dist > eps))


@dataclass
class SpectrumReport:
    values: np.ndarray
    outliers: dict = field(default_factory=dict)

    @property
    def min(self):
        return float(self.values[0])

    @property
    def max(self):
        return float(self.values[-1])

    def outlier_fraction(self, centers, eps):
        return self.outliers[(tuple(centers), eps)] / self.values.size


def spectrum_report(eigs, queries=()):
    """Sort ``eigs`` and count outliers for each ``(centers, eps)`` query."""
    values = np.sort(np.asarray(eigs).real)
    report = SpectrumReport(values)
    for centers, eps in queries:
        report.outliers[(tuple(centers), eps)] = cluster_count(values, centers, eps)
    return report


def phi_samples(abs_symbol, count):
    """Equispaced samples of ``phi_|f|`` with ``count`` total points.

    ``phi`` is ``|f(theta)|`` on ``[0, 2 pi]`` and ``-|f(-theta)|`` on
    ``[-2 pi, 0)``; the positive half gets the extra point when ``count`` is
    odd. Samples are taken at cell midpoints of a uniform partition.
    """
    n_pos = (count + 1) // 2
    n_neg = count - n_pos
    th_pos = 2.0 * np.pi * (np.arange(n_pos) + 0.5) / n_pos
    pos = np.abs(abs_symbol(th_pos)) if n_pos else np.empty(0)
    if n_neg:
        th_neg = 2.0 * np.pi * (np.arange(n_neg) + 0.5) / n_neg
        neg = -np.abs(abs_symbol(th_neg))
    else:
        neg = np.empty(0)
    return np.sort(np.concatenate((neg, pos)))


def distribution_distance(eigs, abs_symbol):
    """Max distance between sorted ``eigs`` and sorted samples of ``phi_|f|``.

    ``abs_symbol`` maps angles to ``|f|``; the comparison uses as many samples
    as there are eigenvalues.
    """
    eigs = np.sort(np.asarray(eigs).real)
    samples = phi_samples(abs_symbol, eigs.size)
    return float(np.max(np.abs(eigs - samples)))


def pencil_eigs(b, m):
    """Sorted eigenvalues of ``M^{-1} B`` for symmetric ``B`` and SPD ``M``.

    They coincide with those of ``M^{-1/2} B M^{-1/2}``.
    """
    b = np.asarray(b, dtype=float)
    m = np.asarray(m, dtype=float)
    _guard(b.shape[0])
    try:
        scipy.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError("M is not symmetric positive definite") from exc
    return scipy.linalg.eigh(0.5 * (b + b.T), 0.5 * (m + m.T), eigvals_only=True)


def check_rayleigh_bounds(b, m):
    """Extreme eigenvalues of the pencil ``(B, M)``, i.e. of ``M^{-1} B``."""
    lam = pencil_eigs(b, m)
    return float(lam[0]), float(lam[-1])


def preconditioned_symmetrized(t_dense, prec_dense):
    """Symmetric matrix similar to ``P^{-1} Y T`` for SPD ``P``.

    Returns ``P^{-1/2} (Y T) P^{-1/2}`` (``Y T`` is symmetric for real
    Toeplitz ``T``).
    """
    size = t_dense.shape[0]
    yt = t_dense[::-1]
    lam, vec = np.linalg.eigh(0.5 * (prec_dense + prec_dense.T))
    if lam.min() <= 0:
        raise ValueError("preconditioner is not positive definite")
    p_isqrt = (vec / np.sqrt(lam)) @ vec.T
    out = p_isqrt @ yt @ p_isqrt
    _guard(size)
    return 0.5 * (out + out.T)
