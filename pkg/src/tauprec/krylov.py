"""Preconditioned MINRES and CG with a true-residual stopping rule.

Both solvers stop as soon as ``||b - A x_k|| / ||b|| <= tol``, with the
residual recomputed from ``x_k`` at every iteration (one extra product with
``A``). MINRES additionally records the recurrence estimate of the
``M^{-1}``-norm residual, which must be nonincreasing.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .toeplitz import flip

__all__ = ["SolveReport", "NegativeCurvatureError", "as_matvec", "minres", "pcg",
           "solve_symmetrized"]


class NegativeCurvatureError(ArithmeticError):
    """CG met ``p^T A p <= 0``: the operator is not positive definite."""


@dataclass
class SolveReport:
    iterations: int
    residual_history: List[float]
    converged: bool
    wall_seconds: float
    solution: np.ndarray
    recurrence_history: List[float] = field(default_factory=list)
    breakdown: Optional[str] = None

    @property
    def final_residual(self):
        return self.residual_history[-1]


def as_matvec(a):
    """Normalise an operator (object with ``matvec``, dense array, callable)."""
    if hasattr(a, "matvec"):
        return a.matvec
    if isinstance(a, np.ndarray):
        return lambda x: a @ x
    if callable(a):
        return a
    raise TypeError(f"cannot use {type(a).__name__} as a linear operator")


def _as_prec(m):
    if m is None:
        return lambda r: r
    if hasattr(m, "apply_inverse"):
        return m.apply_inverse
    if callable(m):
        return m
    raise TypeError(f"cannot use {type(m).__name__} as a preconditioner")


def _start(b, x0):
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    if x.shape != b.shape:
        raise ValueError("x0 and b have different shapes")
    return b, x


def minres(a, m, b, x0=None, tol=1e-8, maxit=1000):
    """Preconditioned MINRES for symmetric (possibly indefinite) ``A``.

    ``m`` must be symmetric positive definite (``apply_inverse`` is used);
    ``None`` means no preconditioning.
    """
    amul, minv = as_matvec(a), _as_prec(m)
    b, x = _start(b, x0)
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveReport(0, [0.0], True, 0.0, np.zeros_like(b), [0.0])

    r1 = b - amul(x)
    history = [np.linalg.norm(r1) / bnorm]
    y = minv(r1)
    beta1 = float(r1 @ y)
    if beta1 < 0:
        raise ValueError("preconditioner is not positive definite")
    beta1 = np.sqrt(beta1)
    recurrence = [beta1]
    if history[0] <= tol or beta1 == 0.0:
        return SolveReport(0, history, history[0] <= tol, time.perf_counter() - t0, x,
                           recurrence)

    oldb, beta, dbar, epsln = 0.0, beta1, 0.0, 0.0
    phibar, cs, sn = beta1, -1.0, 0.0
    w = np.zeros_like(b)
    w2 = np.zeros_like(b)
    r2 = r1
    eps = np.finfo(float).eps
    breakdown = None
    stalled = 0
    itn = 0
    while itn < maxit:
        itn += 1
        v = y / beta
        y = amul(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = minv(r2)
        oldb = beta
        beta2 = float(r2 @ y)
        if beta2 < 0:
            raise ValueError("preconditioner is not positive definite")
        beta = np.sqrt(beta2)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), eps)
        cs, sn = gbar / gamma, beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        step = phi * w
        x = x + step

        history.append(np.linalg.norm(b - amul(x)) / bnorm)
        recurrence.append(phibar)
        if history[-1] <= tol:
            break
        if beta <= eps * beta1:
            breakdown = f"Lanczos breakdown at iteration {itn}"
            break
        # the true residual can stall above tol once updates drop below rounding
        stalled = stalled + 1 if np.linalg.norm(step) <= eps * np.linalg.norm(x) else 0
        if stalled >= 3:
            breakdown = f"stagnation at iteration {itn}"
            break
    return SolveReport(itn, history, history[-1] <= tol, time.perf_counter() - t0, x,
                       recurrence, breakdown)


def pcg(a, m, b, x0=None, tol=1e-8, maxit=1000):
    """Preconditioned conjugate gradients for SPD ``A`` and SPD ``M``."""
    amul, minv = as_matvec(a), _as_prec(m)
    b, x = _start(b, x0)
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveReport(0, [0.0], True, 0.0, np.zeros_like(b), [0.0])

    r = b - amul(x)
    history = [np.linalg.norm(r) / bnorm]
    recurrence = [history[0]]
    if history[0] <= tol:
        return SolveReport(0, history, True, time.perf_counter() - t0, x, recurrence)
    z = minv(r)
    rz = float(r @ z)
    p = z.copy()
    itn = 0
    while itn < maxit:
        itn += 1
        ap = amul(p)
        curv = float(p @ ap)
        if curv <= 0.0:
            raise NegativeCurvatureError(f"p^T A p = {curv:.3e} at iteration {itn}")
        step = rz / curv
        x = x + step * p
        r = r - step * ap
        history.append(np.linalg.norm(b - amul(x)) / bnorm)
        recurrence.append(np.linalg.norm(r) / bnorm)
        if history[-1] <= tol:
            break
        z = minv(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return SolveReport(itn, history, history[-1] <= tol, time.perf_counter() - t0, x,
                       recurrence)


def solve_symmetrized(t, m, b, x0=None, tol=1e-8, maxit=1000):
    """Solve ``T u = b`` for real nonsymmetric Toeplitz ``T`` with MINRES on
    ``Y T u = Y b`` (``Y`` the anti-identity, which makes ``Y T`` symmetric)."""
    tmul = as_matvec(t)
    return minres(lambda x: flip(tmul(x)), m, flip(b), x0=x0, tol=tol, maxit=maxit)
