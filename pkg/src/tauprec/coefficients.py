"""Fractional finite-difference coefficient sequences.

Two families are needed:

* Grunwald-Letnikov weights ``omega_k = (-1)^k binom(alpha, k)`` used by the
  shifted Grunwald discretisation of Riemann-Liouville derivatives.
* Fractional centred weights ``rho_j``, the Fourier coefficients of
  ``|2 sin(theta/2)|^alpha``.

Both are evaluated by recurrence so that tens of thousands of terms can be
produced without overflowing the Gamma function.
"""

import math

import numpy as np

__all__ = [
    "log_gamma",
    "grunwald_coeffs",
    "frac_centered_coeffs",
    "wsgd_coeffs",
    "grunwald_direct",
    "frac_centered_direct",
]


def log_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma is defined for x > 0, got {x!r}")
    return math.lgamma(x)


def _check_count(count):
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return count


def grunwald_coeffs(alpha, count):
    """Grunwald-Letnikov weights ``omega_0 .. omega_{count-1}``.

    Parameters
    ----------
    alpha : float
        Derivative order in ``(0, 2]``.
    count : int
        Number of weights.

    Returns
    -------
    numpy.ndarray
        ``omega`` with ``omega[0] = 1`` and
        ``omega[k] = omega[k-1] * (1 - (alpha + 1) / k)``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    count = _check_count(count)
    k = np.arange(1, count, dtype=float)
    factors = 1.0 - (alpha + 1.0) / k
    return np.concatenate(([1.0], np.cumprod(factors)))


def frac_centered_coeffs(alpha, count):
    """Fractional centred weights ``rho_0 .. rho_{count-1}``.

    ``rho_0 = Gamma(alpha+1) / Gamma(alpha/2+1)^2`` and
    ``rho_{j+1} = rho_j (j - alpha/2) / (j + 1 + alpha/2)``.
    """
    alpha = float(alpha)
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    count = _check_count(count)
    rho0 = math.exp(log_gamma(alpha + 1.0) - 2.0 * log_gamma(alpha / 2.0 + 1.0))
    j = np.arange(0, count - 1, dtype=float)
    factors = (j - alpha / 2.0) / (j + 1.0 + alpha / 2.0)
    return rho0 * np.concatenate(([1.0], np.cumprod(factors)))


def wsgd_coeffs(alpha, count):
    """Weighted-shifted Grunwald weights for shifts (p, q) = (1, 0).

    ``w_0 = (alpha/2) omega_0`` and
    ``w_k = (alpha/2) omega_k + ((2 - alpha)/2) omega_{k-1}``.
    """
    omega = grunwald_coeffs(alpha, count)
    w = 0.5 * alpha * omega
    w[1:] += 0.5 * (2.0 - alpha) * omega[:-1]
    return w


def grunwald_direct(alpha, k):
    """``(-1)^k binom(alpha, k)`` from the Gamma-function formula.

    Slow reference used to validate :func:`grunwald_coeffs`; only valid while
    ``alpha - k + 1`` avoids the Gamma poles (non-integer ``alpha``).
    """
    # binom(alpha, k) = Gamma(alpha+1) / (Gamma(k+1) Gamma(alpha-k+1)); the
    # sign of Gamma at negative non-integers is tracked explicitly.
    arg = alpha - k + 1.0
    sign_gamma = 1.0 if arg > 0 or math.floor(arg) % 2 == 0 else -1.0
    log_abs = log_gamma(alpha + 1.0) - log_gamma(k + 1.0) - _log_abs_gamma(arg)
    return (-1.0) ** k * sign_gamma * math.exp(log_abs)


def frac_centered_direct(alpha, j):
    """``(-1)^j Gamma(alpha+1) / (Gamma(alpha/2-j+1) Gamma(alpha/2+j+1))``."""
    arg = alpha / 2.0 - j + 1.0
    sign_gamma = 1.0 if arg > 0 or math.floor(arg) % 2 == 0 else -1.0
    log_abs = (log_gamma(alpha + 1.0) - _log_abs_gamma(arg)
               - log_gamma(alpha / 2.0 + j + 1.0))
    return (-1.0) ** j * sign_gamma * math.exp(log_abs)


def _log_abs_gamma(x):
    if x > 0:
        return log_gamma(x)
    # reflection: |Gamma(x)| = pi / (|sin(pi x)| Gamma(1 - x))
    return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma(1.0 - x)
