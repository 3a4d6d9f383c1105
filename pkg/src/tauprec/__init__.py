"""Multilevel tau preconditioners for nonsymmetric Toeplitz systems.

Real nonsymmetric (multilevel) Toeplitz systems ``T_n(f) u = b`` are
symmetrized with the anti-identity ``Y`` and solved by MINRES with an SPD
preconditioner from the tau algebra built out of ``|f|``. The package covers
the Fourier-coefficient plumbing, fast Toeplitz and tau operators, the
preconditioners and baselines, Krylov solvers, fractional diffusion
discretizations and dense spectral oracles.
"""

from .coefficients import (frac_centered_coeffs, grunwald_coeffs, log_gamma,
                           wsgd_coeffs)
from .krylov import SolveReport, minres, pcg, solve_symmetrized
from .preconditioners import (FdeParams1D, FdeParams2D, Preconditioner, build_abs_circulant,
                              build_example1_P, build_natural_tau, build_P_1d, build_P_2d,
                              build_tauR)
from .symbols import CoeffTensor, Symbol, fourier_coeffs_closed, fourier_coeffs_numeric
from .tau import TauOperator, tau_project
from .toeplitz import ToeplitzOperator, build_toeplitz, flip

__version__ = "0.1.0"

__all__ = [
    "CoeffTensor",
    "FdeParams1D",
    "FdeParams2D",
    "Preconditioner",
    "SolveReport",
    "Symbol",
    "TauOperator",
    "ToeplitzOperator",
    "build_P_1d",
    "build_P_2d",
    "build_abs_circulant",
    "build_example1_P",
    "build_natural_tau",
    "build_tauR",
    "build_toeplitz",
    "flip",
    "fourier_coeffs_closed",
    "fourier_coeffs_numeric",
    "frac_centered_coeffs",
    "grunwald_coeffs",
    "log_gamma",
    "minres",
    "pcg",
    "solve_symmetrized",
    "tau_project",
    "wsgd_coeffs",
]
