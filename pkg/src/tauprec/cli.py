"""Command-line runner for the benchmark examples and the spectrum tools.

    tauprec solve --example 2 --n 127 255 --alpha1 1.5 --alpha2 1.5
    tauprec spectrum --example custom --n 128 --out eigs.csv

``solve`` writes one CSV row per size; ``spectrum`` writes the sorted
eigenvalues of the (dense) preconditioned matrix and prints outlier counts.
A flat JSON object passed with ``--config`` supplies defaults for any long
flag (use underscores, e.g. ``"d_plus"``); flags given on the command line
win. Exit status: 0 on success, 1 on a usage error, 2 if a solve did not
converge.
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import fde
from .krylov import minres, pcg, solve_symmetrized
from .preconditioners import (FdeParams1D, build_abs_circulant, build_example1_P,
                              build_natural_tau, build_P_1d, build_tauR, identity)
from .spectra import (MAX_DENSE, cluster_count, dense_from_toeplitz, pencil_eigs,
                      preconditioned_symmetrized, sym_eigs)
from .symbols import example4_coeffs, fourier_coeffs_closed
from .toeplitz import build_toeplitz

__all__ = ["RunConfig", "ResultRow", "ConfigError", "run_example", "run_spectrum",
           "emit_csv", "main"]

EXAMPLES = ("1", "2", "3", "4", "custom")
PRECONDS = ("symbol_tau", "natural_tau", "abs_circulant", "none", "tauR")
SOLVERS = ("minres", "pcg")
CSV_HEADER = ["example", "n1", "n2", "alpha1", "alpha2", "precond", "solver", "iters",
              "seconds", "relres", "err_inf"]

DEFAULT_SIZES = {"1": [4095], "2": [127], "3": [127], "4": [127], "custom": [256]}
SPECTRUM_SIZES = {"1": [256], "2": [16], "3": [16], "4": [16], "custom": [128]}

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    example: str = "1"
    sizes: List[int] = field(default_factory=list)
    alpha1: float = 1.5
    alpha2: float = 1.5
    precond: str = "symbol_tau"
    solver: Optional[str] = None
    tol: float = 1e-8
    maxit: int = 1000
    seed: int = 20240101
    out: Optional[str] = None
    d_plus: float = 1.0
    d_minus: float = 0.2
    steps: Optional[int] = None
    stepper: str = "crank_nicolson"
    eps: float = 0.3

    def __post_init__(self):
        self.example = str(self.example)
        if self.example not in EXAMPLES:
            raise ConfigError(f"example must be one of {', '.join(EXAMPLES)}")
        if isinstance(self.sizes, int):
            self.sizes = [self.sizes]
        self.sizes = [int(n) for n in self.sizes]
        if any(n < 1 for n in self.sizes):
            raise ConfigError("sizes must be positive")
        if not 0.0 < self.tol < 1.0:
            raise ConfigError("tol must lie in (0, 1)")
        if self.maxit < 1:
            raise ConfigError("maxit must be positive")
        if self.precond not in PRECONDS:
            raise ConfigError(f"precond must be one of {', '.join(PRECONDS)}")
        if self.precond == "tauR" and self.example != "4":
            raise ConfigError("tauR is the symbol-based preconditioner of example 4 only")
        if self.solver is None:
            self.solver = "pcg" if self.example == "4" else "minres"
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {', '.join(SOLVERS)}")
        if self.solver == "pcg" and self.example != "4":
            raise ConfigError("pcg needs a symmetric positive definite system (example 4)")
        if self.example in ("2", "3", "4"):
            for a in (self.alpha1, self.alpha2):
                if not 1.0 < a < 2.0:
                    raise ConfigError("alpha1 and alpha2 must lie in (1, 2)")
        if self.example == "custom" and not 1.0 < self.alpha1 <= 2.0:
            raise ConfigError("alpha1 must lie in (1, 2]")
        if self.d_plus < 0 or self.d_minus < 0:
            raise ConfigError("diffusion coefficients must be nonnegative")
        if self.stepper not in fde.STEPPER_WEIGHT:
            raise ConfigError(f"stepper must be one of {', '.join(fde.STEPPER_WEIGHT)}")
        if self.eps <= 0:
            raise ConfigError("eps must be positive")

    @property
    def alphas(self):
        return (self.alpha1, self.alpha2)

    @property
    def two_level(self):
        return self.example in ("2", "3", "4")


@dataclass
class ResultRow:
    example: str
    n1: int
    n2: Optional[int]
    alpha1: Optional[float]
    alpha2: Optional[float]
    precond: str
    solver: str
    iters: int
    seconds: float
    relres: float
    err_inf: Optional[float] = None
    converged: bool = True
    max_step_iters: Optional[int] = None

    def csv_fields(self):
        return [_fmt(getattr(self, name)) for name in CSV_HEADER]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# system set-up


def _custom_params(cfg, n):
    """1D fractional diffusion on (0, 1) with ``tau = h^alpha`` (so ``nu = 1``)."""
    h = 1.0 / (n + 1)
    return FdeParams1D(n, cfg.alpha1, cfg.d_plus, cfg.d_minus, h, h ** cfg.alpha1)


def _operator_1d(cfg, n):
    if cfg.example == "1":
        return build_toeplitz(fourier_coeffs_closed("example1", n))
    p = _custom_params(cfg, n)
    return build_toeplitz(fourier_coeffs_closed("g_1d", n, nu=p.nu, d_plus=p.d_plus,
                                                d_minus=p.d_minus, alpha=p.alpha))


def _preconditioner(cfg, op, params=None):
    kind = cfg.precond
    if kind == "none":
        return identity(op.dims)
    if kind == "abs_circulant":
        return build_abs_circulant(op)
    if kind == "natural_tau":
        return build_natural_tau(op, symmetrize=not op.symmetric)
    # symbol-based choice per example
    if cfg.example == "1":
        return build_example1_P(op.dims[0])
    if cfg.example == "custom":
        return build_P_1d(params)
    if cfg.example == "4":
        return build_tauR(op.dims, cfg.alphas)
    return fde.build_preconditioner(params, "symbol_tau")


def _example4_system(cfg, n):
    return build_toeplitz(example4_coeffs(cfg.alpha1, cfg.alpha2, (n, n)))


def _fde_system(cfg, n):
    if cfg.example == "2":
        prob = fde.example2_problem(cfg.alphas)
        return fde.assemble_2d(prob, n, n, fde.example2_tau(n, cfg.alpha1))
    prob = fde.example3_problem(cfg.alphas, stepper=cfg.stepper)
    return fde.assemble_2d(prob, n, n, fde.example3_tau(n))


def _row(cfg, n, iters, seconds, relres, err=None, converged=True, max_step=None):
    two = cfg.two_level
    has_alpha = cfg.example != "1"
    return ResultRow(cfg.example, n, n if two else None,
                     float(cfg.alpha1) if has_alpha else None,
                     float(cfg.alpha2) if two else None,
                     cfg.precond, cfg.solver, int(iters), float(seconds), float(relres),
                     err, converged, max_step)


def _solve_one(cfg, n):
    rng = np.random.default_rng(cfg.seed)
    if cfg.example in ("1", "custom"):
        op = _operator_1d(cfg, n)
        params = _custom_params(cfg, n) if cfg.example == "custom" else None
        m = _preconditioner(cfg, op, params)
        b = rng.standard_normal(n)
        x0 = np.ones(n) / np.sqrt(n) if cfg.example == "1" else None
        rep = solve_symmetrized(op, m, b, x0=x0, tol=cfg.tol, maxit=cfg.maxit)
        return _row(cfg, n, rep.iterations, rep.wall_seconds, rep.final_residual,
                    converged=rep.converged)
    if cfg.example == "4":
        op = _example4_system(cfg, n)
        m = _preconditioner(cfg, op)
        b = rng.standard_normal(n * n)
        solver = pcg if cfg.solver == "pcg" else minres
        rep = solver(op, m, b, tol=cfg.tol, maxit=cfg.maxit)
        return _row(cfg, n, rep.iterations, rep.wall_seconds, rep.final_residual,
                    converged=rep.converged)

    system = _fde_system(cfg, n)
    m = _preconditioner(cfg, system.operator, system)
    steps = 1 if cfg.example == "2" and cfg.steps is None else cfg.steps
    try:
        result = fde.march(system, steps=steps, preconditioner=m, tol=cfg.tol,
                           maxit=cfg.maxit)
    except fde.SolverDidNotConverge as exc:
        rep = exc.report
        return _row(cfg, n, rep.iterations, rep.wall_seconds, rep.final_residual,
                    converged=False)
    reps = result.reports
    seconds = sum(r.wall_seconds for r in reps)
    relres = max(r.final_residual for r in reps) if reps else 0.0
    err = result.error_inf if steps is None else None
    return _row(cfg, n, result.first_step_iterations, seconds, relres, err,
                max_step=result.max_iterations)


def run_example(config):
    """Solve the configured example at every size; one row per size."""
    sizes = config.sizes or DEFAULT_SIZES[config.example]
    return [_solve_one(config, n) for n in sizes]


# ---------------------------------------------------------------------------
# spectra


@dataclass
class SpectrumResult:
    example: str
    dims: tuple
    eigenvalues: np.ndarray
    centers: tuple
    eps: float
    outliers: int

    @property
    def outlier_fraction(self):
        return self.outliers / self.eigenvalues.size


def _spectrum_one(cfg, n):
    if cfg.example == "4":
        op = _example4_system(cfg, n)
        t = dense_from_toeplitz(op)
        m = _preconditioner(cfg, op)
        eigs = pencil_eigs(t, m.dense())
        centers = (1.0,)
    else:
        if cfg.example in ("1", "custom"):
            op = _operator_1d(cfg, n)
            params = _custom_params(cfg, n) if cfg.example == "custom" else None
        else:
            params = _fde_system(cfg, n)
            op = params.operator
        if op.size > MAX_DENSE:
            raise ConfigError(f"spectrum needs N <= {MAX_DENSE}, got {op.size}")
        t = dense_from_toeplitz(op)
        m = _preconditioner(cfg, op, params)
        if cfg.precond == "none":
            eigs = sym_eigs(t[::-1])
        else:
            eigs = np.linalg.eigvalsh(preconditioned_symmetrized(t, m.dense()))
        centers = (-1.0, 1.0)
    eigs = np.sort(eigs)
    return SpectrumResult(cfg.example, op.dims, eigs, centers, cfg.eps,
                          cluster_count(eigs, centers, cfg.eps))


def run_spectrum(config):
    sizes = config.sizes or SPECTRUM_SIZES[config.example]
    for n in sizes:
        size = n * n if config.two_level else n
        if size > MAX_DENSE:
            raise ConfigError(f"spectrum needs N <= {MAX_DENSE}, got {size}")
    return [_spectrum_one(config, n) for n in sizes]


# ---------------------------------------------------------------------------
# output


def emit_csv(rows, path=None):
    """Write rows with the fixed header; ``path=None`` writes to stdout."""
    if path is None:
        _write_rows(sys.stdout, rows)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_rows(fh, rows)


def _write_rows(fh, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())


def emit_spectrum_csv(results, path=None):
    fh = sys.stdout if path is None else open(path, "w", encoding="utf-8", newline="")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["example", "n1", "n2", "index", "eigenvalue"])
        for res in results:
            n2 = res.dims[1] if len(res.dims) > 1 else ""
            for i, lam in enumerate(res.eigenvalues):
                writer.writerow([res.example, res.dims[0], n2, i, repr(float(lam))])
    finally:
        if path is not None:
            fh.close()


def format_table(rows):
    lines = [f"{'example':>7} {'n1':>6} {'n2':>6} {'alphas':>12} {'precond':>13} "
             f"{'iters':>6} {'max':>4} {'seconds':>9} {'relres':>10} {'err_inf':>10}"]
    for r in rows:
        alphas = ",".join(f"{a:g}" for a in (r.alpha1, r.alpha2) if a is not None) or "-"
        err = f"{r.err_inf:.2e}" if r.err_inf is not None else "-"
        flag = "" if r.converged else "  (not converged)"
        most = r.max_step_iters if r.max_step_iters is not None else r.iters
        lines.append(f"{r.example:>7} {r.n1:>6} {r.n2 or '-':>6} {alphas:>12} "
                     f"{r.precond:>13} {r.iters:>6} {most:>4} {r.seconds:>9.3f} {r.relres:>10.2e} "
                     f"{err:>10}{flag}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="tauprec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (("solve", "run an example and report iteration counts"),
                            ("spectrum", "dense eigenvalues of the preconditioned matrix")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat JSON object with defaults for any flag")
        p.add_argument("--example", choices=EXAMPLES)
        p.add_argument("--n", type=int, nargs="+", dest="sizes",
                       help="size per level (several sizes allowed)")
        p.add_argument("--alpha1", type=float)
        p.add_argument("--alpha2", type=float)
        p.add_argument("--precond", choices=PRECONDS)
        p.add_argument("--solver", choices=SOLVERS)
        p.add_argument("--tol", type=float)
        p.add_argument("--maxit", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--d-plus", type=float, dest="d_plus", help="custom example only")
        p.add_argument("--d-minus", type=float, dest="d_minus", help="custom example only")
        p.add_argument("--steps", type=int, help="time steps (examples 2 and 3)")
        p.add_argument("--stepper", choices=tuple(fde.STEPPER_WEIGHT),
                       help="time stepper for example 3")
        p.add_argument("--eps", type=float, help="cluster radius for spectrum reports")
    return parser


CONFIG_KEYS = ("example", "sizes", "alpha1", "alpha2", "precond", "solver", "tol", "maxit",
               "seed", "out", "d_plus", "d_minus", "steps", "stepper", "eps")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    if "n" in data:
        data["sizes"] = data.pop("n")
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def config_from_args(args):
    values = load_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from_args(args)
        if args.command == "solve":
            rows = run_example(cfg)
            emit_csv(rows, cfg.out)
            if cfg.out is not None:
                print(format_table(rows))
            return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED
        results = run_spectrum(cfg)
        emit_spectrum_csv(results, cfg.out)
        report = sys.stdout if cfg.out is not None else sys.stderr
        for res in results:
            print(f"dims={res.dims} N={res.eigenvalues.size} "
                  f"range=[{res.eigenvalues[0]:.4g}, {res.eigenvalues[-1]:.4g}] "
                  f"outside B({list(res.centers)}, {res.eps:g}): {res.outliers} "
                  f"({res.outlier_fraction:.3f})", file=report)
        return EXIT_OK
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"tauprec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
