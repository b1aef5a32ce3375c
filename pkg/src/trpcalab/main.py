"""Command-line entry point `trpca`.

Subcommands:
    solve        split a TNS3 tensor into low-rank and sparse parts
    certify      dual-certificate pass rates on planted instances
    concentrate  Monte-Carlo concentration checks (--lemma sign|pt|ptomega|infty|dev)
    phase        exact-recovery success over a rank / corruption grid

Exit codes: 0 ok, 1 usage error, 2 I/O error, 3 numerical failure.
"""

import argparse
import logging
import sys

from .algebra.tsvd import SvdConvergenceError
from .errors import TrpcaLabError
from .experiments.config import ConfigError, ExperimentConfig, read_flat_config
from .experiments.runner import run_experiment
from .experiments.stats import pass_rate, summarize
from .export.csv_export import CsvSchemaError, write_records
from .export.excel_export import SummaryExporter
from .services.certificate import NeumannDivergenceError
from .services.solver import SolverConfig, solve
from .tensor.tns3 import TensorFormatError, read_tensor, write_tensor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

LEMMAS = ("sign", "pt", "ptomega", "infty", "dev")


class UsageError(TrpcaLabError):
    """Raised for invalid command-line usage."""
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="Increase log verbosity (repeatable)")
    parser.add_argument("--quiet", action="store_true", help="Only log errors")


def _add_experiment_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Flat key=value config file; flags override it")
    parser.add_argument("--n3", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--j0", type=int)
    parser.add_argument("--allow-large", dest="allow_large", action="store_const", const="true")
    parser.add_argument("--out", help="CSV output path (appended to)")
    parser.add_argument("--xlsx", help="Write a summary workbook to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trpca", description="Tensor robust PCA and dual-certificate lab")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="Solve TRPCA on a TNS3 tensor")
    _add_common(p_solve)
    p_solve.add_argument("--input", required=True, help="Input TNS3 file")
    p_solve.add_argument("--lambda", dest="lam", default="auto", help="Regularizer or 'auto'")
    p_solve.add_argument("--tol", type=float, default=1e-8)
    p_solve.add_argument("--max-iter", dest="max_iter", type=int, default=1000)
    p_solve.add_argument("--out", nargs=2, required=True, metavar=("L", "S"),
                         help="Output TNS3 files for L and S")

    p_cert = sub.add_parser("certify", help="Dual-certificate pass rates")
    _add_common(p_cert)
    _add_experiment_options(p_cert)
    p_cert.add_argument("--n")
    p_cert.add_argument("--r")
    p_cert.add_argument("--rho")

    p_conc = sub.add_parser("concentrate", help="Concentration experiments")
    _add_common(p_conc)
    _add_experiment_options(p_conc)
    p_conc.add_argument("--lemma", choices=LEMMAS, required=True)
    p_conc.add_argument("--n")
    p_conc.add_argument("--r")
    p_conc.add_argument("--rho")

    p_phase = sub.add_parser("phase", help="Exact-recovery phase grid")
    _add_common(p_phase)
    _add_experiment_options(p_phase)
    p_phase.add_argument("--n")
    p_phase.add_argument("--r-grid", dest="r")
    p_phase.add_argument("--rho-grid", dest="rho")
    return parser


def configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    else:
        level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s",
                        force=True)


_FLAG_KEYS = ("n", "n3", "r", "rho", "trials", "seed", "workers", "tol", "max_iter", "j0",
              "allow_large", "out", "xlsx")


def experiment_config(args: argparse.Namespace, kind: str) -> ExperimentConfig:
    """Merge the config file (if any) with command-line flags.

    Raises:
        ConfigError: If the merged configuration is invalid.
    """
    flat = read_flat_config(args.config) if args.config else {}
    if flat.get("kind", kind) != kind:
        raise ConfigError(f"Config file is for '{flat['kind']}', command runs '{kind}'")
    flat["kind"] = kind
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            flat[key] = str(value)
    return ExperimentConfig.from_flat(flat)


def _run_solve(args: argparse.Namespace) -> int:
    try:
        lam = None if args.lam == "auto" else float(args.lam)
    except ValueError:
        raise UsageError(f"--lambda must be a number or 'auto', got {args.lam!r}")
    try:
        cfg = SolverConfig(lam=lam, tol=args.tol, max_iter=args.max_iter)
    except ValueError as e:
        raise UsageError(str(e)) from e

    x = read_tensor(args.input)
    sol = solve(x, cfg)
    write_tensor(sol.L, args.out[0])
    write_tensor(sol.S, args.out[1])
    print(f"iterations={sol.iterations} converged={sol.converged} "
          f"primal_residual={sol.primal_residuals[-1]:.3e} lambda={sol.lam:.6g}")
    if not sol.converged:
        logger.error("Solver did not converge; wrote the best iterate")
        return EXIT_NUMERICAL
    return EXIT_OK


def _run_experiment(args: argparse.Namespace, kind: str) -> int:
    config = experiment_config(args, kind)
    records = run_experiment(config)
    if config.out is not None:
        write_records(records, config.out, config)
    else:
        print(records.to_csv(index=False, float_format="%.17g", lineterminator="\n"), end="")

    tables = summarize(records, kind)
    if config.xlsx is not None:
        SummaryExporter(kind).export(config.xlsx, tables)
    if kind == "certify":
        rate = pass_rate(records, "passed")
        logger.warning("Certificate pass rate %.3f (%d/%d), 95%% CI [%.3f, %.3f]; threshold %.2f",
                       rate.rate, rate.successes, rate.trials, rate.ci_low, rate.ci_high,
                       config.pass_threshold)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (solve, certify, concentrate, phase)")
        configure_logging(args.verbose, args.quiet)
        if args.command == "solve":
            return _run_solve(args)
        kind = args.lemma if args.command == "concentrate" else args.command
        return _run_experiment(args, kind)
    except (UsageError, ConfigError) as e:
        print(f"trpca: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TensorFormatError, CsvSchemaError) as e:
        print(f"trpca: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (SvdConvergenceError, NeumannDivergenceError, ArithmeticError) as e:
        print(f"trpca: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
