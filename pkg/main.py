# main.py
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.commands.maximize import MaximizeCommand
from src.commands.polyakov import PolyakovCommand
from src.commands.spectrum import SpectrumCommand
from src.commands.verify import VerifyCommand
from src.commands.zeta import ZetaCommand
from src.cr_determinant.services.validation_service import ValidationService
from src.cr_determinant.utils.output import atomic_write, document, emit, render_csv, render_document
from exceptions import (
    ConfigException, CRDeterminantException, DegreeCapExceededException, HypothesisViolationException,
    InsufficientOrderException, ModelSchemaException, NonConvergenceException, NonPluriharmonicException,
    NonRealFunctionException, UnsupportedCocyclePartException, ZetaPoleException,
)
from config import Config

logger = logging.getLogger("cr_determinant")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

USAGE_ERRORS = (
    ConfigException, ModelSchemaException, NonPluriharmonicException, NonRealFunctionException,
    HypothesisViolationException, ZetaPoleException, DegreeCapExceededException,
    InsufficientOrderException, UnsupportedCocyclePartException,
)

COMMANDS = {
    "spectrum": SpectrumCommand,
    "zeta": ZetaCommand,
    "polyakov": PolyakovCommand,
    "maximize": MaximizeCommand,
    "verify": VerifyCommand,
}

# argparse dest -> run-config key
OVERRIDE_KEYS = {
    "degree": "degree", "grid": "grid", "kappa": "kappa", "c2": "c2", "c3": "c3", "mu": "mu",
    "seed": "seed", "grad_tol": "grad_tol", "max_iter": "max_iter", "memory": "memory",
    "model": "model", "format": "format", "verify_scale": "verify_scale",
}


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--degree", type=int, help="truncation degree N of the pluriharmonic basis")
    common.add_argument("--grid", help="quadrature sizes as N_ETAxN_XI, e.g. 16x40")
    common.add_argument("--kappa", type=float, help="normalization of A (spectrum kappa j(j+1))")
    common.add_argument("--c2", type=float)
    common.add_argument("--c3", type=float)
    common.add_argument("--mu", type=float, help="override for mu (default lambda/3)")
    common.add_argument("--seed", type=int)
    common.add_argument("--grad-tol", dest="grad_tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--memory", type=int, help="curvature pairs kept by the ascent (0: plain gradient)")
    common.add_argument("--verify-scale", dest="verify_scale", type=float,
                        help="multiplier on the verify sample counts")
    common.add_argument("--model", help="'sphere' or a synthetic-model JSON file")
    common.add_argument("--out", help="write the output document here instead of stdout")
    common.add_argument("--format", choices=Config.OUTPUT_FORMATS)
    common.add_argument("--config", help="line-based key = value configuration file")
    common.add_argument("--force", action="store_true", help="maximize even when infeasible")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cr-determinant",
                                     description="Functional determinants of the P'-operator on the CR sphere")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("spectrum", parents=[common], help="eigenvalue levels and the P' normalization table")

    zeta = commands.add_parser("zeta", parents=[common], help="zeta values, zeta'(0) and the determinant")
    zeta.add_argument("--s", type=_float_list, help="comma-separated s values (default 0,2)")
    zeta.add_argument("--scale", type=float, help="check the determinant scaling law for this c")

    polyakov = commands.add_parser("polyakov", parents=[common], help="Polyakov functionals of one w")
    source = polyakov.add_mutually_exclusive_group()
    source.add_argument("--w", help="real-frame coefficients, comma-separated (use --w=-1,0,... for negatives)")
    source.add_argument("--w-file", dest="w_file", help="JSON coefficient list or monomial terms")
    source.add_argument("--random", action="store_true", help="seeded random w with sup norm at most 1")
    polyakov.add_argument("--split", help="real-frame coefficients of w1 for the cocycle check (default w/2)")

    maximize = commands.add_parser("maximize", parents=[common], help="feasibility and ascent of F")
    maximize.add_argument("--init", choices=["zero", "random"], default="zero")

    verify = commands.add_parser("verify", parents=[common], help="run the verification suites")
    verify.add_argument("--suite", help="comma-separated subset of suites")
    return parser


def configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.INFO)


def write_outputs(command: str, run_config, result, out: Optional[str]):
    payload = document(command, run_config.to_dict(), dict(result.results, summary=result.lines))
    emit(render_document(payload, run_config.output_format), out)
    if not out:
        return
    out_path = Path(out)
    for suffix, rows in result.attachments.items():
        path = atomic_write(out_path.with_name(f"{out_path.stem}_{suffix}.csv"), render_csv(rows))
        logger.info("Wrote %s", path)


def _write_partial_trace(error: NonConvergenceException, out: Optional[str]):
    if out and error.trace is not None and error.trace.iterates:
        out_path = Path(out)
        atomic_write(out_path.with_name(f"{out_path.stem}_trace.csv"), render_csv(error.trace.rows()))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.verbose)
    overrides = {key: getattr(args, dest, None) for dest, key in OVERRIDE_KEYS.items()}

    try:
        run_config = ValidationService().resolve_run_config(overrides, args.config)
        result = COMMANDS[args.command](run_config).execute(args)
    except USAGE_ERRORS as e:
        logger.error("%s: %s", type(e).__name__, e)
        if isinstance(e, ModelSchemaException):
            for line in e.diagnostics:
                print(f"schema: {line}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceException as e:
        logger.error("%s", e)
        _write_partial_trace(e, args.out)
        return EXIT_NUMERICAL
    except CRDeterminantException as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE

    for line in result.lines:
        print(line, file=sys.stderr)
    write_outputs(args.command, run_config, result, args.out)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
