"""Command-line front end.

Units: lengths in box units, energies in units of ħ²/(2m·length²) with the
kinetic term written as -Δ.
"""
import argparse
import io
import logging
import sys
from typing import Optional, Sequence, TextIO, Union

from models.run_spec import GLOBAL_KEYS, SUBCOMMAND_PARAMETERS, OutputFormat, RunResult, RunSpec
from services.golden_service import GoldenService
from services.runners import run, running_service
from utils.exceptions import BoseGasError
from utils.export import write_csv, write_json, write_text

logger = logging.getLogger(__name__)

UNITS_NOTE = ("Lengths are in box units; energies in units of hbar^2/(2m length^2), "
              "with the kinetic energy written as -Laplacian.")

BRACKET_VARIANTS = ["gp", "mean_field", "beta_regime"]


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (0 = one per CPU)")
    common.add_argument("--deterministic", action="store_true", default=None,
                        help="reduce in a fixed order and print 17 significant digits")
    common.add_argument("--config", default=None, help="flat key=value run configuration file")
    common.add_argument("--output", default=None, help="output file (default: standard output)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    common.add_argument("--log-file", default=None, help="also write the log to this file")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per numerical module."""
    common = _common_options()
    parser = argparse.ArgumentParser(prog="bosegas", description="Dilute Bose gas numerical toolkit.",
                                     epilog=UNITS_NOTE)
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[common], epilog=UNITS_NOTE)

    p = add("scattering", "zero-energy scattering length or Fourier coefficient")
    p.add_argument("--potential", help="hard:<r> | soft:<h>,<r> | table:<path> | zero")
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--fourier", type=float, metavar="P", help="print V̂(p) for |p| = P instead")
    p.add_argument("--profile", action="store_true", default=None, help="emit the (r, f) profile rows")

    p = add("neumann", "Neumann ground state on a ball")
    p.add_argument("--core", help="hard-core radius or a potential specification")
    p.add_argument("--ell", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--r", type=float, help="exponent of the profile norms")
    p.add_argument("--ell0", type=float, help="outer radius for the ratio-equation residual")

    p = add("elambda", "the finite-volume constant e_Lambda")
    p.add_argument("--mmax", type=int)
    p.add_argument("--accelerate", action=argparse.BooleanOptionalAction, default=None)

    p = add("bracket", "second-order lattice bracket sum")
    p.add_argument("--variant", choices=BRACKET_VARIANTS)
    p.add_argument("--a", type=float)
    p.add_argument("--potential")
    p.add_argument("--vhat0", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--tail", action=argparse.BooleanOptionalAction, default=None)

    p = add("born", "finite Born series of the scaled scattering length")
    p.add_argument("--potential")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--order", type=int)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--geometry", choices=["torus", "continuum"])

    p = add("lhy", "continuum second-order energy per particle")
    p.add_argument("--a", type=float)
    p.add_argument("--rho", type=float)

    p = add("energy", "assembled Bogoliubov ground-state energy")
    p.add_argument("--regime", choices=["gp", "mean_field", "beta"])
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--potential")
    p.add_argument("--beta", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--mmax", type=int)
    p.add_argument("--order", type=int)

    p = add("spectrum", "excitation energies below a threshold")
    p.add_argument("--kind", choices=BRACKET_VARIANTS)
    p.add_argument("--a", type=float)
    p.add_argument("--potential")
    p.add_argument("--vhat0", type=float)
    p.add_argument("--zeta", type=float)
    p.add_argument("--guard", type=int)

    p = add("vmc", "Monte Carlo energy of the Jastrow state on the torus")
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--core", type=float)
    p.add_argument("--ell", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--chains", type=int)
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--append", help="append the result row to this CSV file")

    p = add("probe", "ell-scaling of the three-particle derivative expectations")
    p.add_argument("--ell-min", dest="ell_min", type=float)
    p.add_argument("--ell-max", dest="ell_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--n-for-proxy", dest="n_for_proxy", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--a", type=float)

    p = add("golden", "rerun golden records and compare")
    p.add_argument("records", nargs="?", default=None, help="JSON file of golden records")
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    allowed = set(SUBCOMMAND_PARAMETERS[args.subcommand]) | set(GLOBAL_KEYS)
    flags = {key: value for key, value in vars(args).items() if key in allowed}
    return RunSpec.from_sources(args.subcommand, flags, args.config)


def run_golden(spec: RunSpec) -> RunResult:
    service = running_service(GoldenService, spec.threads)
    report = service.check(spec.require("records"))
    status = "passed" if report.passed else "FAILED"
    return RunResult(
        summary=f"golden check {status}: {report.n_failed} of {len(report.outcomes)} record(s) failed",
        payload=report.to_dict(), rows=report.rows(),
        columns=["record", "key", "expected", "actual", "delta", "tolerance", "passed", "error"],
        exit_status=0 if report.passed else 1)


def render(result: RunResult, spec: RunSpec) -> str:
    """Result text in the requested format."""
    buffer = io.StringIO()
    if spec.output_format == OutputFormat.CSV:
        rows = result.rows or [result.payload]
        write_csv(rows, buffer, spec.deterministic, result.columns if result.rows else None)
    elif spec.output_format == OutputFormat.JSON:
        write_json(result.payload, buffer)
    else:
        write_text(result.summary, result.payload, buffer)
    return buffer.getvalue()


def emit(result: RunResult, spec: RunSpec, stdout: TextIO, stderr: TextIO) -> None:
    """Write the result and the one-line summary.

    Data sent to standard output keeps the summary on standard error.
    """
    text = render(result, spec)
    if spec.output is not None:
        with open(spec.output, "w", newline="") as f:
            f.write(text)
        logger.info(f"Wrote {spec.output_format.value} output to {spec.output}")
        print(result.summary, file=stdout)
    elif spec.output_format == OutputFormat.TEXT:
        stdout.write(text)
    else:
        stdout.write(text)
        print(result.summary, file=stderr)


def dispatch(argv: Union[Sequence[str], argparse.Namespace, None] = None,
             stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Run one command line and return its exit status.

    0 on success, 1 when a golden check fails, 2 on domain or configuration
    errors, 3 on solver or accuracy errors, 4 when a resource guard trips.
    """
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = argv if isinstance(argv, argparse.Namespace) else build_parser().parse_args(argv)
    if not getattr(args, "subcommand", None):
        build_parser().print_help(stderr)
        return 2
    try:
        spec = spec_from_args(args)
        result = run_golden(spec) if spec.subcommand == "golden" else run(spec)
        emit(result, spec, stdout, stderr)
        return result.exit_status
    except BoseGasError as e:
        logger.error(f"{args.subcommand} failed: {e}")
        print(f"error: {e}", file=stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.subcommand} failed: {e}")
        print(f"error: {e}", file=stderr)
        return 2
