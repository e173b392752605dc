"""Command-line front end: pyplancherel <subcommand> [options].

Exit codes: 0 success, 2 usage error, 3 domain error, 4 numerical failure.
"""
import argparse
import dataclasses
import logging
import math
import pathlib
import re
import sys
import types
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from pyplancherel.core import dpp, io, kernels, lattice, limits, partitions
from pyplancherel.core.errors import DomainError, NumericError

_LOG = logging.getLogger(__name__)

DEFAULT_SEED = 0xD1CE

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4

# Options whose values may start with "-" (negative windows and grids).
_SIGNED_OPTIONS = ("--window", "--grid")

_PHI_PATTERN = re.compile(
    r"^(?:(?P<factor>[0-9.eE+-]+)\*)?pi(?:/(?P<divisor>[0-9.eE+-]+))?$"
)

_FAMILY_PARAMETERS = {
    "charlier": ("N", "theta"),
    "krawtchouk": ("N", "p"),
    "hermite": (),
    "sine": (),
}

_MEASURE_PARAMETERS = {
    "plancherel": ("n",),
    "schur-weyl": ("n", "N"),
    "poisson-schur-weyl": ("nu", "N"),
    "rectangle": ("n", "N", "M"),
    "mix-krawtchouk": ("p", "N"),
}


@dataclasses.dataclass(frozen=True, slots=True)
class RunConfig:
    """The parsed invocation: subcommand, its parameters and output settings."""

    subcommand: str
    params: Mapping[str, object]
    seed: int = DEFAULT_SEED
    output_format: str = "csv"
    output: pathlib.Path | None = None

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        values = dict(vars(args))
        meta = {
            key: values.pop(key)
            for key in ("subcommand", "seed", "format", "output", "verbose")
            if key in values
        }
        return cls(
            subcommand=meta["subcommand"],
            params=types.MappingProxyType(values),
            seed=meta.get("seed", DEFAULT_SEED),
            output_format=meta.get("format") or "csv",
            output=meta.get("output"),
        )


def _partition(text: str) -> partitions.Partition:
    try:
        return partitions.Partition.from_string(text)
    except DomainError as error:
        raise argparse.ArgumentTypeError(str(error)) from error


def _window(text: str) -> lattice.Window:
    try:
        return lattice.parse_window(text)
    except DomainError as error:
        raise argparse.ArgumentTypeError(str(error)) from error


def _grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(chunk) for chunk in text.split(","))
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"invalid N-grid {text!r}") from error


def _phi(text: str) -> float:
    """Parses φ as a float or a multiple of pi, e.g "pi", "pi/2", "3*pi/4"."""
    text = text.strip().lower().replace(" ", "")
    match = _PHI_PATTERN.match(text)
    try:
        if match is None:
            return float(text)
        factor = float(match["factor"]) if match["factor"] else 1.0
        divisor = float(match["divisor"]) if match["divisor"] else 1.0
        return factor * math.pi / divisor
    except (ValueError, ZeroDivisionError) as error:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from error


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as error:
        raise argparse.ArgumentTypeError(f"invalid rational {text!r}") from error


def _seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from error
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return seed


def _add_family_options(parser: argparse.ArgumentParser, families: Sequence[str]):
    parser.add_argument(
        "--family", required=True, choices=families, help="kernel family"
    )
    parser.add_argument("--N", type=int, help="number of particles (rank)")
    parser.add_argument("--theta", type=float, help="Charlier parameter θ")
    parser.add_argument("--p", type=float, help="Krawtchouk parameter p")
    parser.add_argument("--L", type=int, help="Krawtchouk lattice size (default 2N-1)")
    parser.add_argument("--s", type=float, default=0.0, help="Hermite parameter s")
    parser.add_argument(
        "--phi", type=_phi, default=math.pi / 2, help="sine kernel angle, e.g. pi/2"
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="repeat for more logging"
    )
    common.add_argument("--output", type=pathlib.Path, help="write to a file")

    parser = argparse.ArgumentParser(
        prog="pyplancherel",
        description="Random partitions, their kernels and limit theorems.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    dims = subparsers.add_parser(
        "dims", parents=[common], help="print dim λ and Dim_N λ"
    )
    dims.add_argument(
        "--lambda",
        dest="partition",
        type=_partition,
        required=True,
        help='e.g. "3,1,1"',
    )
    dims.add_argument("--N", type=int, help="rank of U(N) (default max(ℓ(λ), 1))")

    kernel = subparsers.add_parser(
        "kernel", parents=[common], help="dump a kernel over a window"
    )
    _add_family_options(kernel, tuple(_FAMILY_PARAMETERS))
    kernel.add_argument("--window", type=_window, required=True, help='e.g. "0..10"')
    kernel.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )

    sample = subparsers.add_parser(
        "sample", parents=[common], help="sample an orthogonal polynomial ensemble"
    )
    _add_family_options(sample, ("charlier", "krawtchouk"))
    sample.add_argument("--count", type=int, default=1, help="number of samples")
    sample.add_argument(
        "--seed", type=_seed, default=DEFAULT_SEED, help="64-bit seed, e.g. 0xD1CE"
    )

    window = subparsers.add_parser(
        "window", parents=[common], help="distribution of X on a finite window"
    )
    _add_family_options(window, tuple(_FAMILY_PARAMETERS))
    window.add_argument("--window", type=_window, required=True, help='e.g. "0..5"')
    window.add_argument(
        "--format", choices=("json",), default="json", help="output format"
    )

    converge = subparsers.add_parser(
        "converge", parents=[common], help="edge or bulk convergence sweep"
    )
    converge.add_argument(
        "--regime",
        required=True,
        choices=("edge", "bulk"),
        help="Charlier edge (Hermite limit) or Krawtchouk bulk (sine limit)",
    )
    converge.add_argument("--s", type=float, default=0.0, help="edge parameter s")
    converge.add_argument(
        "--c", type=float, default=0.0, help="bulk position, |c| < 2√(p(1-p))"
    )
    converge.add_argument("--p", type=float, default=0.5, help="bulk parameter p")
    converge.add_argument("--grid", type=_grid, help="e.g. 100,400,1600,6400")
    converge.add_argument("--window", type=_window, help="sites (edge) or offsets")
    converge.add_argument("--workers", type=int, help="threads for the sweep")
    converge.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )

    shape = subparsers.add_parser(
        "shape", parents=[common], help="sample a limit-shape curve"
    )
    shape.add_argument(
        "--curve", required=True, choices=("omega", "mixf"), help="limit curve"
    )
    shape.add_argument("--p", type=float, default=0.5, help="mixf parameter p")
    shape.add_argument("--points", type=int, default=101, help="grid size")
    shape.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )

    measure = subparsers.add_parser(
        "measure", parents=[common], help="tabulate a measure on partitions"
    )
    measure.add_argument(
        "--measure",
        required=True,
        choices=tuple(_MEASURE_PARAMETERS),
        help="measure on partitions",
    )
    measure.add_argument("--n", type=int, help="partition size")
    measure.add_argument("--N", type=int, help="maximal number of rows")
    measure.add_argument("--M", type=int, help="maximal number of columns")
    measure.add_argument("--nu", type=_rational, help="poissonization parameter ν")
    measure.add_argument("--p", type=_rational, help="mixture parameter p")
    measure.add_argument("--max-size", type=int, help="poissonized support cutoff")
    measure.add_argument(
        "--exact", action="store_true", help="exact rational weights (ν, p as given)"
    )
    measure.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )
    return parser


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    """Glues "--window -3..3" into "--window=-3..3" so argparse accepts it.

    E.g: _normalize_argv(["--grid", "-1,2"]) => ["--grid=-1,2"]
    """
    normalized: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in _SIGNED_OPTIONS:
            value = next(tokens, None)
            if value is None:
                normalized.append(token)
            else:
                normalized.append(f"{token}={value}")
        else:
            normalized.append(token)
    return normalized


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(_normalize_argv(sys.argv[1:] if argv is None else argv))
    required: tuple[str, ...] = ()
    if hasattr(args, "family"):
        required = _FAMILY_PARAMETERS[args.family]
    elif args.subcommand == "measure":
        required = _MEASURE_PARAMETERS[args.measure]
    missing = [name for name in required if getattr(args, name) is None]
    if missing:
        parser.error(
            f"{args.subcommand} needs " + ", ".join(f"--{name}" for name in missing)
        )
    return args


def _family_kernel(params: Mapping[str, object]) -> kernels.Kernel:
    match params["family"]:
        case "charlier":
            return kernels.charlier_kernel(params["N"], params["theta"])
        case "krawtchouk":
            size = params["L"] if params["L"] is not None else 2 * params["N"] - 1
            return kernels.krawtchouk_kernel(params["N"], params["p"], size)
        case "hermite":
            return kernels.hermite_kernel(params["s"])
        case "sine":
            return kernels.sine_kernel(params["phi"])
    raise DomainError(f"unknown family {params['family']!r}")


def cmd_dims(config: RunConfig) -> str:
    partition = config.params["partition"]
    rows = config.params["N"]
    rows = max(partition.length, 1) if rows is None else rows
    return (
        f"dim={partitions.dim_sym(partition)} "
        f"Dim={partitions.dim_un(partition, rows)}\n"
    )


def cmd_kernel(config: RunConfig) -> str:
    kernel = _family_kernel(config.params)
    if config.output_format == "json":
        return io.kernel_to_json(kernel, config.params["window"]) + "\n"
    return io.kernel_to_csv(kernel, config.params["window"])


def cmd_sample(config: RunConfig) -> str:
    kernel = _family_kernel(config.params)
    if config.params["count"] < 0:
        raise DomainError("--count must be nonnegative")
    rng = np.random.default_rng(config.seed)
    return io.configurations_to_text(
        dpp.sample_many(kernel, config.params["count"], rng)
    )


def cmd_window(config: RunConfig) -> str:
    kernel = _family_kernel(config.params)
    distribution = dpp.window_distribution(kernel, config.params["window"])
    return io.window_distribution_to_json(distribution) + "\n"


def cmd_converge(config: RunConfig) -> str:
    params = config.params
    if params["regime"] == "edge":
        report = limits.charlier_edge_sweep(
            params["s"],
            params["grid"] or limits.DEFAULT_EDGE_GRID,
            params["window"] or limits.DEFAULT_EDGE_WINDOW,
            params["workers"],
        )
    else:
        report = limits.krawtchouk_bulk_sweep(
            params["c"],
            params["p"],
            params["grid"] or limits.DEFAULT_BULK_GRID,
            params["window"] or limits.DEFAULT_BULK_OFFSETS,
            params["workers"],
        )
    if config.output_format == "csv":
        return io.report_to_csv(report)
    return io.report_to_json(report) + "\n"


def cmd_shape(config: RunConfig) -> str:
    params = config.params
    if params["curve"] == "omega":
        curve = limits.omega_curve(params["points"])
    else:
        curve = limits.limit_shape_F(params["p"], params["points"])
    if config.output_format == "json":
        return io.curve_to_json(curve) + "\n"
    return io.curve_to_csv(curve)


def _measure_spec(params: Mapping[str, object]) -> partitions.MeasureSpec:
    exact = params["exact"]

    def real(name: str) -> Fraction | float:
        return params[name] if exact else float(params[name])

    match params["measure"]:
        case "plancherel":
            return partitions.Plancherel(params["n"])
        case "schur-weyl":
            return partitions.SchurWeyl(params["n"], params["N"])
        case "poisson-schur-weyl":
            return partitions.PoissonSchurWeyl(real("nu"), params["N"])
        case "rectangle":
            return partitions.Rectangle(params["n"], params["N"], params["M"])
        case "mix-krawtchouk":
            return partitions.MixKrawtchouk(real("p"), params["N"])
    raise DomainError(f"unknown measure {params['measure']!r}")


def cmd_measure(config: RunConfig) -> str:
    spec = _measure_spec(config.params)
    weights = [
        (partition, partitions.measure_weight(spec, partition))
        for partition in partitions.support(spec, config.params["max_size"])
    ]
    if config.output_format == "json":
        return io.measure_to_json(weights) + "\n"
    return io.measure_to_csv(weights)


COMMANDS: dict[str, Callable[[RunConfig], str]] = {
    "dims": cmd_dims,
    "kernel": cmd_kernel,
    "sample": cmd_sample,
    "window": cmd_window,
    "converge": cmd_converge,
    "shape": cmd_shape,
    "measure": cmd_measure,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    config = RunConfig.from_namespace(args)
    _LOG.debug("running %s", config)
    try:
        text = COMMANDS[config.subcommand](config)
    except DomainError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_NUMERIC
    if config.output is None:
        sys.stdout.write(text)
    else:
        config.output.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
