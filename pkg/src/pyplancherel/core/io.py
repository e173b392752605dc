"""Conversion functions from computed objects to CSV, JSON and plain text."""
import csv
import io
import json
from fractions import Fraction
from typing import Iterable

from pyplancherel.core import dpp, kernels, limits, partitions
from pyplancherel.core.lattice import Site, format_sites


def format_float(value: float) -> str:
    """Formats a float with 17 significant digits, enough to round-trip binary64.

    E.g: format_float(0.5) => "0.5"
    """
    return format(float(value), ".17g")


def format_weight(value: Fraction | float) -> str:
    """Formats exact weights as "a/b" and floats as in `format_float`."""
    if isinstance(value, Fraction):
        return str(value)
    return format_float(value)


def kernel_to_csv(kernel: kernels.Kernel, sites: Iterable[Site]) -> str:
    """Dumps the Gram matrix over a window, row-major, as "x,y,value" rows."""
    sites = tuple(sites)
    matrix = kernel.matrix(sites)
    rows = ["x,y,value"]
    for i, x in enumerate(sites):
        for j, y in enumerate(sites):
            rows.append(f"{x},{y},{format_float(matrix[i, j])}")
    return "\n".join(rows) + "\n"


def kernel_to_json(kernel: kernels.Kernel, sites: Iterable[Site]) -> str:
    sites = tuple(sites)
    matrix = kernel.matrix(sites)
    return json.dumps(
        {"kernel": repr(kernel), "window": list(sites), "matrix": matrix.tolist()}
    )


def curve_to_csv(curve: limits.LimitCurve) -> str:
    rows = ["u,v"]
    rows.extend(
        f"{format_float(u)},{format_float(v)}" for u, v in zip(curve.u, curve.v)
    )
    return "\n".join(rows) + "\n"


def curve_to_json(curve: limits.LimitCurve) -> str:
    return json.dumps(
        {"curve": curve.name, "u": curve.u.tolist(), "v": curve.v.tolist()}
    )


def configurations_to_text(
    configs: Iterable[partitions.ParticleConfiguration],
) -> str:
    """One configuration per line, decreasing integers, comma-separated."""
    return "".join(format_sites(config.points) + "\n" for config in configs)


def window_distribution_to_json(distribution: dpp.WindowDistribution) -> str:
    """Maps comma-separated subsets ("" for ∅) to probabilities."""
    return json.dumps(
        {format_sites(subset): value for subset, value in distribution.items()},
        indent=2,
    )


def _regime_fields(spec: limits.RegimeSpec) -> tuple[str, dict[str, float]]:
    match spec.regime:
        case limits.CharlierEdge(s=s):
            return "edge", {"s": s}
        case limits.KrawtchoukBulk(c=c, p=p):
            return "bulk", {"c": c, "p": p, "phi": spec.regime.phi}
    raise TypeError(f"unknown regime {spec.regime!r}")


def report_to_json(report: limits.ConvergenceReport) -> str:
    regime, params = _regime_fields(report.regime)
    return json.dumps(
        {
            "regime": regime,
            "params": params,
            "window": list(report.regime.window),
            "limit": report.limit,
            "entries": [[N, distance] for N, distance in report.entries],
            "passed": report.passed,
        },
        indent=2,
    )


def report_to_csv(report: limits.ConvergenceReport) -> str:
    rows = ["N,distance"]
    rows.extend(f"{N},{format_float(distance)}" for N, distance in report.entries)
    return "\n".join(rows) + "\n"


def measure_to_csv(
    weights: Iterable[tuple[partitions.Partition, Fraction | float]],
) -> str:
    """Dumps "partition,weight" rows; partitions are quoted since they hold commas."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["partition", "weight"])
    for partition, weight in weights:
        writer.writerow([str(partition), format_weight(weight)])
    return buffer.getvalue()


def measure_to_json(
    weights: Iterable[tuple[partitions.Partition, Fraction | float]],
) -> str:
    return json.dumps(
        {str(partition): format_weight(weight) for partition, weight in weights},
        indent=2,
    )
