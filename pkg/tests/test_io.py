import json
import math
from fractions import Fraction

import numpy as np
import pytest

from pyplancherel.core import dpp, io, kernels, limits
from pyplancherel.core.limits import (
    CharlierEdge,
    ConvergenceReport,
    KrawtchoukBulk,
    RegimeSpec,
)
from pyplancherel.core.partitions import ParticleConfiguration, Partition


@pytest.mark.parametrize(
    "value, expected", [(0.5, "0.5"), (0.1, "0.10000000000000001"), (2, "2")]
)
def test_format_float(value, expected):
    assert io.format_float(value) == expected


def test_format_float_round_trips():
    for value in (1 / 3, math.pi, 1e-300, -2.5e17, np.float64(0.7)):
        assert float(io.format_float(value)) == value


def test_format_weight():
    assert io.format_weight(Fraction(1, 3)) == "1/3"
    assert io.format_weight(Fraction(2)) == "2"
    assert io.format_weight(0.25) == "0.25"


def test_kernel_to_csv():
    text = io.kernel_to_csv(kernels.sine_kernel(0.0), (-1, 0))
    assert text == "x,y,value\n-1,-1,0\n-1,0,0\n0,-1,0\n0,0,0\n"


def test_kernel_to_csv_values_round_trip():
    kernel = kernels.hermite_kernel(0.0)
    lines = io.kernel_to_csv(kernel, range(3)).splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 10
    for line in lines[1:]:
        x, y, value = line.split(",")
        assert float(value) == kernel.evaluate(int(x), int(y))


def test_kernel_to_json():
    kernel = kernels.krawtchouk_kernel(2, 0.3, 4)
    data = json.loads(io.kernel_to_json(kernel, (0, 2, 4)))
    assert data["kernel"] == repr(kernel)
    assert data["window"] == [0, 2, 4]
    assert data["matrix"] == kernel.matrix((0, 2, 4)).tolist()


def test_curve_serialization():
    curve = limits.LimitCurve("test", np.array([0.0, 1.0]), np.array([0.5, 2.0]))
    assert io.curve_to_csv(curve) == "u,v\n0,0.5\n1,2\n"
    data = json.loads(io.curve_to_json(curve))
    assert data == {"curve": "test", "u": [0.0, 1.0], "v": [0.5, 2.0]}


def test_configurations_to_text():
    configs = [ParticleConfiguration((3, 1, 0)), ParticleConfiguration((2,))]
    assert io.configurations_to_text(configs) == "3,1,0\n2\n"
    assert io.configurations_to_text([]) == ""


def test_window_distribution_to_json():
    distribution = dpp.window_distribution(kernels.sine_kernel(math.pi / 2), (0, 1))
    data = json.loads(io.window_distribution_to_json(distribution))
    assert list(data) == ["", "0", "1", "0,1"]
    assert data["0,1"] == pytest.approx(0.25 - 1 / math.pi**2)
    assert sum(data.values()) == pytest.approx(1.0)


def test_report_to_json_edge():
    spec = RegimeSpec(CharlierEdge(0.0), (10, 20), (0, 1))
    report = ConvergenceReport(spec, ((10, 0.5), (20, 0.125)), "HermiteKernel(s=0.0)")
    data = json.loads(io.report_to_json(report))
    assert data == {
        "regime": "edge",
        "params": {"s": 0.0},
        "window": [0, 1],
        "limit": "HermiteKernel(s=0.0)",
        "entries": [[10, 0.5], [20, 0.125]],
        "passed": True,
    }


def test_report_to_json_bulk():
    spec = RegimeSpec(KrawtchoukBulk(0.0, 0.5), (10, 20), (-1, 0, 1))
    report = ConvergenceReport(spec, ((10, 0.5), (20, 0.375)), "sine")
    data = json.loads(io.report_to_json(report))
    assert data["regime"] == "bulk"
    assert data["params"]["phi"] == pytest.approx(math.pi / 2)
    assert data["passed"] is False


def test_report_to_csv():
    spec = RegimeSpec(CharlierEdge(0.0), (10, 20), (0,))
    report = ConvergenceReport(spec, ((10, 0.5), (20, 0.25)), "limit")
    assert io.report_to_csv(report) == "N,distance\n10,0.5\n20,0.25\n"


def test_measure_serialization():
    weights = [(Partition((2,)), Fraction(1, 2)), (Partition((1, 1)), Fraction(1, 2))]
    assert io.measure_to_csv(weights) == 'partition,weight\n2,1/2\n"1,1",1/2\n'
    assert json.loads(io.measure_to_json(weights)) == {"2": "1/2", "1,1": "1/2"}
    floating = [(Partition((1,)), 1.0)]
    assert io.measure_to_csv(floating) == "partition,weight\n1,1\n"
