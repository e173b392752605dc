import argparse
import json
import math
from fractions import Fraction

import pytest

from pyplancherel import cli
from pyplancherel.core.errors import NumericError
from pyplancherel.core.partitions import Partition


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_dims(capsys):
    assert run(capsys, "dims", "--lambda", "2,1", "--N", "3") == (
        0,
        "dim=2 Dim=8\n",
        "",
    )
    code, out, _ = run(capsys, "dims", "--lambda", "3,1,1")
    assert (code, out) == (0, "dim=6 Dim=6\n")


def test_dims_domain_error(capsys):
    code, out, err = run(capsys, "dims", "--lambda", "1,1,1", "--N", "2")
    assert code == cli.EXIT_DOMAIN
    assert out == ""
    assert err.startswith("error: ")


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as raised:
        cli.main(["dims", "--lambda", "1,2"])
    assert raised.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as raised:
        cli.main(["kernel", "--family", "charlier", "--window", "0..3"])
    assert raised.value.code == cli.EXIT_USAGE
    assert "--N, --theta" in capsys.readouterr().err
    with pytest.raises(SystemExit) as raised:
        cli.main(["measure", "--measure", "rectangle", "--n", "2"])
    assert raised.value.code == cli.EXIT_USAGE


def test_kernel_csv(capsys):
    code, out, _ = run(
        capsys, "kernel", "--family", "sine", "--phi", "pi", "--window", "-1..0"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,y,value"
    assert [line.rsplit(",", 1)[0] for line in lines[1:]] == [
        "-1,-1",
        "-1,0",
        "0,-1",
        "0,0",
    ]
    assert float(lines[1].rsplit(",", 1)[1]) == pytest.approx(1.0)
    assert float(lines[2].rsplit(",", 1)[1]) == pytest.approx(0.0, abs=1e-15)


def test_kernel_json(capsys):
    code, out, _ = run(
        capsys,
        "kernel",
        "--family",
        "krawtchouk",
        "--N",
        "2",
        "--p",
        "0.5",
        "--window",
        "0..3",
        "--format",
        "json",
    )
    assert code == 0
    data = json.loads(out)
    assert data["window"] == [0, 1, 2, 3]
    trace = sum(data["matrix"][i][i] for i in range(4))
    assert trace == pytest.approx(2.0)


def test_kernel_hermite_default(capsys):
    code, out, _ = run(capsys, "kernel", "--family", "hermite", "--window", "0")
    assert code == 0
    assert out.splitlines()[1].startswith("0,0,0.5")


def test_kernel_output_file(capsys, tmp_path):
    target = tmp_path / "kernel.csv"
    code, out, _ = run(
        capsys,
        "kernel",
        "--family",
        "charlier",
        "--N",
        "1",
        "--theta",
        "1",
        "--window",
        "0,1",
        "--output",
        str(target),
    )
    assert (code, out) == (0, "")
    lines = target.read_text().splitlines()
    assert len(lines) == 5
    assert float(lines[1].split(",")[2]) == pytest.approx(math.exp(-1))


def test_kernel_domain_error(capsys):
    argv = ("kernel", "--family", "charlier", "--N", "2", "--theta", "-1")
    code, _, err = run(capsys, *argv, "--window", "0..2")
    assert code == cli.EXIT_DOMAIN
    assert "θ" in err


def test_sample(capsys):
    argv = ("sample", "--family", "krawtchouk", "--N", "3", "--p", "0.5")
    code, out, _ = run(capsys, *argv, "--count", "4", "--seed", "7")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    for line in lines:
        points = [int(point) for point in line.split(",")]
        assert len(points) == 3
        assert points == sorted(points, reverse=True)
        assert 0 <= points[-1] and points[0] <= 5
    _, again, _ = run(capsys, *argv, "--count", "4", "--seed", "0x7")
    assert again == out


def test_sample_errors(capsys):
    argv = ("sample", "--family", "charlier", "--N", "2", "--theta", "1")
    code, _, _ = run(capsys, *argv, "--count", "-1")
    assert code == cli.EXIT_DOMAIN
    with pytest.raises(SystemExit):
        cli.main([*argv, "--seed", "-5"])
    with pytest.raises(SystemExit):
        cli.main(["sample", "--family", "hermite"])


def test_window(capsys):
    code, out, _ = run(
        capsys, "window", "--family", "sine", "--phi", "pi/2", "--window", "0..1"
    )
    assert code == 0
    data = json.loads(out)
    assert list(data) == ["", "0", "1", "0,1"]
    assert data["0,1"] == pytest.approx(0.25 - 1 / math.pi**2)


def test_window_guard(capsys):
    code, _, _ = run(capsys, "window", "--family", "sine", "--window", "0..20")
    assert code == cli.EXIT_DOMAIN


def test_converge_edge(capsys):
    argv = ("converge", "--regime", "edge", "--s", "-12", "--grid", "400,1600")
    code, out, _ = run(capsys, *argv, "--window", "0..5")
    assert code == 0
    data = json.loads(out)
    assert data["regime"] == "edge"
    assert data["params"] == {"s": -12.0}
    assert data["window"] == [0, 1, 2, 3, 4, 5]
    assert [N for N, _ in data["entries"]] == [400, 1600]


def test_converge_bulk_csv(capsys):
    argv = ("converge", "--regime", "bulk", "--c", "0.1", "--p", "0.4")
    code, out, _ = run(
        capsys, *argv, "--grid", "20,40", "--window", "-2..2", "--format", "csv"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N,distance"
    assert [line.split(",")[0] for line in lines[1:]] == ["20", "40"]


def test_converge_domain_error(capsys):
    argv = ("converge", "--regime", "bulk", "--c", "0.99", "--p", "0.3")
    code, _, _ = run(capsys, *argv)
    assert code == cli.EXIT_DOMAIN
    with pytest.raises(SystemExit):
        cli.main(["converge", "--regime", "edge", "--grid", "1,x"])


def test_shape(capsys):
    code, out, _ = run(capsys, "shape", "--curve", "omega", "--points", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "u,v"
    assert len(lines) == 6
    u, v = lines[3].split(",")
    assert u == "0"
    assert float(v) == pytest.approx(4 / math.pi)
    code, out, _ = run(capsys, "shape", "--curve", "mixf", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["curve"].startswith("mixf")
    assert len(data["u"]) == 101


def test_shape_domain_error(capsys):
    code, _, _ = run(capsys, "shape", "--curve", "mixf", "--points", "20")
    assert code == cli.EXIT_DOMAIN


def test_measure_exact(capsys):
    argv = ("measure", "--measure", "schur-weyl", "--n", "2", "--N", "2")
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == "partition,weight\n2,3/4\n\"1,1\",1/4\n"


def test_measure_json_and_floats(capsys):
    argv = ("measure", "--measure", "mix-krawtchouk", "--p", "3/10", "--N", "2")
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 6
    assert sum(float(value) for value in data.values()) == pytest.approx(1.0)
    code, out, _ = run(capsys, *argv, "--exact", "--format", "json")
    assert sum(Fraction(value) for value in json.loads(out).values()) == 1


def test_measure_poissonized(capsys):
    argv = ("measure", "--measure", "poisson-schur-weyl", "--nu", "2", "--N", "1")
    code, out, _ = run(capsys, *argv, "--max-size", "3")
    assert code == 0
    rows = out.splitlines()[1:]
    assert [row.split(",")[0] for row in rows] == ["", "1", "2", "3"]
    assert float(rows[0].split(",")[1]) == pytest.approx(math.exp(-2))


def test_numeric_error_exit_code(capsys, monkeypatch):
    def fail(config):
        raise NumericError("eigensolver failed")

    monkeypatch.setitem(cli.COMMANDS, "dims", fail)
    code, out, err = run(capsys, "dims", "--lambda", "1")
    assert code == cli.EXIT_NUMERIC
    assert out == ""
    assert "eigensolver failed" in err


def test_normalize_argv():
    assert cli._normalize_argv(["--window", "-3..3", "--s", "-1"]) == [
        "--window=-3..3",
        "--s",
        "-1",
    ]
    assert cli._normalize_argv(["--grid"]) == ["--grid"]


def test_run_config_from_namespace():
    args = cli.parse_args(["dims", "--lambda", "2,1", "-vv"])
    config = cli.RunConfig.from_namespace(args)
    assert config.subcommand == "dims"
    assert config.params["partition"] == Partition((2, 1))
    assert "verbose" not in config.params
    assert config.output is None
    assert config.output_format == "csv"
    with pytest.raises(TypeError):
        config.params["N"] = 3


@pytest.mark.parametrize(
    "text, expected",
    [("pi", math.pi), ("pi/2", math.pi / 2), ("3*pi/4", 0.75 * math.pi), ("1.5", 1.5)],
)
def test_phi_argument(text, expected):
    assert cli._phi(text) == pytest.approx(expected)


@pytest.mark.parametrize(
    "argv, expected",
    [
        (("--lambda", "1", "--N", "2"), "dim=1 Dim=2\n"),
        (("--lambda", ""), "dim=1 Dim=1\n"),
    ],
)
def test_dims_examples(capsys, argv, expected):
    assert run(capsys, "dims", *argv)[:2] == (0, expected)


def test_kernel_signed_window(capsys):
    argv = ("kernel", "--family", "sine", "--phi", "pi", "--window", "-3..3")
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert len(rows) == 49
    for x, y, value in rows:
        expected = 1.0 if x == y else 0.0
        assert float(value) == pytest.approx(expected, abs=1e-15)


def test_sample_charlier_count(capsys):
    argv = ("sample", "--family", "charlier", "--N", "3", "--theta", "9")
    code, out, _ = run(capsys, *argv, "--count", "50")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 50
    assert all(len(line.split(",")) == 3 for line in lines)


def test_shape_mixf_is_flat_at_one_half(capsys):
    argv = ("shape", "--curve", "mixf", "--p", "0.5", "--points", "101")
    code, out, _ = run(capsys, *argv)
    assert code == 0
    values = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
    assert len(values) == 101
    assert all(abs(value - 1.0) <= 1e-6 for value in values)


def test_every_option_has_help():
    parser = cli.build_parser()
    (subparsers,) = [
        action
        for action in parser._actions
        if isinstance(action, argparse._SubParsersAction)
    ]
    for name, subparser in subparsers.choices.items():
        for action in subparser._actions:
            if action.option_strings:
                assert action.help, f"{name} {action.option_strings}"
