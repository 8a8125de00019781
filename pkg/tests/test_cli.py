import pytest

import json
import math
import os

from asymconv.__main__ import (
    EXIT_OK,
    EXIT_USAGE,
    LOCAL_CONFIG_ENV,
    _glue_signed_values,
    float_list_arg,
    main,
    range_arg,
)

EXAMPLES_DIR = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "experiment_examples"
)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.delenv(LOCAL_CONFIG_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _run(*argv: "str") -> "int":
    with pytest.raises(SystemExit) as excinfo:
        main(list(argv))
    return int(excinfo.value.code or 0)


def _latest_record(out_dir) -> "dict":
    runs = os.path.join(str(out_dir), "runs")
    (record_id,) = os.listdir(runs)
    with open(os.path.join(runs, record_id, "record.json"), encoding="utf-8") as rH:
        return json.load(rH)


@pytest.mark.parametrize(
    ["argv", "expected"],
    [
        (["--window", "-2:2"], ["--window=-2:2"]),
        (["--point", "-1,0.5", "envelope"], ["--point=-1,0.5", "envelope"]),
        (["--window=-2:2"], ["--window=-2:2"]),
        (["--window", "0:1"], ["--window", "0:1"]),
        (["--fn", "-x"], ["--fn", "-x"]),
    ],
)
def test_glue_signed_values(argv: "list", expected: "list") -> "None":
    assert _glue_signed_values(argv) == expected


def test_argument_types() -> "None":
    assert range_arg("-2:2.5") == [-2.0, 2.5]
    assert float_list_arg("0.5,1,2") == [0.5, 1.0, 2.0]
    grid = float_list_arg("0.1:1:3")
    assert grid == pytest.approx([0.1, math.sqrt(0.1), 1.0])


def test_full_help(workdir, capsys) -> "None":
    assert _run("--full-help") == EXIT_OK
    out = capsys.readouterr().out
    assert "Subparser 'extremal'" in out
    assert "Subparser 'export'" in out


def test_envelope_run(workdir) -> "None":
    out = workdir / "out"
    code = _run("--out", str(out), "envelope", "--fn", "(x^2-1)^2", "--window", "-2:2", "--grid", "401")
    assert code == EXIT_OK
    record = _latest_record(out)
    assert record["passed"] is True
    assert record["config"]["params"]["window"] == [-2.0, 2.0]


def test_extremal_run_and_export(workdir, capsys) -> "None":
    out = workdir / "out"
    assert _run("--out", str(out), "extremal", "--N", "6", "--t0", "1") == EXIT_OK
    record = _latest_record(out)
    solution = record["results"]["solutions"][0]
    assert solution["q"] == pytest.approx(7.0 / 6.0, abs=2e-3)
    assert solution["K"] == pytest.approx(12.0 / 7.0, abs=3e-3)
    assert record["curves"]["extremal_N6"]["degree"] == 6

    capsys.readouterr()
    assert _run("--out", str(out), "export", record["record_id"], "--format", "csv") == EXIT_OK
    (path,) = capsys.readouterr().out.split()
    with open(path, encoding="utf-8") as pH:
        assert pH.readline().strip() == "t0,q,q_normalized,K,log_t0,log_q"


def test_asymptotic_closed_form(workdir) -> "None":
    out = workdir / "out"
    code = _run(
        "--out", str(out), "--refine-iters", "0",
        "asymptotic", "--space", "lp:4", "--mode", "rho_bar", "--t", "1", "--no-sampled",
    )
    assert code == EXIT_OK
    record = _latest_record(out)
    (analytic,) = record["results"]["analytic"]
    assert analytic["value"] == pytest.approx(2.0 ** 0.25 - 1.0, rel=1e-9)


@pytest.mark.parametrize("mode", ["rho", "delta"])
def test_asymptotic_radius_flag_is_not_an_abbreviation(workdir, mode: "str") -> "None":
    out = workdir / "out"
    code = _run(
        "--out", str(out), "--refine-iters", "0",
        "asymptotic", "--space", "lp:4", "--mode", mode, "--t", "0.5", "--no-sampled",
    )
    assert code == EXIT_OK
    record = _latest_record(out)
    assert record["config"]["params"]["t"] == [0.5]


def test_prefixes_of_global_flags_are_rejected(workdir) -> "None":
    assert _run("--out", str(workdir / "out"), "--tolerance-s", "2", "verify") == EXIT_USAGE


def test_bad_expression(workdir) -> "None":
    out = workdir / "out"
    assert _run("--out", str(out), "envelope", "--fn", "(x^2-1") == EXIT_USAGE
    assert not os.path.exists(out / "runs")


def test_unknown_record(workdir) -> "None":
    assert _run("--out", str(workdir / "out"), "export", "0123456789abcdef") == EXIT_USAGE


def test_bad_experiment_config(workdir) -> "None":
    path = workdir / "bad.yaml"
    path.write_text("command: extremal\nparams: {}\nunknown: 1\n", encoding="utf-8")
    assert _run("--out", str(workdir / "out"), "--config", str(path)) == EXIT_USAGE


def test_config_file_run(workdir) -> "None":
    out = workdir / "out"
    config = os.path.join(EXAMPLES_DIR, "double-well-envelope.yaml")
    assert _run("--out", str(out), "--config", config) == EXIT_OK
    record = _latest_record(out)
    assert record["config"]["command"] == "envelope"
