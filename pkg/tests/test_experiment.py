import pytest

import datetime
import json
import math
import os

from asymconv.common import (
    SamplerConfig,
    ToleranceProfile,
    as_curve_name,
)
from asymconv.experiment import (
    AssertionOutcome,
    Command,
    CurveKind,
    ExperimentConfig,
    ExperimentConfigException,
    ExperimentRecord,
    ExportFormat,
    RecordCurve,
    RecordStore,
    UnknownRecordException,
    export_plots,
    sweep_curve,
    wall_clock,
)


def _record(
    config: "ExperimentConfig", passed: "bool" = True
) -> "ExperimentRecord":
    started = datetime.datetime(2024, 5, 1, 12, 0, 0)
    return ExperimentRecord(
        config=config,
        toolkit_version="0.3.0",
        results={"q": 7.0 / 6.0},
        assertions=[AssertionOutcome("q matches", passed, witness=[1.0, 2.0])],
        curves=[
            sweep_curve("extremal_N6", 6, [(0.5, 7.0 / 384.0, 12.0 / 7.0), (1.0, 7.0 / 6.0, 12.0 / 7.0)]),
            RecordCurve(
                as_curve_name("delta_l4"),
                CurveKind.Modulus,
                "t,value\n0.5,0.25\n1.0,0.0\n",
            ),
        ],
        wall_clock=wall_clock(started, started + datetime.timedelta(seconds=3)),
    )


def test_config_from_json_defaults() -> "None":
    config = ExperimentConfig.from_json({"command": "extremal", "params": {"N": 6}})
    assert config.command == Command.Extremal
    assert config.param("N") == 6
    assert config.param("t0", [1.0]) == [1.0]
    assert config.sampler == SamplerConfig()
    assert config.tolerance_profile == ToleranceProfile.Default
    assert config.scale == 1.0


@pytest.mark.parametrize(
    ["tolerance", "scale"],
    [
        ({"profile": "strict"}, 0.1),
        ({"profile": "strict", "scale": 3.0}, 3.0),
        ({"scale": 2}, 2.0),
    ],
)
def test_config_tolerance_scale(tolerance: "dict", scale: "float") -> "None":
    config = ExperimentConfig.from_json(
        {"command": "verify", "params": {}, "tolerance": tolerance}
    )
    assert config.scale == pytest.approx(scale)


@pytest.mark.parametrize(
    "doc",
    [
        {"command": "nonsense", "params": {}},
        {"command": "extremal"},
        {"command": "extremal", "params": {}, "extra": 1},
        {"command": "moduli", "params": {}, "sampler": {"samples": 0}},
    ],
)
def test_config_validation_errors(doc: "dict") -> "None":
    with pytest.raises(ExperimentConfigException) as excinfo:
        ExperimentConfig.from_json(doc)
    assert len(excinfo.value.errors) > 0


def test_record_id_is_content_addressed() -> "None":
    a = ExperimentConfig(Command.Extremal, {"N": 6, "t0": [1.0]})
    b = ExperimentConfig(Command.Extremal, {"t0": [1.0], "N": 6, "T": None})
    c = ExperimentConfig(Command.Extremal, {"N": 6, "t0": [1.0]}, SamplerConfig(seed=7))
    assert a.record_id == b.record_id
    assert a.record_id != c.record_id
    assert len(a.record_id) == 16
    assert all(ch in "0123456789abcdef" for ch in a.record_id)
    assert ExperimentConfig.from_json(a.to_json()).record_id == a.record_id


def test_config_from_file(tmp_path) -> "None":
    path = tmp_path / "exp.yaml"
    path.write_text(
        "command: asymptotic\nparams:\n  space: 'lp:4'\n  t: [0.5, 1.0]\nsampler:\n  seed: 5\n",
        encoding="utf-8",
    )
    config = ExperimentConfig.from_file(str(path))
    assert config.command == Command.Asymptotic
    assert config.param("t") == [0.5, 1.0]
    assert config.sampler.seed == 5


@pytest.mark.parametrize(
    "content",
    ["command: [unclosed\n", "- just\n- a list\n"],
)
def test_config_from_bad_file(tmp_path, content: "str") -> "None":
    path = tmp_path / "bad.yaml"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ExperimentConfigException):
        ExperimentConfig.from_file(str(path))


def test_config_from_missing_file(tmp_path) -> "None":
    with pytest.raises(ExperimentConfigException):
        ExperimentConfig.from_file(str(tmp_path / "missing.yaml"))


def test_record_json() -> "None":
    record = _record(ExperimentConfig(Command.Extremal, {"N": 6}), passed=False)
    doc = record.to_json()
    assert set(doc) == {
        "record_id",
        "config",
        "toolkit_version",
        "results",
        "assertions",
        "passed",
        "curves",
        "wall_clock",
    }
    assert doc["passed"] is False
    assert record.failed[0].name == "q matches"
    assert doc["curves"]["extremal_N6"] == {
        "kind": "sweep",
        "file": "curves/extremal_N6.csv",
        "degree": 6,
    }
    assert "degree" not in doc["curves"]["delta_l4"]
    assert doc["wall_clock"]["elapsed_seconds"] == 3.0


def test_persist_appends(tmp_path) -> "None":
    store = RecordStore(str(tmp_path))
    config = ExperimentConfig(Command.Extremal, {"N": 6})
    first = store.persist(_record(config))
    second = store.persist(_record(config))
    record_dir = os.path.join(store.runs_dir, config.record_id)
    assert first == os.path.join(record_dir, "record.json")
    assert second == os.path.join(record_dir, "record-1.json")
    assert os.path.exists(os.path.join(record_dir, "config.json"))
    assert os.path.exists(os.path.join(record_dir, "curves", "extremal_N6.csv"))

    with open(os.path.join(record_dir, "config.json"), encoding="utf-8") as cH:
        snapshot = json.load(cH)
    assert ExperimentConfig.from_json(snapshot).record_id == config.record_id

    with open(os.path.join(record_dir, "curves", "extremal_N6.csv"), encoding="utf-8") as cH:
        assert cH.readline().strip() == "t0,q,K"


def test_resolve_and_load(tmp_path) -> "None":
    store = RecordStore(str(tmp_path))
    config = ExperimentConfig(Command.Extremal, {"N": 6})
    store.persist(_record(config, passed=False))
    store.persist(_record(config, passed=True))
    by_id = store.resolve(config.record_id)
    assert store.resolve(by_id) == by_id
    record_dir, doc = store.load(config.record_id)
    assert record_dir == by_id
    assert doc["passed"] is True
    assert doc["record_id"] == config.record_id


def test_unknown_record(tmp_path) -> "None":
    store = RecordStore(str(tmp_path))
    with pytest.raises(UnknownRecordException):
        store.resolve("0123456789abcdef")


def test_export_csv(tmp_path) -> "None":
    store = RecordStore(str(tmp_path))
    config = ExperimentConfig(Command.Extremal, {"N": 6})
    store.persist(_record(config))
    written = export_plots(store, config.record_id)
    assert sorted(os.path.basename(p) for p in written) == [
        "delta_l4.csv",
        "extremal_N6.csv",
    ]
    sweep = next(p for p in written if p.endswith("extremal_N6.csv"))
    with open(sweep, encoding="utf-8") as pH:
        lines = pH.read().splitlines()
    assert lines[0] == "t0,q,q_normalized,K,log_t0,log_q"
    cells = [float(v) for v in lines[1].split(",")]
    assert cells[2] == pytest.approx(7.0 / 6.0)
    assert cells[4] == pytest.approx(math.log(0.5))

    modulus = next(p for p in written if p.endswith("delta_l4.csv"))
    with open(modulus, encoding="utf-8") as pH:
        lines = pH.read().splitlines()
    assert lines[0] == "t,value,log_t,log_value"
    assert lines[2].split(",")[-1] == "nan"


def test_export_json(tmp_path) -> "None":
    store = RecordStore(str(tmp_path))
    config = ExperimentConfig(Command.Extremal, {"N": 6})
    store.persist(_record(config))
    written = export_plots(store, config.record_id, ExportFormat.JSON)
    sweep = next(p for p in written if p.endswith("extremal_N6.json"))
    with open(sweep, encoding="utf-8") as pH:
        doc = json.load(pH)
    assert doc["name"] == "extremal_N6"
    assert doc["kind"] == "sweep"
    assert doc["columns"]["t0"] == [0.5, 1.0]
    assert doc["columns"]["q_normalized"] == pytest.approx([7.0 / 6.0, 7.0 / 6.0])
