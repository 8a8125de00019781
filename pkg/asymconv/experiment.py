#!/usr/bin/env python
# -*- coding: utf-8 -*-

# SPDX-License-Identifier: Apache-2.0
# Copyright 2024 The AsymConv developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Experiment configurations, the records their runs produce, and the
content-addressed store where records and curves are persisted::

    <out>/runs/<record id>/config.json
    <out>/runs/<record id>/record.json, record-1.json, ...
    <out>/runs/<record id>/curves/<name>.csv
    <out>/runs/<record id>/plots/<name>.{csv,json}
"""

from __future__ import absolute_import

import csv
import datetime
import inspect
import io
import json
import logging
import math
import os
import re
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import yaml

if TYPE_CHECKING:
    from typing import (
        Any,
        List,
        Mapping,
        MutableMapping,
        Optional,
        Sequence,
        Tuple,
    )

    from typing_extensions import (
        Final,
    )

    from .common import (
        CurveName,
        RecordId,
    )

# We have preference for the C based loader and dumper, but the code
# should fallback to default implementations when C ones are not present
try:
    from yaml import CLoader as YAMLLoader
except ImportError:
    from yaml import Loader as YAMLLoader  # type: ignore[assignment]

from .common import (
    AbstractAsymConvException,
    DEFAULT_SAMPLER,
    SamplerConfig,
    StrDocEnum,
    TOLERANCE_PROFILE_SCALE,
    ToleranceProfile,
    as_curve_name,
    as_record_id,
)
from .utils.digests import config_record_id
from .utils.marshalling_handling import marshall_namedtuple
from .utils.misc import (
    atomic_write_json,
    atomic_write_text,
    config_validate,
)

logger = logging.getLogger(__name__)

EXPERIMENT_CONFIG_SCHEMA: "Final[str]" = "experiment-config.json"
RUNS_REL_DIR: "Final[str]" = "runs"
CURVES_REL_DIR: "Final[str]" = "curves"
PLOTS_REL_DIR: "Final[str]" = "plots"
CONFIG_FILENAME: "Final[str]" = "config.json"
RECORD_FILENAME: "Final[str]" = "record.json"
RECORD_FILENAME_RE: "Final[re.Pattern[str]]" = re.compile(r"^record(?:-([0-9]+))?\.json$")


class ExperimentException(AbstractAsymConvException):
    pass


class ExperimentConfigException(ExperimentException):
    def __init__(self, message: "str", errors: "Sequence[str]" = ()):
        super().__init__(message)
        self.errors = list(errors)


class UnknownRecordException(ExperimentException):
    pass


class Command(StrDocEnum):
    Envelope = ("envelope", "Convex envelopes of 1D and 2D test functions")
    Moduli = ("moduli", "Moduli of convexity and smoothness of norms and functions")
    Asymptotic = ("asymptotic", "Asymptotic moduli on the tail model of sequence spaces")
    Extremal = ("extremal", "Extremal problem over the class C_N")
    Polynorm = ("polynorm", "Certification and checks of polynomial norms")
    Verify = ("verify", "The whole acceptance suite")


class ExportFormat(StrDocEnum):
    CSV = ("csv", "One CSV file per curve")
    JSON = ("json", "One JSON file per curve, columns as arrays")


class CurveKind(StrDocEnum):
    Modulus = ("modulus", "t,value samples of a power type modulus curve")
    Sweep = ("sweep", "t0,q,K samples of an extremal sweep")
    Grid1D = ("grid1d", "x,value samples of a 1D grid function")
    Grid2D = ("grid2d", "x,y,value samples of a 2D grid function, long format")


class ExperimentConfig(NamedTuple):
    """
    command: the subcommand to run
    params: its parameters, plain JSON values named after the command line flags
    sampler: sampler sizes and seed
    tolerance_profile: named tolerance profile
    tolerance_scale: explicit tolerance scale, overriding the profile
    """

    command: "Command"
    params: "Mapping[str, Any]"
    sampler: "SamplerConfig" = DEFAULT_SAMPLER
    tolerance_profile: "ToleranceProfile" = ToleranceProfile.Default
    tolerance_scale: "Optional[float]" = None

    @property
    def scale(self) -> "float":
        if self.tolerance_scale is not None:
            return self.tolerance_scale
        return TOLERANCE_PROFILE_SCALE[self.tolerance_profile]

    def param(self, name: "str", default: "Any" = None) -> "Any":
        value = self.params.get(name)
        return default if value is None else value

    def to_json(self) -> "Mapping[str, Any]":
        tolerance: "MutableMapping[str, Any]" = {
            "profile": self.tolerance_profile.value
        }
        if self.tolerance_scale is not None:
            tolerance["scale"] = self.tolerance_scale
        return {
            "command": self.command.value,
            "params": {k: v for k, v in self.params.items() if v is not None},
            "sampler": dict(self.sampler._asdict()),
            "tolerance": tolerance,
        }

    @classmethod
    def from_json(cls, doc: "Mapping[str, Any]") -> "ExperimentConfig":
        errors = config_validate(doc, EXPERIMENT_CONFIG_SCHEMA)
        if len(errors) > 0:
            messages = []
            for error in errors:
                message = f"{'/'.join(map(str, error.path))}: {error.message}"
                logger.error(f"Experiment config validation error: {message}")
                messages.append(message)
            raise ExperimentConfigException(
                f"Invalid experiment configuration ({len(errors)} errors)", messages
            )
        tolerance = doc.get("tolerance", {})
        scale = tolerance.get("scale")
        return cls(
            command=Command(doc["command"]),
            params=dict(doc["params"]),
            sampler=SamplerConfig(**doc.get("sampler", {})),
            tolerance_profile=ToleranceProfile(
                tolerance.get("profile", ToleranceProfile.Default.value)
            ),
            tolerance_scale=None if scale is None else float(scale),
        )

    @classmethod
    def from_file(cls, filename: "str") -> "ExperimentConfig":
        """
        JSON is a subset of YAML, so both are read with the YAML loader
        """
        try:
            with open(filename, mode="r", encoding="utf-8") as cf:
                doc = yaml.load(cf, Loader=YAMLLoader)
        except (OSError, yaml.YAMLError) as e:
            raise ExperimentConfigException(
                f"Unable to read experiment configuration {filename}: {e}"
            ) from e
        if not isinstance(doc, dict):
            raise ExperimentConfigException(
                f"Experiment configuration {filename} is not a mapping"
            )
        return cls.from_json(doc)

    @property
    def record_id(self) -> "RecordId":
        return as_record_id(config_record_id(self.to_json()))


class AssertionOutcome(NamedTuple):
    """
    name: what was asserted
    passed: whether it held
    witness: the failing sample, when there is one
    detail: computed against expected values
    """

    name: "str"
    passed: "bool"
    witness: "Any" = None
    detail: "Optional[str]" = None


class RecordCurve(NamedTuple):
    """
    A curve persisted beside a record, as CSV content
    """

    name: "CurveName"
    kind: "CurveKind"
    content: "str"
    degree: "Optional[int]" = None

    @property
    def filename(self) -> "str":
        return self.name + ".csv"

    def index_entry(self) -> "Mapping[str, Any]":
        entry: "MutableMapping[str, Any]" = {
            "kind": self.kind.value,
            "file": CURVES_REL_DIR + "/" + self.filename,
        }
        if self.degree is not None:
            entry["degree"] = self.degree
        return entry


def sweep_curve(
    name: "str", N: "int", rows: "Sequence[Tuple[float, float, float]]"
) -> "RecordCurve":
    """
    Extremal sweep over t0: one (t0, q, K) row per solved problem
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t0", "q", "K"])
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return RecordCurve(as_curve_name(name), CurveKind.Sweep, buf.getvalue(), degree=N)


class ExperimentRecord(NamedTuple):
    """
    config: the configuration snapshot
    toolkit_version: version string of the toolkit which ran it
    results: module specific results
    assertions: pass or fail of every assertion, with witnesses
    curves: curves persisted under curves/
    wall_clock: start, end and elapsed seconds, the only non reproducible block
    """

    config: "ExperimentConfig"
    toolkit_version: "str"
    results: "Mapping[str, Any]"
    assertions: "Sequence[AssertionOutcome]"
    curves: "Sequence[RecordCurve]"
    wall_clock: "Mapping[str, Any]"

    @property
    def passed(self) -> "bool":
        return all(a.passed for a in self.assertions)

    @property
    def failed(self) -> "Sequence[AssertionOutcome]":
        return [a for a in self.assertions if not a.passed]

    def to_json(self) -> "Mapping[str, Any]":
        return {
            "record_id": self.config.record_id,
            "config": self.config.to_json(),
            "toolkit_version": self.toolkit_version,
            "results": marshall_namedtuple(self.results),
            "assertions": [
                {
                    "name": a.name,
                    "passed": a.passed,
                    "witness": marshall_namedtuple(a.witness),
                    "detail": a.detail,
                }
                for a in self.assertions
            ],
            "passed": self.passed,
            "curves": {c.name: c.index_entry() for c in self.curves},
            "wall_clock": self.wall_clock,
        }


def wall_clock(
    started: "datetime.datetime", finished: "datetime.datetime"
) -> "Mapping[str, Any]":
    return {
        "started": started,
        "finished": finished,
        "elapsed_seconds": (finished - started).total_seconds(),
    }


def _record_index(filename: "str") -> "Optional[int]":
    match = RECORD_FILENAME_RE.match(filename)
    if match is None:
        return None
    return 0 if match.group(1) is None else int(match.group(1))


class RecordStore:
    """
    Append-only store of experiment records, addressed by the content
    hash of their configurations
    """

    def __init__(self, out_dir: "str"):
        self.logger = logging.getLogger(
            dict(inspect.getmembers(self))["__module__"]
            + "::"
            + self.__class__.__name__
        )
        self.out_dir = os.path.abspath(out_dir)
        self.runs_dir = os.path.join(self.out_dir, RUNS_REL_DIR)

    def record_dir(self, record_id: "RecordId") -> "str":
        return os.path.join(self.runs_dir, record_id)

    def _record_files(self, record_dir: "str") -> "List[Tuple[int, str]]":
        if not os.path.isdir(record_dir):
            return []
        found = []
        for entry in os.listdir(record_dir):
            index = _record_index(entry)
            if index is not None:
                found.append((index, os.path.join(record_dir, entry)))
        return sorted(found)

    def persist(self, record: "ExperimentRecord") -> "str":
        """
        Writes curves, the config snapshot and the record. Earlier records
        of the same configuration are kept, the new one gets the next
        free record-<n>.json name.
        """
        record_dir = self.record_dir(record.config.record_id)
        existing = self._record_files(record_dir)
        if len(existing) == 0:
            record_path = os.path.join(record_dir, RECORD_FILENAME)
        else:
            record_path = os.path.join(
                record_dir, f"record-{existing[-1][0] + 1}.json"
            )

        for curve in record.curves:
            atomic_write_text(
                os.path.join(record_dir, CURVES_REL_DIR, curve.filename),
                curve.content,
            )
        atomic_write_json(
            os.path.join(record_dir, CONFIG_FILENAME), record.config.to_json()
        )
        # Written after its curves
        atomic_write_json(record_path, record.to_json())
        self.logger.info(f"Record stored at {record_path}")
        return record_path

    def resolve(self, record_ref: "str") -> "str":
        """
        Record directory from either a path or a record id
        """
        candidates = [record_ref, self.record_dir(as_record_id(record_ref))]
        for candidate in candidates:
            if len(self._record_files(candidate)) > 0:
                return os.path.abspath(candidate)
        raise UnknownRecordException(f"Unknown experiment record {record_ref}")

    def load(self, record_ref: "str") -> "Tuple[str, Mapping[str, Any]]":
        """
        The latest record of a record directory, with that directory
        """
        record_dir = self.resolve(record_ref)
        _, record_path = self._record_files(record_dir)[-1]
        with open(record_path, mode="r", encoding="utf-8") as rH:
            return record_dir, cast("Mapping[str, Any]", json.load(rH))


def _read_columns(path: "str") -> "Tuple[List[str], List[List[float]]]":
    with open(path, mode="r", encoding="utf-8", newline="") as cH:
        reader = csv.reader(cH)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if len(row) > 0]
    return header, rows


def _safe_log(value: "float") -> "float":
    return math.log(value) if value > 0.0 else math.nan


def _plot_table(
    kind: "CurveKind", degree: "Optional[int]", header: "List[str]", rows: "List[List[float]]"
) -> "Tuple[List[str], List[List[float]]]":
    if kind == CurveKind.Modulus:
        return (
            header + ["log_" + header[0], "log_" + header[1]],
            [row + [_safe_log(row[0]), _safe_log(row[1])] for row in rows],
        )
    if kind == CurveKind.Sweep:
        if degree is None:
            raise ExperimentException("Extremal sweeps need the degree N")
        return (
            ["t0", "q", "q_normalized", "K", "log_t0", "log_q"],
            [
                [t0, q, q / t0**degree, K, _safe_log(t0), _safe_log(q)]
                for t0, q, K in rows
            ],
        )
    return header, rows


def _format_cell(value: "float") -> "str":
    return "nan" if math.isnan(value) else repr(value)


def export_plots(
    store: "RecordStore", record_ref: "str", fmt: "ExportFormat" = ExportFormat.CSV
) -> "Sequence[str]":
    """
    One file per curve of the latest record under plots/. Power type
    curves get log-log companion columns.
    """
    record_dir, record = store.load(record_ref)
    written = []
    for name, entry in sorted(record.get("curves", {}).items()):
        kind = CurveKind(entry["kind"])
        header, rows = _read_columns(os.path.join(record_dir, entry["file"]))
        columns, table = _plot_table(kind, entry.get("degree"), header, rows)
        path = os.path.join(record_dir, PLOTS_REL_DIR, f"{name}.{fmt.value}")
        if fmt == ExportFormat.CSV:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(columns)
            for row in table:
                writer.writerow([_format_cell(v) for v in row])
            atomic_write_text(path, buf.getvalue())
        else:
            atomic_write_json(
                path,
                {
                    "name": name,
                    "kind": kind.value,
                    "columns": {
                        col: [marshall_namedtuple(row[i]) for row in table]
                        for i, col in enumerate(columns)
                    },
                },
            )
        store.logger.debug(f"Exported {name} ({len(table)} rows) to {path}")
        written.append(path)
    if len(written) == 0:
        logger.warning(f"Record {record_ref} has no curves to export")
    return written
