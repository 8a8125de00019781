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

from __future__ import absolute_import

import datetime
import json
import os
import tempfile

from typing import (
    TYPE_CHECKING,
)

import numpy

if TYPE_CHECKING:
    from typing import (
        Any,
        Mapping,
        Sequence,
        Union,
    )

    from jsonschema.exceptions import ValidationError

import jsonschema.validators

from ..common import AbstractAsymConvException


class DatetimeEncoder(json.JSONEncoder):
    def default(self, obj: "Any") -> "Any":
        if isinstance(obj, datetime.datetime):
            return obj.isoformat()
        if isinstance(obj, numpy.ndarray):
            return obj.tolist()
        if isinstance(obj, numpy.generic):
            return obj.item()
        # Let the base class default method raise the TypeError
        return super().default(obj)


class ConfigValidationException(AbstractAsymConvException):
    pass


SCHEMAS_REL_DIR = "schemas"


def config_validate(
    configToValidate: "Union[Mapping[str, Any], Sequence[Mapping[str, Any]]]",
    relSchemaFile: "str",
) -> "Sequence[ValidationError]":
    # Locating the schemas directory, where all the schemas should be placed
    schemaFile = os.path.join(
        os.path.dirname(__file__), "..", SCHEMAS_REL_DIR, relSchemaFile
    )

    try:
        with open(schemaFile, mode="r", encoding="utf-8") as sF:
            schema = json.load(sF)

        jv = jsonschema.validators.validator_for(schema)(schema)
        return list(jv.iter_errors(instance=configToValidate))
    except Exception as e:
        raise ConfigValidationException(
            f"FATAL ERROR: corrupted schema {relSchemaFile}. Reason: {e}"
        )


def atomic_write_text(path: "str", content: "str") -> "None":
    """
    Writes the content into a temporary file in the same directory,
    and then it renames it, so readers never see partial files
    """
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(
        dir=dirname, prefix="." + os.path.basename(path) + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, mode="w", encoding="utf-8", newline="") as tH:
            tH.write(content)
        os.replace(tmp_path, path)
    except:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def atomic_write_json(path: "str", obj: "Any") -> "None":
    atomic_write_text(
        path, json.dumps(obj, cls=DatetimeEncoder, indent=4, sort_keys=True) + "\n"
    )
