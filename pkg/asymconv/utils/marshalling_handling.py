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

from functools import partial
import collections.abc
import enum
import math
from typing import (
    TYPE_CHECKING,
)

import numpy

if TYPE_CHECKING:
    from typing import (
        Any,
        Iterable,
    )


def _marshall_float(value: "float") -> "Any":
    # JSON has no representation for these
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def marshall_namedtuple(obj: "Any") -> "Any":
    """
    This method takes any atomic value, list, dictionary, numpy array
    or namedtuple, and recursively it tries translating namedtuples
    into dictionaries and numpy values into plain Python ones
    """

    def recurse_m(x: "Iterable[Any]") -> "Iterable[Any]":
        return map(marshall_namedtuple, x)

    obj_is = partial(isinstance, obj)
    if hasattr(obj, "_marshall"):
        return marshall_namedtuple(obj._marshall())
    elif obj_is(enum.Enum):
        return {
            "_enum": obj.__class__.__name__,
            "value": obj.value,
        }
    elif obj_is(tuple) and hasattr(obj, "_fields"):  # namedtuple
        fields = zip(obj._fields, recurse_m(obj))
        class_name = obj.__class__.__name__
        return dict(fields, **{"_type": class_name})
    elif obj_is(numpy.ndarray):
        return marshall_namedtuple(obj.tolist())
    elif obj_is(numpy.generic):
        return marshall_namedtuple(obj.item())
    elif obj_is(float):
        return _marshall_float(obj)
    elif obj_is((collections.abc.Mapping, dict)):
        return {str(key): marshall_namedtuple(val) for key, val in obj.items()}
    elif obj_is(collections.abc.Iterable) and not obj_is(str):
        return list(recurse_m(obj))
    else:
        return obj

