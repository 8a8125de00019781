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

import argparse
import enum
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

if TYPE_CHECKING:
    from typing import (
        Any,
        Mapping,
        List,
        NewType,
    )

    from typing_extensions import (
        Final,
    )

    # Content hash of an experiment configuration, used as record id
    RecordId = NewType("RecordId", str)
    # Name of a curve inside an experiment record
    CurveName = NewType("CurveName", str)


class AbstractAsymConvException(Exception):
    pass


class ArgTypeMixin(enum.Enum):
    @classmethod
    def argtype(cls, s: "str") -> "enum.Enum":
        try:
            return cls(s)
        except:
            raise argparse.ArgumentTypeError(f"{s!r} is not a valid {cls.__name__}")

    def __str__(self) -> "str":
        return str(self.value)


class StrDocEnum(str, ArgTypeMixin):
    description: str

    def __new__(cls, value: "Any", description: "str" = "") -> "StrDocEnum":
        obj = str.__new__(cls, value)
        obj._value_ = value
        obj.description = description

        return obj

    def __str__(self) -> "str":
        return str(self.value)


class ArgsDefaultWithRawHelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    # Conditionally treat descriptions as raw
    def _split_lines(self, text: "str", width: "int") -> "List[str]":
        """
        Formats the given text by splitting the lines at '\n'
        when it is prefixed by 'raw|'.
        """
        if text.startswith("raw|"):
            return text[4:].splitlines()
        return super()._split_lines(text, width)


class BoundDirection(StrDocEnum):
    """
    Which side of the true value an empirical estimate certifies
    """

    Upper = ("upper", "Empirical infimum, an upper bound of the true value")
    Lower = ("lower", "Empirical supremum, a lower bound of the true value")
    Exact = ("exact", "Closed form, or exact up to rounding")


class ToleranceProfile(StrDocEnum):
    Default = ("default", "Tolerances as documented")
    Strict = ("strict", "Every tolerance shrunk by a factor of ten")


TOLERANCE_PROFILE_SCALE: "Final[Mapping[ToleranceProfile, float]]" = {
    ToleranceProfile.Default: 1.0,
    ToleranceProfile.Strict: 0.1,
}

DEFAULT_SAMPLES: "Final[int]" = 4096
DEFAULT_SEED: "Final[int]" = 42
DEFAULT_REFINE_ITERS: "Final[int]" = 200
DEFAULT_REFINE_TOP: "Final[int]" = 2
DEFAULT_RADIUS: "Final[float]" = 2.0
DEFAULT_TAIL_WIDTH: "Final[int]" = 32
DEFAULT_TAIL_SAMPLES: "Final[int]" = 64


class SamplerConfig(NamedTuple):
    """
    samples: number of low-discrepancy samples drawn on the first stage
    seed: seed of the scrambled sequences and of any pseudo-random draw
    refine_iters: line searches spent by the coordinate polish
    refine_top: how many of the best samples are polished
    radius: half side of the box where unconstrained points are drawn
    tail_width: support width of the sampled tail directions
    tail_samples: number of sampled tail directions (before symmetrization)
    """

    samples: "int" = DEFAULT_SAMPLES
    seed: "int" = DEFAULT_SEED
    refine_iters: "int" = DEFAULT_REFINE_ITERS
    refine_top: "int" = DEFAULT_REFINE_TOP
    radius: "float" = DEFAULT_RADIUS
    tail_width: "int" = DEFAULT_TAIL_WIDTH
    tail_samples: "int" = DEFAULT_TAIL_SAMPLES

    def with_seed(self, seed: "int") -> "SamplerConfig":
        return self._replace(seed=seed)

    def metadata(self) -> "Mapping[str, Any]":
        return {
            "seed": self.seed,
            "samples": self.samples,
            "refine_iters": self.refine_iters,
            "refine_top": self.refine_top,
        }


DEFAULT_SAMPLER: "Final[SamplerConfig]" = SamplerConfig()


def as_record_id(value: "str") -> "RecordId":
    return cast("RecordId", value)


def as_curve_name(value: "str") -> "CurveName":
    return cast("CurveName", value)
