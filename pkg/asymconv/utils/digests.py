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

import hashlib
import json
from typing import (
    cast,
    TYPE_CHECKING,
)

if TYPE_CHECKING:
    from typing import (
        Any,
        Callable,
        NewType,
    )

    from typing_extensions import (
        TypeAlias,
    )

    Fingerprint = NewType("Fingerprint", str)

    FingerprintMethod: TypeAlias = Callable[[str, bytes], Fingerprint]


DEFAULT_DIGEST_ALGORITHM = "sha256"
# Number of characters of the hex digest used as record id
RECORD_ID_LENGTH = 16


def hexDigest(digestAlgorithm: "str", digest: "bytes") -> "Fingerprint":
    return cast("Fingerprint", digest.hex())


def canonical_json(obj: "Any") -> "str":
    """
    The serialization hashed by ComputeDigestFromObject
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def ComputeDigestFromObject(
    obj: "Any",
    digestAlgorithm: "str" = DEFAULT_DIGEST_ALGORITHM,
    repMethod: "FingerprintMethod" = hexDigest,
) -> "Fingerprint":
    """
    Accessory method used to compute the digest of a JSON serializable object
    """
    h = hashlib.new(digestAlgorithm)
    h.update(canonical_json(obj).encode("utf-8"))

    return repMethod(digestAlgorithm, h.digest())


def config_record_id(config: "Any") -> "str":
    """
    Directory name of the records of a configuration: the hex digest
    of its canonical serialization, shortened
    """
    return ComputeDigestFromObject(config)[:RECORD_ID_LENGTH]
