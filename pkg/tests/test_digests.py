import pytest

import hashlib

from asymconv.utils.digests import (
    RECORD_ID_LENGTH,
    ComputeDigestFromObject,
    canonical_json,
    config_record_id,
)


def test_digest_is_hex_by_default() -> "None":
    doc = {"command": "extremal", "params": {"N": 6}}
    expected = hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()
    assert ComputeDigestFromObject(doc) == expected


def test_digest_ignores_key_order() -> "None":
    assert ComputeDigestFromObject({"a": 1, "b": [1, 2]}) == ComputeDigestFromObject(
        {"b": [1, 2], "a": 1}
    )


@pytest.mark.parametrize(
    "doc",
    [{}, {"command": "verify", "params": {}}, {"x": [0.5, -1.0], "y": None}],
)
def test_record_id_shape(doc: "dict") -> "None":
    record_id = config_record_id(doc)
    assert len(record_id) == RECORD_ID_LENGTH
    assert all(ch in "0123456789abcdef" for ch in record_id)
    assert ComputeDigestFromObject(doc).startswith(record_id)
