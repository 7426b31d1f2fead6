"""Versioned, checksummed persistence for vector collections.

Layout: a canonical-JSON envelope {"format_version", "sha256", "body"}
where the checksum covers the canonical encoding of the body. Floats
are serialized with Python's shortest round-trip repr, so vectors
restore exactly and saved bytes are deterministic.
"""

import hashlib
import json

from ..errors import CorruptPayload, FormatVersionMismatch
from .hnsw import VectorCollection

FORMAT_VERSION = 1


def _canonical(data) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode(
        "utf-8"
    )


def save_collection(col: VectorCollection) -> bytes:
    body = col.to_state()
    body_bytes = _canonical(body)
    envelope = {
        "format_version": FORMAT_VERSION,
        "sha256": hashlib.sha256(body_bytes).hexdigest(),
        "body": body,
    }
    return _canonical(envelope)


def load_collection(data: bytes) -> VectorCollection:
    try:
        envelope = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(f"unreadable collection payload: {exc}") from exc
    if not isinstance(envelope, dict) or "body" not in envelope:
        raise CorruptPayload("collection payload missing body")
    version = envelope.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(found=version, supported=FORMAT_VERSION)
    body_bytes = _canonical(envelope["body"])
    if hashlib.sha256(body_bytes).hexdigest() != envelope.get("sha256"):
        raise CorruptPayload("collection checksum mismatch")
    return VectorCollection.from_state(envelope["body"])
