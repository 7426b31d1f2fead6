"""Text embeddings: a pluggable external provider plus a deterministic
signed feature-hash embedder so the whole pipeline runs offline.

The builtin embedder hashes unigrams and bigrams into 384 signed bins
with a fixed-key BLAKE2b hash, which makes vectors reproducible across
runs and platforms. All vectors are unit-norm; empty text maps to the
canonical basis vector e_0 rather than the zero vector.
"""

import hashlib
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, ProviderShapeError, ProviderUnavailable

DIM = 384

# Fixed key makes token hashes stable everywhere; never derive from
# Python's salted hash().
_HASH_KEY = b"lexhybrid-embed-v1"
_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class EmbedderProvider(str, Enum):
    EXTERNAL = "external"
    BUILTIN_HASH = "builtin_hash"


@dataclass(frozen=True)
class EmbedderConfig:
    provider: EmbedderProvider = EmbedderProvider.BUILTIN_HASH
    endpoint: str | None = None
    timeout_ms: int = 10_000
    batch_size: int = 32

    def __post_init__(self):
        if self.provider is EmbedderProvider.EXTERNAL and not self.endpoint:
            raise ValueError("external embedder requires an endpoint")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumeric boundaries."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def _stable_hash(term: str) -> int:
    digest = hashlib.blake2b(term.encode("utf-8"), digest_size=8, key=_HASH_KEY).digest()
    return int.from_bytes(digest, "big")


def canonical_unit_vector() -> np.ndarray:
    v = np.zeros(DIM, dtype=np.float64)
    v[0] = 1.0
    return v


def builtin_hash_embed(text: str) -> np.ndarray:
    """Signed feature hashing of unigrams and bigrams into 384 bins."""
    tokens = tokenize(text)
    if not tokens:
        return canonical_unit_vector()
    terms = list(tokens)
    terms.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    v = np.zeros(DIM, dtype=np.float64)
    for term in terms:
        h = _stable_hash(term)
        bin_index = h % DIM
        sign = 1.0 if (h >> 63) & 1 else -1.0
        v[bin_index] += sign
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return canonical_unit_vector()
    return v / norm


def normalize_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (DIM,):
        raise DimensionMismatch(f"expected {DIM} dims, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return canonical_unit_vector()
    return v / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of unit-norm vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


class Embedder:
    """Embeds text via the configured provider, re-normalizing output.

    ``transport`` is the HTTP POST function used for the external path;
    injectable so tests can run without a network.
    """

    def __init__(self, cfg: EmbedderConfig | None = None, transport=None):
        self.cfg = cfg or EmbedderConfig()
        if transport is None:
            from .providers import post_json

            transport = post_json
        self._transport = transport

    def embed_text(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        if self.cfg.provider is EmbedderProvider.BUILTIN_HASH:
            return [builtin_hash_embed(t) for t in texts]
        vectors: list[np.ndarray] = []
        for start in range(0, len(texts), self.cfg.batch_size):
            batch = texts[start: start + self.cfg.batch_size]
            payload = self._call_external(batch)
            if len(payload) != len(batch):
                raise ProviderShapeError(
                    f"provider returned {len(payload)} vectors for {len(batch)} texts"
                )
            for row in payload:
                if len(row) != DIM:
                    raise ProviderShapeError(f"provider returned {len(row)}-dim vector")
                vectors.append(normalize_vector(row))
        return vectors

    def _call_external(self, batch: list[str]) -> list[list[float]]:
        request = {"texts": batch}
        last_error: Exception | None = None
        for _ in range(2):  # one retry
            try:
                response = self._transport(
                    self.cfg.endpoint, request, timeout_ms=self.cfg.timeout_ms
                )
                return response["vectors"]
            except (KeyError, TypeError) as exc:
                raise ProviderShapeError(f"malformed embedder response: {exc}") from exc
            except ProviderUnavailable as exc:
                last_error = exc
        raise ProviderUnavailable(str(last_error))
