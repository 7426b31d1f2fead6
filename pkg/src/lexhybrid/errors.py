"""Exception types shared across the package."""


class LexHybridError(Exception):
    """Base class for all package errors."""


# --- ingestion ---------------------------------------------------------------


class NoHeadersFound(LexHybridError):
    """Raised when a document expected to contain headers has none."""


class SchemaError(LexHybridError):
    """A tabular input is missing a required column."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing required column: {column}")


class RowError(LexHybridError):
    """A single tabular row is unusable; carries the zero-based row index."""

    def __init__(self, row_index: int, reason: str):
        self.row_index = row_index
        self.reason = reason
        super().__init__(f"row {row_index}: {reason}")


# --- embedding / providers ----------------------------------------------------


class ProviderUnavailable(LexHybridError):
    """An external provider endpoint is unreachable or timed out."""


class ProviderShapeError(LexHybridError):
    """An external provider returned a payload of the wrong shape."""


class DimensionMismatch(LexHybridError):
    """Vector dimensionality does not match the expected 384."""


class ContextOverflow(LexHybridError):
    """A rendered prompt exceeds the generation context budget."""


# --- vector index -------------------------------------------------------------


class NoCollections(LexHybridError):
    """hybrid search invoked with an empty collection list."""


class FormatVersionMismatch(LexHybridError):
    """A persisted payload was written by an incompatible format version."""

    def __init__(self, found: int, supported: int):
        self.found = found
        self.supported = supported
        super().__init__(f"format version {found} not supported (expected {supported})")


class CorruptPayload(LexHybridError):
    """A persisted payload is truncated or fails its checksum."""


# --- graph --------------------------------------------------------------------


class EmptyKey(LexHybridError):
    """A graph node key is empty after canonicalization."""


class MissingEndpoint(LexHybridError):
    """An edge references a node that is not in the store."""


class SchemaViolation(LexHybridError):
    """An edge's endpoint labels are illegal for its type."""


class NodeNotFound(LexHybridError):
    """A queried node does not exist in the store."""


# --- extraction ---------------------------------------------------------------


class MalformedExtraction(LexHybridError):
    """Extractor output stayed unparseable after the configured retries."""


class MalformedJudgment(LexHybridError):
    """Judge output stayed unparseable after the configured retries."""


# --- orchestrator / evaluation ------------------------------------------------


class EmptyQuery(LexHybridError):
    """The query string is empty or whitespace."""


class AllSourcesFailed(LexHybridError):
    """Every selected evidence source errored for one query."""


class NoGroundTruth(LexHybridError):
    """Retrieval metrics requested without any ground-truth contexts."""


class EmptyRetrieval(LexHybridError):
    """Coherence/diversity requested over an empty retrieval set."""
