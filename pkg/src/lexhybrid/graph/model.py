"""Node labels, edge types, the endpoint schema, and key canonicalization.

Canonical keys make idempotent merges meaningful: free-text identities
(case titles, judges, courts) become lowercase hyphen slugs, while
penal sections and constitution articles use the structured forms
"IPC:302" and "ART:21A".
"""

import re
from enum import Enum


class NodeLabel(str, Enum):
    CASE = "Case"
    COURT = "Court"
    JUDGE = "Judge"
    IPC_SECTION = "IPCSection"
    ARTICLE = "Article"
    LEGAL_ACT = "LegalAct"
    LEGAL_PRINCIPLE = "LegalPrinciple"
    PARTY = "Party"
    OFFENSE = "Offense"
    PUNISHMENT = "Punishment"
    CITATION = "Citation"


class EdgeType(str, Enum):
    HEARD_IN = "HEARD_IN"
    DECIDED_BY = "DECIDED_BY"
    GOVERNED_BY = "GOVERNED_BY"
    REFERS_TO = "REFERS_TO"
    CITES = "CITES"
    APPLIES_TO = "APPLIES_TO"


# Legal endpoint labels per edge type: (source label, allowed target labels).
EDGE_SCHEMA: dict[EdgeType, tuple[NodeLabel, frozenset[NodeLabel]]] = {
    EdgeType.HEARD_IN: (NodeLabel.CASE, frozenset({NodeLabel.COURT})),
    EdgeType.DECIDED_BY: (NodeLabel.CASE, frozenset({NodeLabel.JUDGE})),
    EdgeType.GOVERNED_BY: (NodeLabel.CASE, frozenset({NodeLabel.IPC_SECTION})),
    EdgeType.REFERS_TO: (NodeLabel.CASE, frozenset({NodeLabel.ARTICLE, NodeLabel.LEGAL_ACT})),
    EdgeType.CITES: (NodeLabel.CASE, frozenset({NodeLabel.CASE})),
    EdgeType.APPLIES_TO: (
        NodeLabel.IPC_SECTION,
        frozenset({NodeLabel.OFFENSE, NodeLabel.PUNISHMENT}),
    ),
}

_NON_SLUG = re.compile(r"[^0-9a-z\s-]")
_SPACES = re.compile(r"\s+")
_SECTION_REF = re.compile(r"^(\d+)([A-Za-z]?)$")


def canonical_key(text: str) -> str:
    """Slug form: lowercase, punctuation dropped, whitespace to hyphens."""
    slug = _NON_SLUG.sub("", text.lower().strip())
    slug = _SPACES.sub("-", slug.strip())
    slug = re.sub(r"-{2,}", "-", slug)
    return slug.strip("-")


def _section_key(prefix: str, ref: str) -> str:
    m = _SECTION_REF.match(ref.strip())
    if not m:
        return f"{prefix}:{canonical_key(ref)}"
    number, letter = m.groups()
    return f"{prefix}:{number}{letter.upper()}"


def ipc_key(section: str) -> str:
    """"302" or "304a" -> "IPC:302" / "IPC:304A"."""
    return _section_key("IPC", section)


def article_key(number: str) -> str:
    """"14" or "21a" -> "ART:14" / "ART:21A"."""
    return _section_key("ART", number)


def case_key(title: str) -> str:
    """Case title slug, e.g. "Kesavananda v. State" -> "kesavananda-v-state"."""
    return canonical_key(title)
