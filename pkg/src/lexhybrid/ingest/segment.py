"""Header-pattern segmentation for constitution and case documents.

Normalization collapses newlines before segmentation, so header
patterns match at word boundaries anywhere in the text rather than at
literal line starts.
"""

import re

from ..errors import NoHeadersFound

ARTICLE_HEADER = re.compile(r"\bArticle\s+(\d+[A-Z]?)\s*[.:—-]", re.IGNORECASE)
CASE_HEADER = re.compile(r"\b(FACTS|ISSUES|HELD)\s*[:.]", re.IGNORECASE)


def segment_constitution(body: str) -> list[tuple[str, str]]:
    """Split constitution text into per-article segments.

    Text before the first header becomes a "Preamble" segment. Raises
    NoHeadersFound when no article header matches, which signals input
    in the wrong format.
    """
    matches = list(ARTICLE_HEADER.finditer(body))
    if not matches:
        raise NoHeadersFound("no article headers found in constitution text")
    segments: list[tuple[str, str]] = []
    preamble = body[: matches[0].start()].strip()
    if preamble:
        segments.append(("Preamble", preamble))
    for i, m in enumerate(matches):
        label = f"Article {m.group(1).upper()}"
        end = matches[i + 1].start() if i + 1 < len(matches) else len(body)
        text = body[m.end(): end].strip()
        segments.append((label, text))
    return segments


def segment_case_document(body: str) -> list[tuple[str, str]]:
    """Split case text at Facts/Issues/Held headers.

    Text before the first header is labeled "Header"; a case with no
    recognized headers falls back to one "Body" segment.
    """
    matches = list(CASE_HEADER.finditer(body))
    if not matches:
        return [("Body", body.strip())] if body.strip() else []
    segments: list[tuple[str, str]] = []
    head = body[: matches[0].start()].strip()
    if head:
        segments.append(("Header", head))
    for i, m in enumerate(matches):
        label = m.group(1).capitalize()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(body)
        text = body[m.end(): end].strip()
        if text:
            segments.append((label, text))
    return segments
