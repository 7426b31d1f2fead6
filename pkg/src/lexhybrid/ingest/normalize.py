"""Text normalization applied to every source document before segmentation.

Strips markdown markup, transliterates a fixed table of typographic
characters to ASCII, drops any remaining non-ASCII, and collapses
whitespace. The transliteration table is fixed so normalization is
reproducible byte-for-byte across platforms.
"""

import re

# Typographic characters mapped to ASCII. Em dashes act as clause
# separators, so they become a space rather than a hyphen; en dashes
# mark ranges and keep a hyphen.
TRANSLITERATION_TABLE = {
    "\u2018": "'",   # left single quote
    "\u2019": "'",   # right single quote
    "\u201a": "'",   # single low quote
    "\u201c": '"',   # left double quote
    "\u201d": '"',   # right double quote
    "\u201e": '"',   # double low quote
    "\u2013": "-",   # en dash
    "\u2014": " ",   # em dash
    "\u2015": " ",   # horizontal bar
    "\u00a0": " ",   # non-breaking space
    "\u2026": "...",  # ellipsis
    "\u00b7": "-",   # middle dot
}

_MD_LINK = re.compile(r"\[([^\]]*)\]\([^)]*\)")
_MD_HEADING = re.compile(r"^\s{0,3}#{1,6}\s*", re.MULTILINE)
# Underscore emphasis only when delimited at word boundaries, so
# snake_case identifiers survive.
_MD_UNDERSCORE_BOLD = re.compile(r"(?<!\w)__([^_\n]+)__(?!\w)")
_MD_UNDERSCORE = re.compile(r"(?<!\w)_([^_\n]+)_(?!\w)")
_ESCAPED_MD = re.compile(r"\\([*_`#\[\]()])")
_WHITESPACE = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """Return cleaned ASCII text with single-space word separation.

    Empty input yields empty output. The function is idempotent.
    """
    if not raw:
        return ""
    text = _ESCAPED_MD.sub(r"\1", raw)
    text = _MD_LINK.sub(r"\1", text)
    text = _MD_HEADING.sub("", text)
    text = _MD_UNDERSCORE_BOLD.sub(r"\1", text)
    text = _MD_UNDERSCORE.sub(r"\1", text)
    # Asterisks and backticks never carry meaning in legal prose.
    text = text.replace("*", "").replace("`", "")
    for src, dst in TRANSLITERATION_TABLE.items():
        text = text.replace(src, dst)
    text = text.encode("ascii", errors="ignore").decode("ascii")
    text = _WHITESPACE.sub(" ", text)
    return text.strip()
