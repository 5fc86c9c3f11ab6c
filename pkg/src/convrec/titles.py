"""Title normalization used everywhere item titles are compared.

MovieLens titles carry trailing year suffixes ("Heat (1995)") and rotated
articles ("Lion King, The") that simulators and models omit, so every
comparison goes through :func:`normalize_title`.
"""

from __future__ import annotations

import re

_YEAR_SUFFIX = re.compile(r"\s*\(\d{4}\)\s*$")
_TRAILING_ARTICLE = re.compile(r"^(?P<rest>.+?),\s*(?P<article>The|A|An|La|Le|Les|El|Il)$", re.IGNORECASE)
_NON_WORD = re.compile(r"[\W_]+")


def normalize_title(title: str) -> str:
    """Canonical comparison form: year stripped, article unrotated, case-folded,
    punctuation removed, whitespace collapsed."""
    text = _YEAR_SUFFIX.sub("", title.strip())
    m = _TRAILING_ARTICLE.match(text)
    if m:
        text = f"{m.group('article')} {m.group('rest')}"
    text = text.casefold()
    text = _NON_WORD.sub(" ", text)
    return " ".join(text.split())


def titles_equal(a: str, b: str) -> bool:
    return normalize_title(a) == normalize_title(b)


def title_tokens(title: str) -> tuple[str, ...]:
    return tuple(normalize_title(title).split())


def contains_title(text: str, title: str) -> bool:
    """True if the title appears in the text as a contiguous token run.

    Both sides are normalized, so "the Lion King!" matches
    "Lion King, The (1994)". Empty titles never match.
    """
    needle = title_tokens(title)
    if not needle:
        return False
    haystack = tuple(normalize_title(text).split())
    n = len(needle)
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


def _token_pattern(tokens: tuple[str, ...]) -> re.Pattern[str]:
    # Tokens may be separated by punctuation/whitespace in the surface text.
    body = r"[\W_]+".join(re.escape(tok) for tok in tokens)
    return re.compile(rf"\b{body}\b", re.IGNORECASE)


def redact_title(text: str, title: str, replacement: str) -> str:
    """Replace every surface occurrence of the title (any rendering) in text."""
    base = _YEAR_SUFFIX.sub("", title.strip())
    variants = {title_tokens(title), title_tokens(base)}
    # Also cover the un-rotated raw order ("lion king the").
    raw_tokens = tuple(tok for tok in _NON_WORD.sub(" ", base.casefold()).split() if tok)
    if raw_tokens:
        variants.add(raw_tokens)
    out = text
    for tokens in variants:
        if tokens:
            out = _token_pattern(tokens).sub(replacement, out)
    return out
