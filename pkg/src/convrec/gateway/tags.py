"""Parsing for the line-oriented structured-output contracts.

Agents append machine-readable lines (`RECOMMEND: <title>`, `SELECTED: <act>`,
`ACCEPT: yes`, `VERDICT: A`) after their prose; reflection output uses section
headers (`WHY_FAILED:`, `EXPERIENCE:`, ...). Parsers are lenient about
whitespace and markdown bullets, strict about everything else.
"""

from __future__ import annotations

import re

_LINE_PREFIX = r"^\s*(?:[-*]\s*)?\**"


def _tag_re(tag: str) -> re.Pattern[str]:
    return re.compile(
        _LINE_PREFIX + re.escape(tag) + r"\**\s*:\s*\**\s*(?P<value>.*)$", re.IGNORECASE | re.MULTILINE
    )


def extract_tagged_line(text: str, tag: str) -> list[str]:
    """All values of `TAG: value` lines, trimmed, in order of appearance.

    An empty list signals absence; callers decide how severe that is.
    """
    return [m.group("value").strip() for m in _tag_re(tag).finditer(text)]


def has_tag(text: str, tag: str) -> bool:
    """True if any `TAG: ...` line is present (even with empty value)."""
    return _tag_re(tag).search(text) is not None


def strip_tagged_lines(text: str, tags: tuple[str, ...]) -> str:
    """The user-visible prose with the given tagged lines removed."""
    lines = text.splitlines()
    patterns = [_tag_re(tag) for tag in tags]
    kept = [line for line in lines if not any(p.match(line) for p in patterns)]
    return "\n".join(kept).strip()


def parse_sections(text: str, headers: tuple[str, ...]) -> dict[str, str]:
    """Split text into named sections.

    A section starts at a line whose head matches `HEADER:` (case-insensitive)
    and runs until the next known header. Inline content after the colon
    belongs to the section. Missing headers are simply absent from the result.
    """
    header_res = {h: _tag_re(h) for h in headers}
    current: str | None = None
    chunks: dict[str, list[str]] = {}
    for line in text.splitlines():
        matched = False
        for name, pattern in header_res.items():
            m = pattern.match(line)
            if m:
                current = name
                chunks.setdefault(name, [])
                inline = m.group("value").strip()
                if inline:
                    chunks[name].append(inline)
                matched = True
                break
        if not matched and current is not None:
            chunks[current].append(line.rstrip())
    return {name: "\n".join(lines).strip() for name, lines in chunks.items() if "\n".join(lines).strip()}


def parse_bullets(text: str) -> list[str]:
    """Values of `- item` / `* item` lines, trimmed, in order."""
    out = []
    for line in text.splitlines():
        m = re.match(r"^\s*[-*]\s+(?P<value>.+)$", line)
        if m:
            out.append(m.group("value").strip())
    return out
