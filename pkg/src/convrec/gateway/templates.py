"""Prompt templates: `{{placeholder}}` bodies plus a manifest-backed registry.

Every prompt sent anywhere in the system is rendered from a named template in
a registry; nothing assembles prompt bodies inline.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import TemplateError

_PLACEHOLDER = re.compile(r"\{\{([a-zA-Z0-9_.]+)\}\}")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER.findall(self.body))


def render(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute every placeholder exactly; reject missing or extra bindings.

    Substitution is single-pass, so placeholder-like text inside binding
    values is never re-expanded.
    """
    needed = template.placeholders
    missing = sorted(needed - bindings.keys())
    if missing:
        raise TemplateError(f"template {template.id!r} missing bindings for: {', '.join(missing)}")
    extra = sorted(bindings.keys() - needed)
    if extra:
        raise TemplateError(f"template {template.id!r} got unknown bindings: {', '.join(extra)}")
    return _PLACEHOLDER.sub(lambda m: str(bindings[m.group(1)]), template.body)


class TemplateRegistry:
    """Loads and serves the named templates listed in a manifest."""

    def __init__(self, templates: dict[str, PromptTemplate], declared: dict[str, frozenset[str]]):
        self._templates = templates
        for tid, template in templates.items():
            found = template.placeholders
            if found != declared[tid]:
                raise TemplateError(
                    f"template {tid!r}: manifest declares {sorted(declared[tid])} but body uses {sorted(found)}"
                )

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._templates

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._templates))

    def get(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise TemplateError(f"unknown template id {template_id!r}") from None

    def render(self, template_id: str, bindings: Mapping[str, str]) -> str:
        return render(self.get(template_id), bindings)

    @classmethod
    def _from_entries(cls, entries: list[dict], read_body) -> "TemplateRegistry":
        templates: dict[str, PromptTemplate] = {}
        declared: dict[str, frozenset[str]] = {}
        for entry in entries:
            tid = entry["id"]
            if tid in templates:
                raise TemplateError(f"duplicate template id {tid!r} in manifest")
            templates[tid] = PromptTemplate(id=tid, body=read_body(entry["path"]))
            declared[tid] = frozenset(entry["placeholders"])
        return cls(templates, declared)

    @classmethod
    def builtin(cls) -> "TemplateRegistry":
        """The package's shipped templates."""
        root = resources.files(__package__) / "templates"
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
        return cls._from_entries(manifest["templates"], lambda p: (root / p).read_text(encoding="utf-8"))

    @classmethod
    def from_manifest(cls, manifest_path: str | Path) -> "TemplateRegistry":
        """Load an external template set (manifest paths are manifest-relative)."""
        path = Path(manifest_path)
        manifest = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent
        return cls._from_entries(manifest["templates"], lambda p: (base / p).read_text(encoding="utf-8"))
