"""Prompt rendering: a four-part template with {{slot}} placeholders.

The section template has the parts [System Role Definition],
[Context Injection], [Adversarial Constraint] and [Output Requirement].
Window facts are serialized verbatim as "- subject predicate value" lines;
gists of context blocks referenced by the spec follow as "* gist" lines.
Rendering is deterministic and an unresolved slot raises, never blanks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import TemplateError
from ..planner import AtomicBlockSpec, ContextWindow

_SLOT_RE = re.compile(r"\{\{(\w+)\}\}")
_PART_RE = re.compile(r"^\[([^\]\n]+)\]\s*$", re.MULTILINE)

CONSTRAINT_PART = "Adversarial Constraint"
FEEDBACK_HEADER = "[Regeneration Feedback]"


@dataclass(frozen=True)
class PromptTemplate:
    """An ordered list of (part name, part body) with {{slot}} placeholders."""

    parts: tuple[tuple[str, str], ...]

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        matches = list(_PART_RE.finditer(text))
        if not matches:
            return cls(parts=(("", text),))
        parts = []
        for i, m in enumerate(matches):
            end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
            parts.append((m.group(1), text[m.end() : end].strip("\n")))
        return cls(parts=tuple(parts))

    def render(self, slots: Mapping[str, str], skip_parts: Sequence[str] = ()) -> str:
        rendered = []
        for name, body in self.parts:
            if name in skip_parts:
                continue
            def substitute(match: re.Match) -> str:
                key = match.group(1)
                if key not in slots:
                    raise TemplateError(f"unresolved template slot {key!r}")
                return slots[key]

            rendered.append(f"[{name}]\n{_SLOT_RE.sub(substitute, body)}")
        return "\n\n".join(rendered) + "\n"


def default_section_template() -> PromptTemplate:
    from ..assets_api import template_text

    return PromptTemplate.from_text(template_text("section_prompt.txt"))


def serialize_facts(window: ContextWindow, spec: AtomicBlockSpec) -> str:
    """Fact lines (spec-referenced first, then the rest of the window) plus
    gist lines for the context blocks the spec references."""
    ref_set = set(spec.evidence_refs)
    ordered = [f for f in window.facts if f.id in ref_set]
    ordered += [f for f in window.facts if f.id not in ref_set]
    lines = [f"- {f.text_repr()}" for f in ordered]
    lines += [f"* {b.gist}" for b in window.blocks if b.id in ref_set]
    return "\n" + "\n".join(lines) if lines else " (no facts in window)"


def render_prompt(
    spec: AtomicBlockSpec,
    window: ContextWindow,
    schema_id: str,
    tactic_ids: Sequence[str],
    style: str,
    forbidden_connectors: Sequence[str] = (),
    template: PromptTemplate | None = None,
) -> str:
    """Render the generation prompt for one atomic block.

    With an empty tactic list the adversarial constraint part is omitted
    entirely. Identical inputs produce byte-identical prompts.
    """
    template = template or default_section_template()
    slots = {
        "Style_Parameter": style,
        "Schema_ID": schema_id,
        "Micro_Facts_List": serialize_facts(window, spec),
        "Tactic_ID": ", ".join(tactic_ids),
        "Forbidden_Connectors_List": ", ".join(forbidden_connectors),
        "Section_Name": window.section_ref,
        "Atomic_Block_Type": spec.block_type.value,
    }
    skip = () if tactic_ids else (CONSTRAINT_PART,)
    prompt = template.render(slots, skip_parts=skip)
    return prompt + f"\nBlock directive: {spec.directive}\n"


def feedback_suffix(violations: Sequence) -> str:
    """Violation feedback appended to a regeneration prompt."""
    lines = [FEEDBACK_HEADER, "The previous draft violated these constraints; fix them:"]
    for v in violations:
        lines.append(f"- {v.tactic} at sentence {v.location}: {v.detail}")
    return "\n" + "\n".join(lines) + "\n"
