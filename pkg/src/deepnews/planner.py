"""Hierarchical writing blueprints: lede, pacing, atomic blocks, windows.

Planning turns a bound schema into an outline: one section per schema step
(merged or split to fit the configured section-count bounds), each section
decomposed into single-function atomic blocks, adjacent sections forced to
alternate between high and low information density, and every section given
a budgeted local context window holding only the evidence relevant to it.

All planning is pure and deterministic: identical inputs produce an
identical outline, byte-for-byte after serialization.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from statistics import quantiles
from typing import Iterable, Mapping, Sequence

from .corpus import AtomicFact, ContextBlock, CorpusBundle, FactKind, direction_sign
from .errors import (
    ConfigError,
    DecompositionError,
    DomainError,
    NotFoundError,
    PlanningError,
    ScopingError,
)
from .schema import Schema, SlotBindings
from .textutil import word_tokens


class LedeId(str, Enum):
    CONTRADICTION_PARADOX = "ContradictionParadox"
    DRAMATIC_OPENING = "DramaticOpening"
    DATA_SHOCK = "DataShock"
    SCENE_CUT_IN = "SceneCutIn"
    QUESTION_HOOK = "QuestionHook"
    TIMELINE_COUNTDOWN = "TimelineCountdown"


@dataclass(frozen=True)
class LedeBlueprint:
    id: LedeId
    directive: str


#: The six registered lede blueprints. Automatic selection only ever picks
#: the first three (contradiction, data shock, dramatic fallback); the rest
#: are reachable through PlanConfig.lede_override.
LEDE_BLUEPRINTS: dict[LedeId, LedeBlueprint] = {
    LedeId.CONTRADICTION_PARADOX: LedeBlueprint(
        LedeId.CONTRADICTION_PARADOX,
        "Open on the sharpest contradiction between two verified numbers "
        "pointing in opposite directions for the same player.",
    ),
    LedeId.DRAMATIC_OPENING: LedeBlueprint(
        LedeId.DRAMATIC_OPENING,
        "Open mid-action on the most consequential moment of the story, "
        "before any framing or background.",
    ),
    LedeId.DATA_SHOCK: LedeBlueprint(
        LedeId.DATA_SHOCK,
        "Open with the single most disproportionate number in the evidence "
        "and let its scale do the work.",
    ),
    LedeId.SCENE_CUT_IN: LedeBlueprint(
        LedeId.SCENE_CUT_IN,
        "Open inside a concrete scene: one place, one moment, one actor, "
        "rendered from sourced detail.",
    ),
    LedeId.QUESTION_HOOK: LedeBlueprint(
        LedeId.QUESTION_HOOK,
        "Open with the uncomfortable question the evidence forces, then "
        "withhold the answer for a beat.",
    ),
    LedeId.TIMELINE_COUNTDOWN: LedeBlueprint(
        LedeId.TIMELINE_COUNTDOWN,
        "Open on the clock: order the verified dates into a countdown "
        "toward the decisive event.",
    ),
}


class BlockType(str, Enum):
    DATA_ANCHOR = "DataAnchor"
    NARRATIVE_CUT_IN = "NarrativeCutIn"
    DEEP_INSIGHT = "DeepInsight"
    CONFLICT = "Conflict"


class DensityClass(str, Enum):
    HIGH = "HighDensity"
    LOW = "LowDensity"


@dataclass(frozen=True)
class AtomicBlockSpec:
    block_type: BlockType
    directive: str
    evidence_refs: tuple[str, ...]
    target_chars: int

    def __post_init__(self):
        if self.target_chars <= 0:
            raise DomainError("target_chars must be positive")


@dataclass(frozen=True)
class ContextWindow:
    section_ref: str
    facts: tuple[AtomicFact, ...]
    blocks: tuple[ContextBlock, ...]
    char_budget: int

    def item_ids(self) -> set[str]:
        return {f.id for f in self.facts} | {b.id for b in self.blocks}

    def total_chars(self) -> int:
        return sum(_item_chars(f) for f in self.facts) + sum(
            _item_chars(b) for b in self.blocks
        )


@dataclass(frozen=True)
class Section:
    title: str
    density_class: DensityClass
    blocks: tuple[AtomicBlockSpec, ...]
    window: ContextWindow | None = None
    keywords: tuple[str, ...] = ()
    slot_names: tuple[str, ...] = ()
    pacing_coerced: bool = False

    def evidence_refs(self) -> list[str]:
        refs: list[str] = []
        for spec in self.blocks:
            for ref in spec.evidence_refs:
                if ref not in refs:
                    refs.append(ref)
        return refs


@dataclass(frozen=True)
class Outline:
    topic: str
    schema_id: str
    lede: LedeBlueprint
    sections: tuple[Section, ...]
    coercions: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlanConfig:
    min_sections: int = 3
    max_sections: int = 8
    char_budget_per_section: int = 6000
    relevance_threshold: int = 1
    data_shock_percentile: float = 95.0
    block_target_chars: int = 600
    top_k_evidence: int = 3
    lede_override: LedeId | None = None

    def __post_init__(self):
        if self.min_sections < 1 or self.min_sections > self.max_sections:
            raise DomainError("section bounds must satisfy 1 <= min <= max")
        if self.char_budget_per_section <= 0:
            raise DomainError("char_budget_per_section must be positive")
        if self.relevance_threshold < 0:
            raise DomainError("relevance_threshold must be non-negative")
        if not 0 < self.data_shock_percentile < 100:
            raise DomainError("data_shock_percentile must be in (0, 100)")
        if self.block_target_chars <= 0:
            raise DomainError("block_target_chars must be positive")
        if self.top_k_evidence < 1:
            raise DomainError("top_k_evidence must be >= 1")


# --------------------------------------------------------------------------
# Trend reading for lede selection and conflict blocks

_POSITIVE_METRIC_TERMS = frozenset({
    "profit", "profits", "revenue", "revenues", "sales", "margin", "margins",
    "earnings", "income", "orders", "growth", "share", "shipments", "cash",
    "营收", "利润", "收入", "毛利", "净利", "销量", "订单", "市值", "现金",
})
_NEGATIVE_METRIC_TERMS = frozenset({
    "layoff", "layoffs", "loss", "losses", "debt", "debts", "default",
    "defaults", "churn", "complaints", "attrition", "writedown", "writedowns",
    "inventory",
    "裁员", "亏损", "负债", "违约", "损失", "投诉", "库存",
})


def fact_trend(fact: AtomicFact) -> int:
    """Signed trend of a quantity fact: direction of motion times the
    valence of the metric it moves (layoffs rising is a negative trend)."""
    direction = direction_sign(fact.predicate)
    if direction == 0:
        return 0
    tokens = word_tokens(fact.subject)
    if tokens & _NEGATIVE_METRIC_TERMS:
        return -direction
    return direction


def _contradiction_pair(facts: Sequence[AtomicFact]) -> tuple[str, str] | None:
    quantities = [f for f in facts if f.kind is FactKind.QUANTITY]
    trends = [fact_trend(f) for f in quantities]
    tokens = [word_tokens(f.subject) for f in quantities]
    for i in range(len(quantities)):
        if trends[i] == 0:
            continue
        for j in range(i + 1, len(quantities)):
            if trends[j] == -trends[i] and tokens[i] & tokens[j]:
                return quantities[i].id, quantities[j].id
    return None


def _percentile(values: Sequence[float], pct: float) -> float:
    if len(values) == 1:
        return values[0]
    cuts = quantiles(sorted(values), n=100, method="inclusive")
    idx = min(99, max(1, round(pct))) - 1
    return cuts[idx]


def select_lede(
    sections: Sequence[Section],
    bundle: CorpusBundle,
    config: PlanConfig | None = None,
) -> LedeBlueprint:
    """Pick a lede blueprint with a fixed precedence.

    Contradiction wins when two quantity facts about the same subject carry
    opposite-sign trends; data shock wins when the largest magnitude
    strictly exceeds the configured percentile of all magnitudes; dramatic
    opening is the fallback. The remaining blueprints are selectable only
    via ``PlanConfig.lede_override``.
    """
    config = config or PlanConfig()
    if config.lede_override is not None:
        return LEDE_BLUEPRINTS[config.lede_override]
    if _contradiction_pair(bundle.facts):
        return LEDE_BLUEPRINTS[LedeId.CONTRADICTION_PARADOX]
    magnitudes = [
        abs(f.value.number)
        for f in bundle.facts
        if f.kind is FactKind.QUANTITY and f.value.number is not None
    ]
    if len(magnitudes) >= 2:
        threshold = _percentile(magnitudes, config.data_shock_percentile)
        if max(magnitudes) > threshold:
            return LEDE_BLUEPRINTS[LedeId.DATA_SHOCK]
    return LEDE_BLUEPRINTS[LedeId.DRAMATIC_OPENING]


# --------------------------------------------------------------------------
# Block decomposition

_HIGH_ORDER = {
    BlockType.DATA_ANCHOR: 0,
    BlockType.DEEP_INSIGHT: 1,
    BlockType.CONFLICT: 2,
    BlockType.NARRATIVE_CUT_IN: 3,
}
_LOW_ORDER = {
    BlockType.NARRATIVE_CUT_IN: 0,
    BlockType.CONFLICT: 1,
    BlockType.DATA_ANCHOR: 2,
    BlockType.DEEP_INSIGHT: 3,
}


def _majority_high(specs: Sequence[AtomicBlockSpec]) -> bool:
    dense = sum(
        1
        for s in specs
        if s.block_type in (BlockType.DATA_ANCHOR, BlockType.DEEP_INSIGHT)
    )
    return dense * 2 > len(specs)


def decompose_blocks(
    title: str,
    evidence: Sequence[AtomicFact | ContextBlock],
    config: PlanConfig | None = None,
) -> tuple[AtomicBlockSpec, ...]:
    """Decompose a section's evidence into single-function block specs.

    Quantity (and accompanying date) facts become a data anchor; context
    blocks become a deep insight; quotes, entities and stray dates become a
    narrative cut-in; an opposing quantity pair or a multi-party entity set
    adds a conflict block. High-density sections open with the data anchor
    or deep insight, low-density sections with the narrative cut-in.
    """
    config = config or PlanConfig()
    if not evidence:
        raise DecompositionError(f"section {title!r} has no bound evidence")
    facts = [e for e in evidence if isinstance(e, AtomicFact)]
    gists = [e for e in evidence if isinstance(e, ContextBlock)]
    qty = [f for f in facts if f.kind is FactKind.QUANTITY]
    dates = [f for f in facts if f.kind is FactKind.DATE]
    quotes = [f for f in facts if f.kind is FactKind.QUOTE]
    entities = [f for f in facts if f.kind is FactKind.ENTITY]
    target = config.block_target_chars

    specs: list[AtomicBlockSpec] = []
    if qty:
        specs.append(
            AtomicBlockSpec(
                BlockType.DATA_ANCHOR,
                f"Anchor {title} in its verified numbers; every figure verbatim "
                "from the evidence, no rounding, no invention.",
                tuple(f.id for f in qty + dates),
                target,
            )
        )
    if gists:
        specs.append(
            AtomicBlockSpec(
                BlockType.DEEP_INSIGHT,
                f"Deduce the structural logic behind {title} from the context "
                "gists; attribute causality to evidence, not intuition.",
                tuple(b.id for b in gists),
                target,
            )
        )
    narrative = quotes + entities + (dates if not qty else [])
    if narrative:
        specs.append(
            AtomicBlockSpec(
                BlockType.NARRATIVE_CUT_IN,
                f"Render one tangible scene inside {title}: actors, sourced "
                "speech, concrete detail.",
                tuple(f.id for f in narrative),
                target,
            )
        )
    conflict_refs = _conflict_refs(qty, entities)
    if conflict_refs:
        specs.append(
            AtomicBlockSpec(
                BlockType.CONFLICT,
                f"Stage the opposing interests inside {title}; let the two "
                "sides' own evidence collide.",
                conflict_refs,
                target,
            )
        )

    high = _majority_high(specs)
    if not high and not any(s.block_type is BlockType.NARRATIVE_CUT_IN for s in specs):
        # A low-density section must open narratively; repurpose the
        # conflict material as the cut-in.
        specs = [
            replace(s, block_type=BlockType.NARRATIVE_CUT_IN)
            if s.block_type is BlockType.CONFLICT
            else s
            for s in specs
        ]
        high = _majority_high(specs)
    order = _HIGH_ORDER if high else _LOW_ORDER
    specs.sort(key=lambda s: order[s.block_type])
    return tuple(specs)


def _conflict_refs(
    qty: Sequence[AtomicFact], entities: Sequence[AtomicFact]
) -> tuple[str, ...]:
    trends = [fact_trend(f) for f in qty]
    for i in range(len(qty)):
        if trends[i] == 0:
            continue
        for j in range(i + 1, len(qty)):
            if trends[j] == -trends[i]:
                return (qty[i].id, qty[j].id)
    if len(entities) >= 2:
        return tuple(f.id for f in entities[:3])
    return ()


def _density_of(specs: Sequence[AtomicBlockSpec]) -> DensityClass:
    return DensityClass.HIGH if _majority_high(specs) else DensityClass.LOW


# --------------------------------------------------------------------------
# Pacing

def _alternating(classes: Sequence[DensityClass]) -> bool:
    return all(classes[i] != classes[i + 1] for i in range(len(classes) - 1))


def _coerce_section(section: Section, target: DensityClass) -> Section:
    """Rewrite a section's blocks so its density matches the target class."""
    if target is DensityClass.LOW:
        new_type = BlockType.NARRATIVE_CUT_IN
        convert_from = (BlockType.DATA_ANCHOR, BlockType.DEEP_INSIGHT)
        note = " Pacing directive: render this passage at low density."
    else:
        new_type = BlockType.DEEP_INSIGHT
        convert_from = (BlockType.NARRATIVE_CUT_IN, BlockType.CONFLICT)
        note = " Pacing directive: render this passage at high density."
    blocks = tuple(
        replace(s, block_type=new_type, directive=s.directive + note)
        if s.block_type in convert_from
        else s
        for s in section.blocks
    )
    order = _LOW_ORDER if target is DensityClass.LOW else _HIGH_ORDER
    blocks = tuple(sorted(blocks, key=lambda s: order[s.block_type]))
    return replace(
        section,
        blocks=blocks,
        density_class=_density_of(blocks),
        pacing_coerced=True,
    )


def _pattern(n: int, start: DensityClass) -> list[DensityClass]:
    other = DensityClass.LOW if start is DensityClass.HIGH else DensityClass.HIGH
    return [start if i % 2 == 0 else other for i in range(n)]


def _stable_min_displacement(
    classes: Sequence[DensityClass], pattern: Sequence[DensityClass]
) -> list[int]:
    """Source index per output slot: keep every index already in place,
    fill remaining slots in original order within each class."""
    result: list[int | None] = [None] * len(classes)
    for cls in (DensityClass.HIGH, DensityClass.LOW):
        sources = [i for i, c in enumerate(classes) if c is cls]
        slots = [j for j, c in enumerate(pattern) if c is cls]
        fixed = set(sources) & set(slots)
        for idx in fixed:
            result[idx] = idx
        rest_sources = [i for i in sources if i not in fixed]
        rest_slots = [j for j in slots if j not in fixed]
        for src, slot in zip(rest_sources, rest_slots):
            result[slot] = src
    return [i for i in result if i is not None]


def enforce_pacing(sections: Sequence[Section]) -> list[Section]:
    """Make adjacent sections alternate between density classes.

    When a reordering achieving the alternation exists, apply the one
    moving the fewest sections (stable within each class); when the class
    counts make alternation impossible, coerce out-of-pattern sections to
    the alternating pattern anchored on the first section's class, marking
    each coerced section.
    """
    if not sections:
        raise DomainError("sections must be nonempty")
    classes = [s.density_class for s in sections]
    if _alternating(classes):
        return list(sections)
    n = len(sections)
    counts = Counter(classes)
    candidates = []
    for start in (DensityClass.HIGH, DensityClass.LOW):
        pattern = _pattern(n, start)
        if Counter(pattern) == counts:
            perm = _stable_min_displacement(classes, pattern)
            cost = sum(1 for j, i in enumerate(perm) if i != j)
            anchored = 0 if pattern[0] is classes[0] else 1
            high_first = 0 if start is DensityClass.HIGH else 1
            candidates.append((cost, anchored, high_first, perm))
    if candidates:
        candidates.sort(key=lambda c: c[:3])
        perm = candidates[0][3]
        return [sections[i] for i in perm]
    target = _pattern(n, classes[0])
    return [
        s if s.density_class is target[i] else _coerce_section(s, target[i])
        for i, s in enumerate(sections)
    ]


# --------------------------------------------------------------------------
# Context windows

def _item_chars(item: AtomicFact | ContextBlock) -> int:
    if isinstance(item, ContextBlock):
        return item.char_count
    return len(item.text_repr())


def scope_contexts(
    outline: Outline,
    bundle: CorpusBundle,
    char_budget_per_section: int,
    relevance_threshold: int = 1,
) -> Outline:
    """Populate a budgeted local context window for every section.

    Evidence referenced by a section's block specs is placed first (its
    relevance is checked against the threshold; failing or overflowing the
    budget is a scoping error). Remaining budget is filled with the other
    bundle items relevant to the section, highest keyword overlap first.
    Windows may overlap across sections.
    """
    if char_budget_per_section <= 0:
        raise DomainError("char_budget_per_section must be positive")
    index = bundle.evidence_index()
    sections = []
    for section in outline.sections:
        keywords = set(section.keywords)
        must_ids = section.evidence_refs()
        chosen: list[AtomicFact | ContextBlock] = []
        used = 0
        for ref in must_ids:
            item = index.get(ref)
            if item is None:
                raise ScopingError(
                    f"section {section.title!r} references unknown evidence {ref!r}"
                )
            score = len(keywords & word_tokens(item.text_repr()))
            if score < relevance_threshold:
                raise ScopingError(
                    f"evidence {ref!r} scores below the relevance threshold for "
                    f"section {section.title!r} and fits no window"
                )
            used += _item_chars(item)
            if used > char_budget_per_section:
                raise ScopingError(
                    f"evidence referenced by section {section.title!r} exceeds "
                    f"its window budget of {char_budget_per_section} chars"
                )
            chosen.append(item)
        extras = []
        for item_id, item in index.items():
            if item_id in must_ids:
                continue
            score = len(keywords & word_tokens(item.text_repr()))
            if score >= relevance_threshold and score > 0:
                extras.append((-score, item_id, item))
        extras.sort(key=lambda e: e[:2])
        for _, _, item in extras:
            cost = _item_chars(item)
            if used + cost > char_budget_per_section:
                break
            used += cost
            chosen.append(item)
        window = ContextWindow(
            section_ref=section.title,
            facts=tuple(i for i in chosen if isinstance(i, AtomicFact)),
            blocks=tuple(i for i in chosen if isinstance(i, ContextBlock)),
            char_budget=char_budget_per_section,
        )
        sections.append(replace(section, window=window))
    return replace(outline, sections=tuple(sections))


# --------------------------------------------------------------------------
# Outline planning

@dataclass
class _StepGroup:
    title: str
    slot_names: list[str]
    evidence_ids: list[str]
    keywords: set[str]
    slot_count: int


def _merge_groups(a: _StepGroup, b: _StepGroup) -> _StepGroup:
    merged_evidence = list(a.evidence_ids)
    merged_evidence += [e for e in b.evidence_ids if e not in merged_evidence]
    return _StepGroup(
        title=f"{a.title} + {b.title}",
        slot_names=a.slot_names + b.slot_names,
        evidence_ids=merged_evidence,
        keywords=a.keywords | b.keywords,
        slot_count=a.slot_count + b.slot_count,
    )


def plan_outline(
    schema: Schema,
    bindings: SlotBindings,
    bundle: CorpusBundle,
    config: PlanConfig | None = None,
    topic: str | None = None,
) -> Outline:
    """Translate a bound schema into a full writing blueprint.

    One section per schema step, in step order; steps are merged (adjacent
    pair with the fewest slots first) down to ``max_sections`` and split
    (largest evidence set first) up to ``min_sections``. Raises
    :class:`PlanningError` when required slots are unbound and
    :class:`ConfigError` when the section bounds cannot be met.
    """
    config = config or PlanConfig()
    missing = bindings.unbound_required(schema)
    if missing:
        raise PlanningError(
            "unbound required slot(s): " + ", ".join(sorted(missing))
        )
    index = bundle.evidence_index()

    groups: list[_StepGroup] = []
    for step in schema.steps:
        evidence: list[str] = []
        keywords = word_tokens(step.name)
        for slot in step.slots:
            keywords |= schema.slot_keywords(slot.name)
            for ref in bindings.refs_for(slot.name):
                if ref not in evidence:
                    evidence.append(ref)
        groups.append(
            _StepGroup(
                title=step.name,
                slot_names=[s.name for s in step.slots],
                evidence_ids=evidence,
                keywords=keywords,
                slot_count=len(step.slots),
            )
        )

    if not any(g.evidence_ids for g in groups):
        raise PlanningError("no bound evidence anywhere in the schema; cannot plan")

    # Steps without any bound evidence cannot stand alone as sections.
    merged: list[_StepGroup] = []
    for group in groups:
        if group.evidence_ids or not merged:
            merged.append(group)
        else:
            merged[-1] = _merge_groups(merged[-1], group)
    if merged and not merged[0].evidence_ids:
        if len(merged) == 1:
            raise PlanningError("no bound evidence anywhere in the schema; cannot plan")
        merged[0] = _merge_groups(merged[0], merged.pop(1))
    groups = merged

    while len(groups) > config.max_sections:
        sums = [
            groups[i].slot_count + groups[i + 1].slot_count
            for i in range(len(groups) - 1)
        ]
        k = sums.index(min(sums))
        groups[k : k + 2] = [_merge_groups(groups[k], groups[k + 1])]

    while len(groups) < config.min_sections:
        sizes = [len(g.evidence_ids) for g in groups]
        k = sizes.index(max(sizes))
        if sizes[k] < 2:
            raise ConfigError(
                f"fewer than {config.min_sections} plannable sections: "
                "not enough evidence to split further"
            )
        g = groups[k]
        half = (len(g.evidence_ids) + 1) // 2
        first = _StepGroup(
            title=f"{g.title} (i)",
            slot_names=list(g.slot_names),
            evidence_ids=g.evidence_ids[:half],
            keywords=set(g.keywords),
            slot_count=g.slot_count,
        )
        second = _StepGroup(
            title=f"{g.title} (ii)",
            slot_names=list(g.slot_names),
            evidence_ids=g.evidence_ids[half:],
            keywords=set(g.keywords),
            slot_count=g.slot_count,
        )
        groups[k : k + 1] = [first, second]

    sections = []
    for group in groups:
        evidence = [index[r] for r in group.evidence_ids]
        specs = decompose_blocks(group.title, evidence, config)
        sections.append(
            Section(
                title=group.title,
                density_class=_density_of(specs),
                blocks=specs,
                keywords=tuple(sorted(group.keywords)),
                slot_names=tuple(group.slot_names),
            )
        )

    sections = enforce_pacing(sections)
    lede = select_lede(sections, bundle, config)
    outline = Outline(
        topic=topic or schema.title,
        schema_id=schema.id,
        lede=lede,
        sections=tuple(sections),
        coercions=tuple(s.title for s in sections if s.pacing_coerced),
    )
    outline = scope_contexts(
        outline, bundle, config.char_budget_per_section, config.relevance_threshold
    )
    _validate_outline(outline, schema, bindings, bundle, config)
    return outline


def _validate_outline(
    outline: Outline,
    schema: Schema,
    bindings: SlotBindings,
    bundle: CorpusBundle,
    config: PlanConfig,
) -> None:
    classes = [s.density_class for s in outline.sections]
    if not _alternating(classes):
        raise PlanningError("internal: pacing invariant violated")
    index = bundle.evidence_index()
    window_union: set[str] = set()
    for section in outline.sections:
        if section.window is None:
            raise PlanningError("internal: section emitted without a window")
        ids = section.window.item_ids()
        window_union |= ids
        for spec in section.blocks:
            if not set(spec.evidence_refs) <= ids:
                raise PlanningError(
                    f"internal: window containment violated in {section.title!r}"
                )
            if spec.block_type is BlockType.DATA_ANCHOR and not any(
                isinstance(index[r], AtomicFact)
                and index[r].kind is FactKind.QUANTITY
                for r in spec.evidence_refs
            ):
                raise PlanningError("internal: data anchor without a quantity fact")
        if section.window.total_chars() > section.window.char_budget:
            raise PlanningError("internal: window budget exceeded")
    for _, slot in schema.all_slots():
        if slot.required:
            for ref in bindings.refs_for(slot.name):
                if ref not in window_union:
                    raise PlanningError(
                        f"internal: required slot {slot.name!r} evidence {ref!r} "
                        "missing from every window"
                    )


# --------------------------------------------------------------------------
# Serialization

def outline_to_dict(outline: Outline) -> dict:
    return {
        "topic": outline.topic,
        "schema_id": outline.schema_id,
        "lede": {"id": outline.lede.id.value, "directive": outline.lede.directive},
        "coercions": list(outline.coercions),
        "sections": [
            {
                "title": s.title,
                "density_class": s.density_class.value,
                "keywords": list(s.keywords),
                "slot_names": list(s.slot_names),
                "pacing_coerced": s.pacing_coerced,
                "blocks": [
                    {
                        "block_type": b.block_type.value,
                        "directive": b.directive,
                        "evidence_refs": list(b.evidence_refs),
                        "target_chars": b.target_chars,
                    }
                    for b in s.blocks
                ],
                "window": {
                    "section_ref": s.window.section_ref,
                    "fact_ids": [f.id for f in s.window.facts],
                    "block_ids": [b.id for b in s.window.blocks],
                    "char_budget": s.window.char_budget,
                }
                if s.window
                else None,
            }
            for s in outline.sections
        ],
    }


def outline_from_dict(payload: Mapping, bundle: CorpusBundle) -> Outline:
    index = bundle.evidence_index()

    def resolve_window(w: Mapping | None) -> ContextWindow | None:
        if w is None:
            return None
        try:
            facts = tuple(index[i] for i in w["fact_ids"])
            blocks = tuple(index[i] for i in w["block_ids"])
        except KeyError as exc:
            raise NotFoundError(f"window references unknown evidence {exc}") from exc
        return ContextWindow(
            section_ref=w["section_ref"],
            facts=facts,
            blocks=blocks,
            char_budget=w["char_budget"],
        )

    sections = tuple(
        Section(
            title=s["title"],
            density_class=DensityClass(s["density_class"]),
            blocks=tuple(
                AtomicBlockSpec(
                    block_type=BlockType(b["block_type"]),
                    directive=b["directive"],
                    evidence_refs=tuple(b["evidence_refs"]),
                    target_chars=b["target_chars"],
                )
                for b in s["blocks"]
            ),
            window=resolve_window(s.get("window")),
            keywords=tuple(s.get("keywords", ())),
            slot_names=tuple(s.get("slot_names", ())),
            pacing_coerced=s.get("pacing_coerced", False),
        )
        for s in payload["sections"]
    )
    lede_id = LedeId(payload["lede"]["id"])
    return Outline(
        topic=payload["topic"],
        schema_id=payload["schema_id"],
        lede=LEDE_BLUEPRINTS[lede_id],
        sections=sections,
        coercions=tuple(payload.get("coercions", ())),
    )
