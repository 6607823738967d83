"""Narrative schema definitions, selection, slot binding, and causal chains.

Schemas are written in a small YAML-based definition language (SDL): a
``Schema_Logic_Flow`` mapping of ordered steps, each step a list of
directives. Bracketed ``[ A | B | C ]`` lists inside a directive become
enumerated alternatives; a reserved ``Options`` entry and ``Scenario_*``
entries become step-level options. Every non-reserved directive also
declares an evidence slot. The full grammar is documented in
docs/sdl-grammar.md; serialization is canonical, so parse -> serialize ->
parse is the identity and serialized bytes are stable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .corpus import AtomicFact, ContextBlock, CorpusBundle, FactKind
from .errors import (
    ConflictError,
    CycleError,
    DomainError,
    NotFoundError,
    ParseError,
    ValidationError,
)
from .textutil import word_tokens


class SchemaCategory(str, Enum):
    S1_BLIND = "S1-BLIND"
    S2_VGAME = "S2-VGAME"
    S3_SINGLE = "S3-SINGLE"
    S4_HGAME = "S4-HGAME"
    S5_INDUS = "S5-INDUS"


#: Default complexity star-rating per category, used when a schema file
#: does not carry an explicit ``# Complexity:`` header.
CATEGORY_COMPLEXITY: dict[SchemaCategory, int] = {
    SchemaCategory.S1_BLIND: 3,
    SchemaCategory.S2_VGAME: 5,
    SchemaCategory.S3_SINGLE: 2,
    SchemaCategory.S4_HGAME: 4,
    SchemaCategory.S5_INDUS: 4,
}


class Relation(str, Enum):
    """Topic relation, mapped deterministically to a schema category."""

    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"
    SINGLE = "single"
    INDUSTRY = "industry"
    BLINDSPOT = "blindspot"


RELATION_CATEGORY: dict[Relation, SchemaCategory] = {
    Relation.VERTICAL: SchemaCategory.S2_VGAME,
    Relation.HORIZONTAL: SchemaCategory.S4_HGAME,
    Relation.SINGLE: SchemaCategory.S3_SINGLE,
    Relation.INDUSTRY: SchemaCategory.S5_INDUS,
    Relation.BLINDSPOT: SchemaCategory.S1_BLIND,
}


class EvidenceKind(str, Enum):
    QUANTITY = "quantity"
    DATE = "date"
    ENTITY = "entity"
    QUOTE = "quote"
    BLOCK = "block"


@dataclass(frozen=True)
class Directive:
    key: str
    detail: str
    alternatives: tuple[str, ...] = ()


@dataclass(frozen=True)
class SlotDecl:
    name: str
    expected_kind: EvidenceKind
    required: bool = True


@dataclass(frozen=True)
class SchemaStep:
    name: str
    directives: tuple[Directive, ...] = ()
    options: tuple[str, ...] = ()
    slots: tuple[SlotDecl, ...] = ()

    def directive_for(self, slot_name: str) -> Directive | None:
        for d in self.directives:
            if d.key == slot_name:
                return d
        return None


@dataclass(frozen=True)
class Schema:
    id: str
    category: SchemaCategory
    title: str
    complexity: int
    steps: tuple[SchemaStep, ...]

    def __post_init__(self):
        if not self.id.startswith(self.category.value):
            raise ValidationError(
                f"schema id {self.id!r} does not begin with category "
                f"{self.category.value!r}"
            )
        if not 1 <= self.complexity <= 5:
            raise ValidationError(f"schema {self.id!r}: complexity out of 1..5")
        if not self.steps:
            raise ValidationError(f"schema {self.id!r}: no steps")
        names = [s.name for slot_step in self.steps for s in slot_step.slots]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValidationError(f"schema {self.id!r}: duplicate slot name(s) {dupes}")

    def all_slots(self) -> list[tuple[SchemaStep, SlotDecl]]:
        return [(step, slot) for step in self.steps for slot in step.slots]

    def slot_keywords(self, slot_name: str) -> set[str]:
        for step in self.steps:
            directive = step.directive_for(slot_name)
            if directive is not None:
                return word_tokens(f"{directive.key} {directive.detail}")
        raise NotFoundError(f"slot {slot_name!r} not declared in schema {self.id!r}")


# --------------------------------------------------------------------------
# SDL parsing

_HEADER_ID_RE = re.compile(
    r"^#\s*Target Scenario:\s*(?P<id>[A-Z0-9][A-Z0-9-]*)\s*(?:\((?P<title>[^)]*)\))?",
    re.MULTILINE,
)
_HEADER_COMPLEXITY_RE = re.compile(r"^#\s*Complexity:\s*([0-9]+)", re.MULTILINE)
_BRACKET_ALTS_RE = re.compile(r"\[([^][|]*\|[^][]*)\]")
_OPTION_SPLIT_RE = re.compile(r"\s*(?<![0-9])[0-9]+\.\s+")
_SCENARIO_KEY_RE = re.compile(r"^Scenario[_ ]")

_RESERVED_SUBKEYS = ("Expect", "Required")


def _flatten_value(value: object) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return "[ " + " | ".join(str(v) for v in value) + " ]"
    if isinstance(value, Mapping):
        return "; ".join(f"{k}: {_flatten_value(v)}" for k, v in value.items())
    return str(value)


def _detail_of(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, Mapping):
        return "; ".join(f"{k}: {_flatten_value(v)}" for k, v in value.items())
    return _flatten_value(value)


def _alternatives_in(detail: str) -> tuple[str, ...]:
    alts: list[str] = []
    for group in _BRACKET_ALTS_RE.findall(detail):
        alts.extend(part.strip() for part in group.split("|") if part.strip())
    return tuple(alts)


def _expected_kind(key: str, detail: str) -> EvidenceKind:
    explicit = re.search(r"\bExpect:\s*([a-z]+)", detail)
    if explicit:
        try:
            return EvidenceKind(explicit.group(1))
        except ValueError:
            raise ValidationError(f"directive {key!r}: unknown Expect kind {explicit.group(1)!r}")
    if re.search(r"\bMetric:", detail) or key.startswith("Calculate"):
        return EvidenceKind.QUANTITY
    return EvidenceKind.BLOCK


def _required_flag(key: str, detail: str) -> bool:
    explicit = re.search(r"\bRequired:\s*(true|false)", detail, re.IGNORECASE)
    if explicit:
        return explicit.group(1).lower() == "true"
    # Endgame scenario entries are enumerations; evidence for them is a bonus.
    return not _SCENARIO_KEY_RE.match(key)


def _parse_options_value(value: object) -> tuple[str, ...]:
    if isinstance(value, list):
        items = [str(v).strip() for v in value if str(v).strip()]
    elif isinstance(value, str):
        items = [p.strip() for p in _OPTION_SPLIT_RE.split(value) if p.strip()]
    else:
        items = []
    if not items:
        raise ValidationError("Options entry present but empty")
    return tuple(items)


def parse_sdl(text: str) -> Schema:
    """Parse an SDL document into a :class:`Schema`.

    Step order follows document order and directive keys are preserved
    verbatim. Raises :class:`ParseError` with a line number on YAML syntax
    errors and :class:`ValidationError` on grammar violations (no steps,
    duplicate slot names, empty option lists).
    """
    header = _HEADER_ID_RE.search(text)
    if header is None:
        raise ValidationError("missing '# Target Scenario: <ID> (<title>)' header")
    schema_id = header.group("id")
    title = (header.group("title") or "").strip() or schema_id
    category = _category_of(schema_id)

    complexity_match = _HEADER_COMPLEXITY_RE.search(text)
    complexity = (
        int(complexity_match.group(1))
        if complexity_match
        else CATEGORY_COMPLEXITY[category]
    )

    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", line) from exc

    if not isinstance(doc, Mapping) or "Schema_Logic_Flow" not in doc:
        raise ValidationError("document must contain a top-level Schema_Logic_Flow mapping")
    flow = doc["Schema_Logic_Flow"]
    if not isinstance(flow, Mapping) or not flow:
        raise ValidationError("no steps: Schema_Logic_Flow is empty")

    steps = []
    for step_name, raw_items in flow.items():
        if raw_items is None:
            raw_items = []
        if not isinstance(raw_items, list):
            raise ValidationError(f"step {step_name!r}: expected a list of directives")
        directives: list[Directive] = []
        options: list[str] = []
        slots: list[SlotDecl] = []
        for item in raw_items:
            if not isinstance(item, Mapping) or len(item) != 1:
                raise ValidationError(
                    f"step {step_name!r}: each entry must be a single 'Key: value' mapping"
                )
            key, value = next(iter(item.items()))
            key = str(key)
            if key == "Options":
                options.extend(_parse_options_value(value))
                continue
            detail = _detail_of(value)
            directive = Directive(
                key=key, detail=detail, alternatives=_alternatives_in(detail)
            )
            directives.append(directive)
            if _SCENARIO_KEY_RE.match(key):
                options.append(f"{key}: {detail}" if detail else key)
            slots.append(
                SlotDecl(
                    name=key,
                    expected_kind=_expected_kind(key, detail),
                    required=_required_flag(key, detail),
                )
            )
        steps.append(
            SchemaStep(
                name=str(step_name),
                directives=tuple(directives),
                options=tuple(options),
                slots=tuple(slots),
            )
        )

    return Schema(
        id=schema_id,
        category=category,
        title=title,
        complexity=complexity,
        steps=tuple(steps),
    )


def _category_of(schema_id: str) -> SchemaCategory:
    for category in SchemaCategory:
        if schema_id.startswith(category.value):
            return category
    raise ValidationError(
        f"schema id {schema_id!r} does not start with a known category prefix"
    )


def serialize_sdl(schema: Schema) -> str:
    """Render a schema in canonical SDL form.

    The output is byte-stable: serializing the parse of this output
    reproduces it exactly.
    """
    lines = [
        "# DeepNews Schema Definition Language (SDL) v1.0",
        f"# Target Scenario: {schema.id} ({schema.title})",
        f"# Complexity: {schema.complexity}",
        "",
        "Schema_Logic_Flow:",
    ]
    for step in schema.steps:
        lines.append(f"  {step.name}:")
        scenario_options = {
            (f"{d.key}: {d.detail}" if d.detail else d.key)
            for d in step.directives
            if _SCENARIO_KEY_RE.match(d.key)
        }
        for d in step.directives:
            lines.append(f"    - {d.key}: {json.dumps(d.detail, ensure_ascii=False)}")
        numbered = [o for o in step.options if o not in scenario_options]
        if numbered:
            lines.append("    - Options:")
            for i, option in enumerate(numbered, start=1):
                lines.append(f"        {i}. {option}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Registry

@dataclass(frozen=True)
class SchemaRegistry:
    schemas: tuple[Schema, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for s in self.schemas:
            if s.id in seen:
                raise ConflictError(f"duplicate schema id {s.id!r} in registry")
            seen.add(s.id)

    def get(self, schema_id: str) -> Schema:
        for s in self.schemas:
            if s.id == schema_id:
                return s
        raise NotFoundError(f"schema {schema_id!r} not in registry")

    def by_category(self, category: SchemaCategory) -> list[Schema]:
        return sorted(
            (s for s in self.schemas if s.category is category), key=lambda s: s.id
        )

    def categories(self) -> list[SchemaCategory]:
        return sorted({s.category for s in self.schemas}, key=lambda c: c.value)


def load_schema_file(path: str | Path) -> Schema:
    return parse_sdl(Path(path).read_text(encoding="utf-8"))


def load_registry(directory: str | Path | None = None) -> SchemaRegistry:
    """Load every ``*.yaml`` schema in a directory (packaged set by default)."""
    if directory is None:
        from .assets_api import schema_dir

        directory = schema_dir()
    directory = Path(directory)
    paths = sorted(directory.glob("*.yaml"))
    if not paths:
        raise NotFoundError(f"no schema files under {directory}")
    return SchemaRegistry(schemas=tuple(load_schema_file(p) for p in paths))


# --------------------------------------------------------------------------
# Selection and slot binding

@dataclass(frozen=True)
class TopicProfile:
    keywords: tuple[str, ...]
    relation: Relation

    def tokens(self) -> set[str]:
        out: set[str] = set()
        for k in self.keywords:
            out |= word_tokens(k)
        return out


def _schema_tokens(schema: Schema) -> set[str]:
    tokens = word_tokens(schema.title)
    for step in schema.steps:
        for d in step.directives:
            tokens |= word_tokens(f"{d.key} {d.detail}")
    return tokens


def select_schema(registry: SchemaRegistry, profile: TopicProfile) -> Schema:
    """Pick the schema for a topic: relation fixes the category, keyword
    overlap ranks within it, lexicographic id breaks ties."""
    category = RELATION_CATEGORY[profile.relation]
    candidates = registry.by_category(category)
    if not candidates:
        available = ", ".join(c.value for c in registry.categories()) or "none"
        raise NotFoundError(
            f"no schema in category {category.value}; available categories: {available}"
        )
    topic_tokens = profile.tokens()
    scored = sorted(
        candidates,
        key=lambda s: (-len(topic_tokens & _schema_tokens(s)), s.id),
    )
    return scored[0]


@dataclass(frozen=True)
class SlotBindings:
    bindings: Mapping[str, tuple[str, ...]]
    unbound: tuple[str, ...]

    def refs_for(self, slot_name: str) -> tuple[str, ...]:
        return tuple(self.bindings.get(slot_name, ()))

    def unbound_required(self, schema: Schema) -> tuple[str, ...]:
        required = {
            slot.name for _, slot in schema.all_slots() if slot.required
        }
        return tuple(n for n in self.unbound if n in required)


def _evidence_candidates(
    kind: EvidenceKind, bundle: CorpusBundle
) -> list[AtomicFact | ContextBlock]:
    if kind is EvidenceKind.BLOCK:
        return list(bundle.blocks)
    return [f for f in bundle.facts if f.kind is FactKind(kind.value)]


def bind_slots(schema: Schema, bundle: CorpusBundle, top_k: int = 3) -> SlotBindings:
    """Bind each slot to its top-k matching evidence items.

    A candidate matches when its kind equals the slot's expected kind and
    its text shares at least one keyword token with the slot's directive.
    Slots with no candidates are listed as unbound.
    """
    if top_k <= 0:
        raise DomainError("top_k must be positive")
    bindings: dict[str, tuple[str, ...]] = {}
    unbound: list[str] = []
    for step, slot in schema.all_slots():
        keywords = schema.slot_keywords(slot.name)
        scored: list[tuple[int, str]] = []
        for item in _evidence_candidates(slot.expected_kind, bundle):
            overlap = len(keywords & word_tokens(item.text_repr()))
            if overlap >= 1:
                scored.append((-overlap, item.id))
        scored.sort()
        if scored:
            bindings[slot.name] = tuple(item_id for _, item_id in scored[:top_k])
        else:
            unbound.append(slot.name)
    return SlotBindings(bindings=bindings, unbound=tuple(unbound))


# --------------------------------------------------------------------------
# Causal-chain transmission

class PathClass(str, Enum):
    LINEAR = "Linear"
    NONLINEAR_AMPLIFIED = "NonLinearAmplified"


@dataclass(frozen=True)
class GraphNode:
    id: str
    role: str = ""


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    channel: str = ""
    amplification: float = 1.0
    mechanism: str | None = None

    def __post_init__(self):
        if self.amplification < 0:
            raise ValidationError(
                f"edge {self.src}->{self.dst}: amplification must be >= 0"
            )
        if self.src == self.dst:
            raise ValidationError(f"self-loop on node {self.src!r}")


@dataclass(frozen=True)
class TransmissionGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    def __post_init__(self):
        ids = {n.id for n in self.nodes}
        if len(ids) != len(self.nodes):
            raise ValidationError("duplicate node ids in transmission graph")
        for e in self.edges:
            if e.src not in ids or e.dst not in ids:
                raise ValidationError(
                    f"edge {e.src}->{e.dst} references an undeclared node"
                )

    def adjacency(self) -> dict[str, list[GraphEdge]]:
        adj: dict[str, list[GraphEdge]] = {n.id: [] for n in self.nodes}
        for e in sorted(self.edges, key=lambda e: (e.src, e.dst, e.channel)):
            adj[e.src].append(e)
        return adj


@dataclass(frozen=True)
class ImpactPath:
    nodes: tuple[str, ...]
    impact: float
    classification: PathClass


@dataclass(frozen=True)
class ImpactReport:
    source: str
    initial_impact: float
    impacts: Mapping[str, float]
    paths: tuple[ImpactPath, ...]


def _assert_acyclic(graph: TransmissionGraph) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n.id: WHITE for n in graph.nodes}
    adj = graph.adjacency()

    def visit(node: str) -> None:
        color[node] = GRAY
        for edge in adj[node]:
            if color[edge.dst] == GRAY:
                raise CycleError(f"cycle via edge {edge.src}->{edge.dst}")
            if color[edge.dst] == WHITE:
                visit(edge.dst)
        color[node] = BLACK

    for n in graph.nodes:
        if color[n.id] == WHITE:
            visit(n.id)


def propagate_causal_chain(
    graph: TransmissionGraph, source: str, initial_impact: float
) -> ImpactReport:
    """Propagate an impact along every path from ``source``.

    A node's impact is the sum over incoming paths of the initial impact
    times the product of edge amplifications along the path (the source
    itself carries the initial impact). A path is non-linear amplified
    when some edge on it both amplifies (> 1) and declares a mechanism.
    """
    if initial_impact < 0:
        raise DomainError("initial_impact must be non-negative")
    node_ids = {n.id for n in graph.nodes}
    if source not in node_ids:
        raise NotFoundError(f"source node {source!r} not in graph")
    _assert_acyclic(graph)

    adj = graph.adjacency()
    impacts = {n.id: 0.0 for n in graph.nodes}
    impacts[source] = initial_impact
    paths: list[ImpactPath] = []

    def walk(node: str, product: float, trail: tuple[str, ...], amplified: bool) -> None:
        for edge in adj[node]:
            next_product = product * edge.amplification
            next_amplified = amplified or (
                edge.amplification > 1 and bool(edge.mechanism)
            )
            next_trail = trail + (edge.dst,)
            impacts[edge.dst] += initial_impact * next_product
            paths.append(
                ImpactPath(
                    nodes=next_trail,
                    impact=initial_impact * next_product,
                    classification=(
                        PathClass.NONLINEAR_AMPLIFIED
                        if next_amplified
                        else PathClass.LINEAR
                    ),
                )
            )
            walk(edge.dst, next_product, next_trail, next_amplified)

    walk(source, 1.0, (source,), False)
    return ImpactReport(
        source=source,
        initial_impact=initial_impact,
        impacts=impacts,
        paths=tuple(paths),
    )


def load_transmission_graph(payload: Mapping | str | Path) -> TransmissionGraph:
    """Build a graph from its JSON wire form (or a path to one)."""
    if isinstance(payload, (str, Path)):
        payload = json.loads(Path(payload).read_text(encoding="utf-8"))
    nodes = tuple(
        GraphNode(id=n["id"], role=n.get("role", "")) for n in payload["nodes"]
    )
    edges = tuple(
        GraphEdge(
            src=e["from"],
            dst=e["to"],
            channel=e.get("channel", ""),
            amplification=float(e.get("amplification", 1.0)),
            mechanism=e.get("mechanism"),
        )
        for e in payload["edges"]
    )
    return TransmissionGraph(nodes=nodes, edges=edges)
