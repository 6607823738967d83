"""Corpus ingestion and dual-granularity restructuring.

Source documents arrive on three retrieval streams and are reorganized
into two granularities: atomic facts (numbers, dates, entities, quotes
with exact source spans) for micro-detail, and context blocks (bounded
gists with theme tags) for macro-logic. The same module owns the
input-size accounting: the information compression rate, the context-zone
classifier and the minimum-viable-context gate.

Fact extraction is rule-based and deterministic on purpose: the grounding
checks downstream treat the extractor as an exact oracle, which a
model-based extractor could not provide.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConflictError, DomainError, ParseError, ValidationError
from .jsonio import atomic_write_text, dump_json
from .textutil import split_sentences, top_keywords


class Stream(str, Enum):
    """The three retrieval streams feeding a corpus."""

    ECOLOGICAL = "ecological"
    QUANTITATIVE = "quantitative"
    NARRATIVE = "narrative"


class FactKind(str, Enum):
    QUANTITY = "quantity"
    DATE = "date"
    ENTITY = "entity"
    QUOTE = "quote"


class Zone(str, Enum):
    """Context-size zones, ordered from starved to saturated."""

    NOISE = "Noise"
    COLLAPSE = "Collapse"
    PHASE_TRANSITION = "PhaseTransition"
    SATURATION = "Saturation"


ZONE_ORDER: tuple[Zone, ...] = (
    Zone.NOISE,
    Zone.COLLAPSE,
    Zone.PHASE_TRANSITION,
    Zone.SATURATION,
)


class GateMode(str, Enum):
    BLOCK = "Block"
    WARN = "Warn"
    OFF = "Off"


class GateStatus(str, Enum):
    PASS = "Pass"
    WARN = "Warn"
    FAIL = "Fail"


@dataclass(frozen=True)
class FactValue:
    """Tagged value of an atomic fact.

    ``text`` is always the literal as it appears in the source body;
    ``number``/``unit`` are set for quantities, ``date`` (ISO, possibly
    partial) for dates.
    """

    text: str
    number: float | None = None
    unit: str = ""
    date: str | None = None


@dataclass(frozen=True)
class SourceDocument:
    id: str
    stream: Stream
    title: str
    body: str
    source_uri: str = ""
    retrieved_at: str = ""
    char_count: int = -1

    def __post_init__(self):
        if self.char_count < 0:
            object.__setattr__(self, "char_count", len(self.body))
        elif self.char_count != len(self.body):
            raise ValidationError(
                f"document {self.id!r}: char_count {self.char_count} does not "
                f"match body length {len(self.body)}"
            )


@dataclass(frozen=True)
class AtomicFact:
    id: str
    doc_id: str
    kind: FactKind
    subject: str
    predicate: str
    value: FactValue
    span: tuple[int, int]
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"fact {self.id!r}: confidence out of [0,1]")
        if self.span[0] < 0 or self.span[1] < self.span[0]:
            raise ValidationError(f"fact {self.id!r}: malformed span {self.span}")

    def text_repr(self) -> str:
        """Flat text used for keyword matching and prompt serialization."""
        return " ".join(p for p in (self.subject, self.predicate, self.value.text) if p)


@dataclass(frozen=True)
class ContextBlock:
    id: str
    doc_ids: tuple[str, ...]
    gist: str
    theme_tags: tuple[str, ...] = ()
    char_count: int = -1

    def __post_init__(self):
        if not self.doc_ids:
            raise ValidationError(f"block {self.id!r}: doc_ids empty")
        if not self.gist:
            raise ValidationError(f"block {self.id!r}: gist empty")
        if self.char_count < 0:
            object.__setattr__(self, "char_count", len(self.gist))

    def text_repr(self) -> str:
        return self.gist + " " + " ".join(self.theme_tags)


@dataclass(frozen=True)
class CorpusBundle:
    docs: tuple[SourceDocument, ...]
    facts: tuple[AtomicFact, ...] = ()
    blocks: tuple[ContextBlock, ...] = ()
    total_chars: int = -1

    def __post_init__(self):
        expected = sum(d.char_count for d in self.docs)
        if self.total_chars < 0:
            object.__setattr__(self, "total_chars", expected)
        elif self.total_chars != expected:
            raise ValidationError(
                f"total_chars {self.total_chars} != sum of document lengths {expected}"
            )
        ids = {d.id for d in self.docs}
        for f in self.facts:
            if f.doc_id not in ids:
                raise ValidationError(f"fact {f.id!r} references unknown doc {f.doc_id!r}")
        for b in self.blocks:
            for d in b.doc_ids:
                if d not in ids:
                    raise ValidationError(f"block {b.id!r} references unknown doc {d!r}")

    def doc_index(self) -> dict[str, SourceDocument]:
        return {d.id: d for d in self.docs}

    def evidence_index(self) -> dict[str, AtomicFact | ContextBlock]:
        index: dict[str, AtomicFact | ContextBlock] = {f.id: f for f in self.facts}
        index.update({b.id: b for b in self.blocks})
        return index


@dataclass(frozen=True)
class ZonePolicy:
    """Zone thresholds in characters, plus the gate behavior."""

    noise_max: int = 10_000
    collapse_max: int = 15_000
    phase_min: int = 30_000
    saturation_min: int = 40_000
    gate_mode: GateMode = GateMode.BLOCK

    def __post_init__(self):
        if not self.noise_max <= self.collapse_max <= self.phase_min <= self.saturation_min:
            raise DomainError("zone thresholds must be non-decreasing")


@dataclass(frozen=True)
class GateDecision:
    status: GateStatus
    zone: Zone
    icr: float
    message: str = ""


# --------------------------------------------------------------------------
# Ingestion

_REQUIRED_KEYS = ("id", "stream", "title", "body", "source_uri", "retrieved_at")


def _validate_rfc3339(value: str, line: int) -> None:
    try:
        datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise ParseError(f"retrieved_at {value!r} is not an RFC 3339 timestamp", line)


def _iter_lines(source: str | Iterable[str]) -> Iterator[str]:
    if isinstance(source, str):
        yield from source.splitlines()
    else:
        for line in source:
            yield line.rstrip("\n")


def ingest_documents(source: str | Iterable[str]) -> CorpusBundle:
    """Parse a JSON Lines document stream into a docs-only bundle.

    One object per line with keys id, stream, title, body, source_uri,
    retrieved_at. Unknown keys are ignored. Malformed records raise a
    :class:`ParseError` naming the line; duplicate ids raise
    :class:`ConflictError`.
    """
    docs: list[SourceDocument] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
        if not isinstance(record, dict):
            raise ParseError("record is not a JSON object", lineno)
        missing = [k for k in _REQUIRED_KEYS if k not in record]
        if missing:
            raise ParseError(f"missing field(s): {', '.join(missing)}", lineno)
        try:
            stream = Stream(record["stream"])
        except ValueError:
            raise ParseError(
                f"stream {record['stream']!r} is not one of "
                f"{[s.value for s in Stream]}",
                lineno,
            )
        for key in ("id", "title", "body", "source_uri", "retrieved_at"):
            if not isinstance(record[key], str):
                raise ParseError(f"field {key!r} must be a string", lineno)
        _validate_rfc3339(record["retrieved_at"], lineno)
        if record["id"] in seen:
            raise ConflictError(f"duplicate document id {record['id']!r} at line {lineno}")
        seen.add(record["id"])
        docs.append(
            SourceDocument(
                id=record["id"],
                stream=stream,
                title=record["title"],
                body=record["body"],
                source_uri=record["source_uri"],
                retrieved_at=record["retrieved_at"],
            )
        )
    return CorpusBundle(docs=tuple(docs))


def ingest_path(path: str | Path) -> CorpusBundle:
    return ingest_documents(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# Atomic fact extraction (rule-based, deterministic)

_MONTHS = (
    "January|February|March|April|May|June|July|August|September|October|"
    "November|December"
)
_DATE_PATTERNS = [
    re.compile(r"[0-9]{4}-[0-9]{2}-[0-9]{2}"),
    re.compile(r"[0-9]{4}/[0-9]{1,2}/[0-9]{1,2}"),
    re.compile(r"[0-9]{4}年(?:[0-9]{1,2}月(?:[0-9]{1,2}日)?)?"),
    re.compile(rf"(?:{_MONTHS})\s+[0-9]{{1,2}},\s*[0-9]{{4}}"),
    re.compile(rf"[0-9]{{1,2}}\s+(?:{_MONTHS})\s+[0-9]{{4}}"),
]

# Longest-first so 亿元 wins over 亿, "percentage points" over "percent".
_UNIT_ALTS = [
    "个百分点", "万亿元", "亿美元", "万亿", "亿元", "万元", "美元", "港元",
    "亿", "万", "元", "倍",
    "percentage points", "basis points", "billion yuan", "million yuan",
    "trillion", "billion", "million", "percent", "bps",
    "%", "％",
]
_LATIN_UNITS = {u for u in _UNIT_ALTS if u[0].isascii() and u[0].isalpha()}


def _unit_regex() -> str:
    parts = []
    for u in _UNIT_ALTS:
        esc = re.escape(u)
        if u in _LATIN_UNITS:
            parts.append(rf"\s*{esc}(?![A-Za-z])")
        else:
            parts.append(rf"\s*{esc}")
    return "|".join(parts)


_QTY_RE = re.compile(
    rf"(?P<pre>[$¥€£￥])?"
    rf"(?P<num>(?<![0-9A-Za-z._\-])(?:[0-9]{{1,3}}(?:,[0-9]{{3}})+|[0-9]+)(?:\.[0-9]+)?)"
    rf"(?P<unit>{_unit_regex()})?"
)

_QUOTE_PATTERNS = [
    re.compile(r"\"([^\"\n]{1,240})\""),
    re.compile(r"“([^”\n]{1,240})”"),
    re.compile(r"「([^」\n]{1,240})」"),
    re.compile(r"『([^』\n]{1,240})』"),
]

_ATTRIBUTION_VERBS = (
    "said", "says", "saying", "stated", "told", "warned", "added", "noted",
    "argued", "replied", "insisted",
    "表示", "强调", "坦言", "回应", "说道", "称", "说",
)

_DIRECTION_POS = {
    "up", "rose", "rise", "risen", "climbed", "climb", "grew", "grow",
    "grown", "increased", "increase", "gained", "gain", "surged", "jumped",
    "expanded", "widened",
    "增长", "增加", "上涨", "上升", "攀升", "涨", "增至", "升至", "扩大",
}
_DIRECTION_NEG = {
    "down", "fell", "fall", "fallen", "dropped", "drop", "declined",
    "decline", "decreased", "slid", "slumped", "shrank", "shrink", "lost",
    "narrowed", "halved",
    "下降", "下跌", "下滑", "减少", "缩水", "跌", "降至", "蒸发", "收窄",
}
_DIRECTION_NEUTRAL = {
    "hit", "reached", "reach", "held", "stood", "totaled", "posted", "at",
    "达到", "达", "至", "为", "录得", "报",
}
_DIRECTION_WORDS = _DIRECTION_POS | _DIRECTION_NEG | _DIRECTION_NEUTRAL

_ENTITY_PATTERNS = [
    re.compile(r"\b[A-Z][A-Za-z0-9&]+(?:\s+[A-Z][A-Za-z0-9&]+)+\b"),
    re.compile(r"[一-鿿]{2,8}(?:公司|集团|科技|控股|银行|证券|基金)"),
]

_CJK_DATE_TRANS = str.maketrans({"年": "-", "月": "-", "日": ""})


def _normalize_date(literal: str) -> str:
    if "年" in literal:
        return literal.translate(_CJK_DATE_TRANS).rstrip("-")
    if "/" in literal:
        y, m, d = literal.split("/")
        return f"{y}-{int(m):02d}-{int(d):02d}"
    if re.fullmatch(r"[0-9]{4}-[0-9]{2}-[0-9]{2}", literal):
        return literal
    # Month-name forms.
    m = re.search(rf"({_MONTHS})", literal)
    month = _MONTHS.split("|").index(m.group(1)) + 1
    day = int(re.search(r"(?<![0-9])([0-9]{1,2})(?!,?\s*[0-9])", literal).group(1))
    year = int(re.search(r"[0-9]{4}", literal).group(0))
    return f"{year}-{month:02d}-{day:02d}"


def normalize_unit(unit: str) -> str:
    unit = unit.strip().replace("％", "%").replace("￥", "¥").lower()
    return unit


@dataclass(frozen=True)
class _SentenceView:
    text: str
    start: int
    end: int


def _sentence_at(sentences: list[_SentenceView], pos: int) -> _SentenceView | None:
    for s in sentences:
        if s.start <= pos < s.end:
            return s
    return None


def _last_direction_word(segment: str) -> tuple[str, int] | None:
    """Rightmost direction/level word in the segment, with its offset."""
    best: tuple[str, int] | None = None
    lowered = segment.lower()
    for word in _DIRECTION_WORDS:
        if word.isascii():
            for m in re.finditer(rf"\b{re.escape(word)}\b", lowered):
                if best is None or m.start() > best[1]:
                    best = (word, m.start())
        else:
            idx = segment.rfind(word)
            if idx >= 0 and (best is None or idx > best[1]):
                best = (word, idx)
    return best


_SUBJECT_BOUNDARY_RE = re.compile(r"[，,。；;：:！!？?\n]")


def _subject_and_predicate(
    doc: SourceDocument, sentences: list[_SentenceView], pos: int
) -> tuple[str, str]:
    """Derive (subject, predicate) for a value found at body offset ``pos``."""
    sent = _sentence_at(sentences, pos)
    if sent is None:
        return doc.title, ""
    segment = sent.text[: pos - sent.start]
    hit = _last_direction_word(segment)
    predicate = ""
    if hit is not None:
        predicate = hit[0]
        segment = segment[: hit[1]]
    pieces = _SUBJECT_BOUNDARY_RE.split(segment)
    subject = pieces[-1].strip(" \t　\"'“”「」『』()（）[]")
    if len(subject) > 48:
        subject = subject[-48:]
    return subject or doc.title, predicate


def direction_sign(predicate: str) -> int:
    p = predicate.lower()
    if p in _DIRECTION_POS:
        return 1
    if p in _DIRECTION_NEG:
        return -1
    return 0


def _overlaps(span: tuple[int, int], spans: list[tuple[int, int]]) -> bool:
    return any(s < span[1] and span[0] < e for s, e in spans)


def extract_atomic_facts(doc: SourceDocument) -> list[AtomicFact]:
    """Extract quantity, date, quote and entity facts from one document.

    Every numeric literal (with optional currency prefix or unit suffix),
    percentage and date yields exactly one fact with an exact source span;
    quoted passages with a nearby attribution verb yield quote facts.
    Extraction is deterministic: two runs over the same body produce the
    same facts in the same order.
    """
    body = doc.body
    if not body:
        return []
    sentences = [_SentenceView(t, s, e) for t, s, e in split_sentences(body)]
    found: list[tuple[tuple[int, int], FactKind, str, str, FactValue, float]] = []

    date_spans: list[tuple[int, int]] = []
    for pattern in _DATE_PATTERNS:
        for m in pattern.finditer(body):
            span = m.span()
            if _overlaps(span, date_spans):
                continue
            date_spans.append(span)
            subject, predicate = _subject_and_predicate(doc, sentences, span[0])
            value = FactValue(text=m.group(0), date=_normalize_date(m.group(0)))
            found.append((span, FactKind.DATE, subject, predicate, value, 1.0))

    for m in _QTY_RE.finditer(body):
        span = m.span()
        if _overlaps(span, date_spans):
            continue
        literal = m.group(0)
        number = float(m.group("num").replace(",", ""))
        unit = (m.group("unit") or "").strip()
        if not unit and m.group("pre"):
            unit = m.group("pre")
        subject, predicate = _subject_and_predicate(doc, sentences, span[0])
        value = FactValue(text=literal, number=number, unit=normalize_unit(unit))
        found.append((span, FactKind.QUANTITY, subject, predicate, value, 1.0))

    quote_spans: list[tuple[int, int]] = []
    for pattern in _QUOTE_PATTERNS:
        for m in pattern.finditer(body):
            span = m.span()
            if _overlaps(span, quote_spans):
                continue
            sent = _sentence_at(sentences, span[0])
            if sent is None:
                continue
            attribution = _find_attribution(sent, body, span)
            if attribution is None:
                continue
            quote_spans.append(span)
            subject, verb = attribution
            value = FactValue(text=m.group(1))
            found.append((span, FactKind.QUOTE, subject or doc.title, verb, value, 0.9))

    seen_entities: set[str] = set()
    for pattern in _ENTITY_PATTERNS:
        for m in pattern.finditer(body):
            literal = m.group(0)
            if literal in seen_entities:
                continue
            if _overlaps(m.span(), date_spans):
                continue
            seen_entities.add(literal)
            value = FactValue(text=literal)
            found.append((m.span(), FactKind.ENTITY, literal, "", value, 0.6))

    found.sort(key=lambda item: (item[0][0], item[0][1], item[1].value))
    facts = []
    for idx, (span, kind, subject, predicate, value, confidence) in enumerate(found):
        facts.append(
            AtomicFact(
                id=f"{doc.id}-f{idx:03d}",
                doc_id=doc.id,
                kind=kind,
                subject=subject,
                predicate=predicate,
                value=value,
                span=span,
                confidence=confidence,
            )
        )
    return facts


def _find_attribution(
    sent: _SentenceView, body: str, quote_span: tuple[int, int]
) -> tuple[str, str] | None:
    """Locate an attribution verb in the quote's sentence.

    Returns (speaker guess, verb) or None when the quote is unattributed.
    """
    outside = sent.text[: quote_span[0] - sent.start] + sent.text[quote_span[1] - sent.start :]
    for verb in _ATTRIBUTION_VERBS:
        if verb.isascii():
            m = re.search(rf"\b{re.escape(verb)}\b", outside.lower())
            idx = m.start() if m else -1
        else:
            idx = outside.find(verb)
        if idx >= 0:
            before = outside[:idx]
            speaker = _SUBJECT_BOUNDARY_RE.split(before)[-1]
            return speaker.strip(" \t　\"'“”「」『』：:,"), verb
    return None


# --------------------------------------------------------------------------
# Claim extraction (shared with the grounding checks)

@dataclass(frozen=True)
class QuantClaim:
    """A quantitative or date claim found in generated text."""

    text: str
    kind: FactKind
    span: tuple[int, int]
    number: float | None = None
    unit: str = ""
    date: str | None = None


def extract_claims(text: str) -> list[QuantClaim]:
    """Quantity and date claims in ``text``, via the corpus extraction rules."""
    if not text:
        return []
    probe = SourceDocument(
        id="claim-probe", stream=Stream.NARRATIVE, title="", body=text
    )
    claims = []
    for fact in extract_atomic_facts(probe):
        if fact.kind is FactKind.QUANTITY:
            claims.append(
                QuantClaim(
                    text=fact.value.text,
                    kind=fact.kind,
                    span=fact.span,
                    number=fact.value.number,
                    unit=fact.value.unit,
                )
            )
        elif fact.kind is FactKind.DATE:
            claims.append(
                QuantClaim(
                    text=fact.value.text,
                    kind=fact.kind,
                    span=fact.span,
                    date=fact.value.date,
                )
            )
    return claims


# --------------------------------------------------------------------------
# Context blocks

def build_context_blocks(
    docs: Iterable[SourceDocument], target_block_chars: int = 1500
) -> list[ContextBlock]:
    """Chunk each document into contiguous gists of at most the target size.

    Every document contributes at least one block. Theme tags combine the
    document's stream label, entity names found in the chunk, and the most
    frequent keywords. Deterministic for fixed inputs.
    """
    if target_block_chars <= 0:
        raise DomainError("target_block_chars must be positive")
    blocks: list[ContextBlock] = []
    for doc in docs:
        if not doc.body.strip():
            continue
        chunks = _chunk_body(doc.body, target_block_chars)
        for k, chunk in enumerate(chunks):
            gist = chunk.strip()
            if not gist:
                continue
            tags = {doc.stream.value}
            for pattern in _ENTITY_PATTERNS:
                tags.update(m.group(0) for m in pattern.finditer(gist))
            tags.update(top_keywords(gist, 5))
            blocks.append(
                ContextBlock(
                    id=f"{doc.id}-b{k:02d}",
                    doc_ids=(doc.id,),
                    gist=gist,
                    theme_tags=tuple(sorted(tags)),
                )
            )
    return blocks


def _chunk_body(body: str, target: int) -> list[str]:
    sentences = [t for t, _, _ in split_sentences(body)]
    chunks: list[str] = []
    current = ""
    for sent in sentences:
        while len(sent) > target:
            if current:
                chunks.append(current)
                current = ""
            chunks.append(sent[:target])
            sent = sent[target:]
        if current and len(current) + len(sent) > target:
            chunks.append(current)
            current = sent
        else:
            current += sent
    if current:
        chunks.append(current)
    return chunks


def structure_bundle(
    bundle: CorpusBundle, target_block_chars: int = 1500
) -> CorpusBundle:
    """Populate facts and blocks for a docs-only bundle."""
    facts: list[AtomicFact] = []
    for doc in bundle.docs:
        facts.extend(extract_atomic_facts(doc))
    blocks = build_context_blocks(bundle.docs, target_block_chars)
    return replace(bundle, facts=tuple(facts), blocks=tuple(blocks))


# --------------------------------------------------------------------------
# Compression accounting and the context gate

def compute_icr(input_chars: int, target_output_chars: int) -> float:
    """Information compression rate: input characters per output character."""
    if target_output_chars <= 0:
        raise DomainError("target_output_chars must be positive")
    if input_chars < 0:
        raise DomainError("input_chars must be non-negative")
    return input_chars / target_output_chars


def classify_context_zone(total_chars: int, policy: ZonePolicy | None = None) -> Zone:
    """Classify input volume into half-open, lower-inclusive zones."""
    if total_chars < 0:
        raise DomainError("total_chars must be non-negative")
    policy = policy or ZonePolicy()
    if total_chars < policy.noise_max:
        return Zone.NOISE
    if total_chars < policy.phase_min:
        return Zone.COLLAPSE
    if total_chars < policy.saturation_min:
        return Zone.PHASE_TRANSITION
    return Zone.SATURATION


def mvc_gate(
    bundle: CorpusBundle,
    target_output_chars: int,
    policy: ZonePolicy | None = None,
) -> GateDecision:
    """Decide whether the retrieved context is large enough to write from."""
    policy = policy or ZonePolicy()
    icr = compute_icr(bundle.total_chars, target_output_chars)
    zone = classify_context_zone(bundle.total_chars, policy)
    below = zone in (Zone.NOISE, Zone.COLLAPSE)
    message = (
        f"zone={zone.value} icr={icr:.2f} "
        f"({bundle.total_chars} chars for a {target_output_chars}-char target)"
    )
    if policy.gate_mode is GateMode.OFF or not below:
        return GateDecision(GateStatus.PASS, zone, icr, message)
    if policy.gate_mode is GateMode.WARN:
        return GateDecision(
            GateStatus.WARN, zone, icr, f"context below viable minimum: {message}"
        )
    return GateDecision(
        GateStatus.FAIL, zone, icr, f"context below viable minimum: {message}"
    )


# --------------------------------------------------------------------------
# Bundle persistence (single JSON document, stable key order)

def bundle_to_dict(bundle: CorpusBundle) -> dict:
    return {
        "docs": [
            {
                "id": d.id,
                "stream": d.stream.value,
                "title": d.title,
                "body": d.body,
                "source_uri": d.source_uri,
                "retrieved_at": d.retrieved_at,
                "char_count": d.char_count,
            }
            for d in bundle.docs
        ],
        "facts": [
            {
                "id": f.id,
                "doc_id": f.doc_id,
                "kind": f.kind.value,
                "subject": f.subject,
                "predicate": f.predicate,
                "value": {
                    "text": f.value.text,
                    "number": f.value.number,
                    "unit": f.value.unit,
                    "date": f.value.date,
                },
                "span": list(f.span),
                "confidence": f.confidence,
            }
            for f in bundle.facts
        ],
        "blocks": [
            {
                "id": b.id,
                "doc_ids": list(b.doc_ids),
                "gist": b.gist,
                "theme_tags": list(b.theme_tags),
                "char_count": b.char_count,
            }
            for b in bundle.blocks
        ],
        "total_chars": bundle.total_chars,
    }


def bundle_from_dict(payload: dict) -> CorpusBundle:
    docs = tuple(
        SourceDocument(
            id=d["id"],
            stream=Stream(d["stream"]),
            title=d["title"],
            body=d["body"],
            source_uri=d.get("source_uri", ""),
            retrieved_at=d.get("retrieved_at", ""),
            char_count=d.get("char_count", -1),
        )
        for d in payload["docs"]
    )
    facts = tuple(
        AtomicFact(
            id=f["id"],
            doc_id=f["doc_id"],
            kind=FactKind(f["kind"]),
            subject=f["subject"],
            predicate=f["predicate"],
            value=FactValue(
                text=f["value"]["text"],
                number=f["value"]["number"],
                unit=f["value"]["unit"],
                date=f["value"]["date"],
            ),
            span=tuple(f["span"]),
            confidence=f["confidence"],
        )
        for f in payload["facts"]
    )
    blocks = tuple(
        ContextBlock(
            id=b["id"],
            doc_ids=tuple(b["doc_ids"]),
            gist=b["gist"],
            theme_tags=tuple(b["theme_tags"]),
            char_count=b.get("char_count", -1),
        )
        for b in payload["blocks"]
    )
    return CorpusBundle(
        docs=docs, facts=facts, blocks=blocks, total_chars=payload["total_chars"]
    )


def save_bundle(bundle: CorpusBundle, path: str | Path) -> None:
    atomic_write_text(path, dump_json(bundle_to_dict(bundle)))


def load_bundle(path: str | Path) -> CorpusBundle:
    return bundle_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
