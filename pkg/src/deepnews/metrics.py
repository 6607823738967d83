"""Quantitative quality metrics for generated articles.

Covers sentence segmentation, burstiness (coefficient of variation of
sentence token lengths), structural entropy over the four functional block
types, a lexicon-based subjectivity score, numeric-claim grounding checks
with the hallucination-free rate, and effective cost per acceptance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import fmean, pstdev
from typing import Iterable, Mapping, Sequence

from .corpus import AtomicFact, FactKind, QuantClaim, Zone, extract_claims, normalize_unit
from .errors import DomainError
from .jsonio import dump_json
from .textutil import split_sentences, token_count

UNGROUNDED = "UNGROUNDED"

#: Sentinel returned by :func:`ecpa` when the acceptance rate is zero.
ECPA_INFINITE = math.inf

#: The four functional block types over which structural entropy is defined.
BLOCK_TYPE_LABELS = ("Conflict", "DataAnchor", "DeepInsight", "NarrativeCutIn")


@dataclass(frozen=True)
class Sentence:
    text: str
    char_len: int
    token_len: int


def segment_sentences(text: str) -> list[Sentence]:
    """Sentence segmentation with CJK and Latin terminators.

    Sentence slices are contiguous and cover the whole input, so joining
    their texts reconstructs it exactly. Decimal points and dotted
    abbreviations do not split.
    """
    return [
        Sentence(text=t, char_len=len(t), token_len=token_count(t))
        for t, _, _ in split_sentences(text)
    ]


def burstiness_of_lengths(lengths: Sequence[int | float]) -> float:
    """Coefficient of variation (population std / mean) of sentence lengths."""
    if len(lengths) <= 1:
        return 0.0
    mean = fmean(lengths)
    if mean == 0:
        return 0.0
    return pstdev(lengths) / mean


def burstiness(text: str) -> float:
    return burstiness_of_lengths([s.token_len for s in segment_sentences(text)])


def structural_entropy(block_types: Iterable[object]) -> float:
    """Shannon entropy (natural log) of the functional-block distribution.

    Accepts block type labels or enum values among the four known types.
    Zero-probability types contribute nothing; the maximum is ln 4 at the
    uniform distribution.
    """
    labels = [getattr(t, "value", t) for t in block_types]
    if not labels:
        raise DomainError("structural_entropy requires at least one typed paragraph")
    unknown = sorted({l for l in labels if l not in BLOCK_TYPE_LABELS})
    if unknown:
        raise DomainError(f"unknown block type(s): {unknown}")
    total = len(labels)
    entropy = 0.0
    for label in BLOCK_TYPE_LABELS:
        p = labels.count(label) / total
        if p > 0:
            entropy -= p * math.log(p)
    return entropy


def subjectivity_score(
    text: str, opinion_lexicon: Sequence[str], markers_per_sentence: float = 1.0
) -> float:
    """Opinion distinctness on a 0-20 scale.

    Counts opinion-marker occurrences (case-insensitive) and normalizes by
    sentence count times the expected markers-per-sentence at full score.
    """
    if not opinion_lexicon:
        raise DomainError("opinion lexicon must not be empty")
    if markers_per_sentence <= 0:
        raise DomainError("markers_per_sentence must be positive")
    sentences = segment_sentences(text)
    if not sentences:
        return 0.0
    lowered = text.lower()
    markers = sum(lowered.count(term.lower()) for term in opinion_lexicon)
    return min(20.0, 20.0 * markers / (len(sentences) * markers_per_sentence))


# --------------------------------------------------------------------------
# Grounding checks

@dataclass(frozen=True)
class ClaimGrounding:
    text: str
    value: str
    span: tuple[int, int]
    grounding: str  # fact id, or UNGROUNDED


@dataclass(frozen=True)
class HFRReport:
    claims: tuple[ClaimGrounding, ...]
    ungrounded_count: int
    hallucination_free: bool

    def to_dict(self) -> dict:
        return {
            "claims": [
                {
                    "text": c.text,
                    "value": c.value,
                    "span": list(c.span),
                    "grounding": c.grounding,
                }
                for c in self.claims
            ],
            "ungrounded_count": self.ungrounded_count,
            "hallucination_free": self.hallucination_free,
        }


def _claim_matches_fact(claim: QuantClaim, fact: AtomicFact, tolerance: float) -> bool:
    if claim.kind is FactKind.QUANTITY:
        if fact.kind is not FactKind.QUANTITY or fact.value.number is None:
            return False
        if normalize_unit(claim.unit) != normalize_unit(fact.value.unit):
            return False
        if claim.number is None:
            return False
        if fact.value.number == 0:
            return claim.number == 0
        return abs(claim.number - fact.value.number) <= tolerance * abs(fact.value.number)
    if claim.kind is FactKind.DATE:
        return fact.kind is FactKind.DATE and claim.date == fact.value.date
    return False


def hallucination_check(
    text: str, facts: Sequence[AtomicFact], tolerance: float = 0.005
) -> HFRReport:
    """Ground every quantitative and date claim in ``text`` against ``facts``.

    A claim is grounded when some fact of a compatible kind matches its
    unit and its number within the relative tolerance (dates must match
    exactly after normalization). Claims are extracted with the same rules
    used for corpus facts, so a text checked against its own extracted
    facts is always clean at tolerance zero.
    """
    if tolerance < 0:
        raise DomainError("tolerance must be non-negative")
    groundings: list[ClaimGrounding] = []
    ungrounded = 0
    for claim in extract_claims(text):
        fact_id = UNGROUNDED
        for fact in facts:
            if _claim_matches_fact(claim, fact, tolerance):
                fact_id = fact.id
                break
        if fact_id == UNGROUNDED:
            ungrounded += 1
        groundings.append(
            ClaimGrounding(
                text=claim.text,
                value=claim.text,
                span=claim.span,
                grounding=fact_id,
            )
        )
    return HFRReport(
        claims=tuple(groundings),
        ungrounded_count=ungrounded,
        hallucination_free=ungrounded == 0,
    )


def hfr_rate(reports: Sequence[HFRReport]) -> float:
    """Fraction of reports whose claims are all grounded."""
    if not reports:
        raise DomainError("hfr_rate requires at least one report")
    return sum(1 for r in reports if r.hallucination_free) / len(reports)


def ecpa(cost_per_run: float, acceptance_rate: float) -> float:
    """Effective cost per accepted article; infinite at zero acceptance."""
    if cost_per_run < 0:
        raise DomainError("cost_per_run must be non-negative")
    if not 0.0 <= acceptance_rate <= 1.0:
        raise DomainError("acceptance_rate must lie in [0, 1]")
    if acceptance_rate == 0.0:
        return ECPA_INFINITE
    return cost_per_run / acceptance_rate


# --------------------------------------------------------------------------
# Aggregate report

@dataclass(frozen=True)
class MetricsReport:
    burstiness: float
    structural_entropy: float | None
    subjectivity: float
    hfr: HFRReport
    icr: float
    zone: Zone
    cost: float = 0.0
    currency: str = "¥"
    token_usage: Mapping[str, int] | None = None

    def to_dict(self) -> dict:
        return {
            "burstiness": self.burstiness,
            "structural_entropy": self.structural_entropy,
            "subjectivity": self.subjectivity,
            "hfr": self.hfr.to_dict(),
            "icr": self.icr,
            "zone": self.zone.value,
            "cost": self.cost,
            "currency": self.currency,
            "token_usage": dict(self.token_usage or {}),
        }


def metrics_report_from_dict(payload: dict) -> MetricsReport:
    hfr_payload = payload["hfr"]
    report = HFRReport(
        claims=tuple(
            ClaimGrounding(
                text=c["text"],
                value=c["value"],
                span=tuple(c["span"]),
                grounding=c["grounding"],
            )
            for c in hfr_payload["claims"]
        ),
        ungrounded_count=hfr_payload["ungrounded_count"],
        hallucination_free=hfr_payload["hallucination_free"],
    )
    return MetricsReport(
        burstiness=payload["burstiness"],
        structural_entropy=payload["structural_entropy"],
        subjectivity=payload["subjectivity"],
        hfr=report,
        icr=payload["icr"],
        zone=Zone(payload["zone"]),
        cost=payload.get("cost", 0.0),
        currency=payload.get("currency", "¥"),
        token_usage=payload.get("token_usage") or {},
    )


# --------------------------------------------------------------------------
# Ablation table

_CANONICAL_CONDITIONS = ("Human Expert", "Ours (Full Model)", "w/o Schema", "w/o Tactics")
_ABLATION_COLUMNS = ("Structural Entropy", "Burstiness", "Subjectivity Score")


@dataclass(frozen=True)
class AblationTable:
    rows: tuple[dict, ...]
    text: str

    def to_json(self) -> str:
        return dump_json({"columns": list(_ABLATION_COLUMNS), "rows": list(self.rows)})


def ablation_report(samples: Sequence[tuple[str, MetricsReport]]) -> AblationTable:
    """Arithmetic means per condition, rendered as an aligned table.

    Known condition labels keep their canonical display order; unknown
    labels follow in first-seen order.
    """
    if not samples:
        raise DomainError("ablation_report requires at least one sample")
    groups: dict[str, list[MetricsReport]] = {}
    order: list[str] = []
    for label, report in samples:
        if label not in groups:
            groups[label] = []
            order.append(label)
        groups[label].append(report)
    ordered = [c for c in _CANONICAL_CONDITIONS if c in groups]
    ordered += [c for c in order if c not in _CANONICAL_CONDITIONS]

    rows = []
    for label in ordered:
        reports = groups[label]
        entropies = [r.structural_entropy for r in reports if r.structural_entropy is not None]
        if not entropies:
            raise DomainError(f"condition {label!r} has no structural entropy values")
        rows.append(
            {
                "condition": label,
                "structural_entropy": fmean(entropies),
                "burstiness": fmean(r.burstiness for r in reports),
                "subjectivity": fmean(r.subjectivity for r in reports),
                "samples": len(reports),
            }
        )

    width = max(len("Condition"), *(len(r["condition"]) for r in rows)) + 2
    lines = [
        "Condition".ljust(width)
        + "Structural Entropy".ljust(20)
        + "Burstiness".ljust(12)
        + "Subjectivity Score"
    ]
    for r in rows:
        lines.append(
            r["condition"].ljust(width)
            + f"{r['structural_entropy']:.3f}".ljust(20)
            + f"{r['burstiness']:.3f}".ljust(12)
            + f"{r['subjectivity']:.1f}"
        )
    return AblationTable(rows=tuple(rows), text="\n".join(lines))
