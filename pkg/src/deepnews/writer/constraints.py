"""Adversarial style constraints and their validators.

Three tactics are enforced post-hoc on generated text: rhythm break (a
very long sentence must be followed by a very short one, and sentence
lengths must not flatline around their moving average), logic fog
(explicit discourse connectors may not open more than a configured share
of sentences), and lexical hedge (formal terminology and colloquial
register must co-occur). Validators are pure: same text and config, same
violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DomainError
from ..metrics import segment_sentences

TACTIC_RHYTHM_BREAK = "rhythm-break"
TACTIC_LOGIC_FOG = "logic-fog"
TACTIC_LEXICAL_HEDGE = "lexical-hedge"

ALL_TACTICS = (TACTIC_RHYTHM_BREAK, TACTIC_LOGIC_FOG, TACTIC_LEXICAL_HEDGE)

#: Sentences in a row that must hug the moving average before the
#: flatline rule fires.
FLATLINE_RUN = 6
#: Relative band around the moving average that counts as "flat".
FLATLINE_BAND = 0.20


def _default_connectors() -> tuple[str, ...]:
    from ..assets_api import lexicon

    return lexicon("connectors")


def _default_formal() -> frozenset[str]:
    from ..assets_api import lexicon

    return frozenset(lexicon("formal"))


def _default_colloquial() -> frozenset[str]:
    from ..assets_api import lexicon

    return frozenset(lexicon("colloquial"))


@dataclass(frozen=True)
class ConstraintConfig:
    theta_high: int = 40
    theta_low: int = 5
    lambda_rhythm: float = 0.8
    forbidden_connectors: tuple[str, ...] = field(default_factory=_default_connectors)
    formal_lexicon: frozenset[str] = field(default_factory=_default_formal)
    colloquial_lexicon: frozenset[str] = field(default_factory=_default_colloquial)
    max_connector_density: float = 0.1
    lambda1: float = 1.0
    lambda2: float = 1.0
    max_regenerations: int = 3

    def __post_init__(self):
        if not 0 < self.theta_low < self.theta_high:
            raise DomainError("need 0 < theta_low < theta_high")
        if not 0 < self.lambda_rhythm <= 1:
            raise DomainError("lambda_rhythm must lie in (0, 1]")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise DomainError("score weights must be non-negative")
        if self.max_connector_density < 0:
            raise DomainError("max_connector_density must be non-negative")
        if self.max_regenerations < 0:
            raise DomainError("max_regenerations must be non-negative")


@dataclass(frozen=True)
class Violation:
    tactic: str
    location: int
    detail: str


def validate_rhythm(text: str, config: ConstraintConfig) -> list[Violation]:
    """Check the long/short alternation rule and the flatline rule.

    A sentence longer than ``theta_high`` tokens must be followed by one
    shorter than ``theta_low``. Independently, an exponential moving
    average of lengths (decay ``lambda_rhythm``) tracks the rhythm: when
    six consecutive sentences stay within ±20% of the running average, a
    flatline violation fires (the first sentence seeds the average and
    counts as on-average).
    """
    sentences = segment_sentences(text)
    violations: list[Violation] = []
    lengths = [s.token_len for s in sentences]
    for t in range(1, len(lengths)):
        if lengths[t - 1] > config.theta_high and lengths[t] >= config.theta_low:
            violations.append(
                Violation(
                    TACTIC_RHYTHM_BREAK,
                    t,
                    f"sentence of {lengths[t - 1]} tokens must be followed by "
                    f"one under {config.theta_low}, got {lengths[t]}",
                )
            )
    if lengths:
        ema = float(lengths[0])
        flat_run = 1
        for t in range(1, len(lengths)):
            if abs(lengths[t] - ema) <= FLATLINE_BAND * ema:
                flat_run += 1
            else:
                flat_run = 1
            if flat_run >= FLATLINE_RUN:
                violations.append(
                    Violation(
                        TACTIC_RHYTHM_BREAK,
                        t,
                        f"{FLATLINE_RUN} consecutive sentences within "
                        f"{int(FLATLINE_BAND * 100)}% of the moving average; "
                        "rhythm has flatlined",
                    )
                )
                flat_run = 0
            ema = config.lambda_rhythm * ema + (1 - config.lambda_rhythm) * lengths[t]
    violations.sort(key=lambda v: (v.location, v.detail))
    return violations


_OPENING_MARKS = " \t　\"'“”‘「『（(【[「"


def _connector_opening(sentence: str, connectors: tuple[str, ...]) -> str | None:
    stripped = sentence.lstrip(_OPENING_MARKS)
    lowered = stripped.lower()
    for conn in connectors:
        c = conn.lower()
        if not lowered.startswith(c):
            continue
        if c and c[-1].isascii() and c[-1].isalpha():
            rest = lowered[len(c) :]
            if rest and (rest[0].isalnum()):
                continue
        return conn
    return None


def validate_logic_fog(text: str, config: ConstraintConfig) -> list[Violation]:
    """Flag connector-initial sentences beyond the allowed density.

    With density cap d over n sentences, the first floor(d*n) connector
    openings are tolerated; each further one is a violation. Matching is
    case-insensitive and covers both Latin and CJK connector lists.
    """
    if not config.forbidden_connectors:
        raise DomainError("forbidden_connectors must not be empty")
    sentences = segment_sentences(text)
    if not sentences:
        return []
    hits: list[tuple[int, str]] = []
    for idx, sentence in enumerate(sentences):
        conn = _connector_opening(sentence.text, config.forbidden_connectors)
        if conn is not None:
            hits.append((idx, conn))
    allowed = int(config.max_connector_density * len(sentences) + 1e-9)
    return [
        Violation(
            TACTIC_LOGIC_FOG,
            idx,
            f"sentence opens with connector {conn!r} beyond the "
            f"{config.max_connector_density:.0%} density cap",
        )
        for idx, conn in hits[allowed:]
    ]


def validate_lexical_hedge(text: str, config: ConstraintConfig) -> list[Violation]:
    """Require at least one formal term and one colloquial term."""
    if not config.formal_lexicon or not config.colloquial_lexicon:
        raise DomainError("both lexicons must be non-empty")
    lowered = text.lower()
    violations = []
    if not any(term.lower() in lowered for term in config.formal_lexicon):
        violations.append(
            Violation(TACTIC_LEXICAL_HEDGE, 0, "missing-formal: no formal term present")
        )
    if not any(term.lower() in lowered for term in config.colloquial_lexicon):
        violations.append(
            Violation(
                TACTIC_LEXICAL_HEDGE, 0, "missing-colloquial: no colloquial term present"
            )
        )
    return violations


def validate_all(text: str, config: ConstraintConfig) -> list[Violation]:
    return (
        validate_rhythm(text, config)
        + validate_logic_fog(text, config)
        + validate_lexical_hedge(text, config)
    )
