"""Candidate scoring: negative log-likelihood, grounding penalty, burstiness.

The selection loss is ``total = nll + lambda1 * H - lambda2 * B`` where H
counts quantitative claims ungrounded against the window's facts and B is
the burstiness of the candidate. When a backend reports no log-probability,
nll falls back to a character-level unigram surprisal fitted on the window
material, which keeps candidates totally ordered offline.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ..metrics import burstiness, hallucination_check
from ..planner import ContextWindow
from .constraints import ConstraintConfig


@dataclass(frozen=True)
class CandidateScore:
    nll: float
    hallucination_penalty: int
    burstiness: float
    total: float

    def to_dict(self) -> dict:
        return {
            "nll": self.nll,
            "hallucination_penalty": self.hallucination_penalty,
            "burstiness": self.burstiness,
            "total": self.total,
        }


def combine_score(
    nll: float, hallucination_penalty: int, burst: float, config: ConstraintConfig
) -> CandidateScore:
    """The one place the selection-loss identity lives."""
    total = nll + config.lambda1 * hallucination_penalty - config.lambda2 * burst
    return CandidateScore(
        nll=nll,
        hallucination_penalty=hallucination_penalty,
        burstiness=burst,
        total=total,
    )


def window_material(window: ContextWindow) -> str:
    parts = [f.text_repr() for f in window.facts] + [b.gist for b in window.blocks]
    return "\n".join(parts)


def unigram_nll(text: str, material: str) -> float:
    """Character-level surprisal of ``text`` under a Laplace-smoothed
    unigram model fitted on the window material."""
    counts = Counter(material)
    n = sum(counts.values())
    v = len(counts)
    nll = 0.0
    for ch in text:
        p = (counts.get(ch, 0) + 1) / (n + v + 1)
        nll -= math.log(p)
    return nll


def score_candidate(
    text: str,
    window: ContextWindow,
    backend_logprob: float | None,
    config: ConstraintConfig,
    grounding_tolerance: float = 0.005,
) -> CandidateScore:
    """Score one candidate against its window."""
    if backend_logprob is not None:
        nll = -backend_logprob
    else:
        nll = unigram_nll(text, window_material(window))
    report = hallucination_check(text, window.facts, grounding_tolerance)
    return combine_score(nll, report.ungrounded_count, burstiness(text), config)
