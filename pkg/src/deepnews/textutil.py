"""Text primitives shared across the pipeline.

Token counting and sentence splitting are deliberately tokenizer-free:
a token is one CJK character or one maximal run of non-space, non-CJK
characters. That unit is stable across model vendors and is the unit in
which all rhythm thresholds are expressed.
"""

from __future__ import annotations

import re
import zlib
from pathlib import Path

_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
)

# CJK terminators plus Latin terminators. ASCII ';' is intentionally not
# a boundary; the fullwidth '；' is.
_TERMINATORS = "。！？；.!?"
_CLOSERS = "」』”’\"'）)]】》〉"
_WHITESPACE = " \t\r\n　"

# Dotted abbreviations that must not end a sentence (lowercased, no final dot).
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "no", "vol", "fig",
    "etc", "vs", "cf", "inc", "co", "corp", "ltd", "approx", "est",
    "e.g", "i.e", "u.s", "u.k",
}

_STOPWORDS = {
    "the", "a", "an", "and", "or", "but", "of", "to", "in", "on", "at", "by",
    "for", "with", "from", "as", "is", "are", "was", "were", "be", "been",
    "being", "it", "its", "this", "that", "these", "those", "not", "no",
    "their", "they", "he", "she", "we", "you", "will", "would", "can",
    "could", "has", "have", "had", "do", "does", "did", "than", "then",
    "there", "here", "into", "over", "under", "about", "after", "before",
    "between", "during", "while", "per", "via", "all", "any", "more", "most",
    "other", "some", "such", "only", "own", "same", "so", "too", "very",
}

_ASCII_WORD_RE = re.compile(r"[a-z0-9]+")
_CJK_RUN_RE = re.compile(
    "["
    + "".join(f"{chr(lo)}-{chr(hi)}" for lo, hi in _CJK_RANGES)
    + "]+"
)


def is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str) -> list[str]:
    """Split text into tokens: one per CJK character, one per other run."""
    tokens: list[str] = []
    run: list[str] = []
    for ch in text:
        if ch.isspace():
            if run:
                tokens.append("".join(run))
                run = []
        elif is_cjk(ch):
            if run:
                tokens.append("".join(run))
                run = []
            tokens.append(ch)
        else:
            run.append(ch)
    if run:
        tokens.append("".join(run))
    return tokens


def token_count(text: str) -> int:
    return len(tokenize(text))


def _abbreviation_before(text: str, dot_index: int) -> bool:
    """True when the '.' at dot_index terminates an abbreviation or initial."""
    j = dot_index - 1
    chars: list[str] = []
    while j >= 0 and (text[j].isalnum() or text[j] == ".") and len(chars) < 8:
        chars.append(text[j])
        j -= 1
    word = "".join(reversed(chars)).lower().rstrip(".")
    if not word:
        return False
    if word in _ABBREVIATIONS:
        return True
    # Single-letter initials such as "J." in "J. P. Morgan".
    return len(word) == 1 and word.isalpha()


def split_sentences(text: str) -> list[tuple[str, int, int]]:
    """Split text into contiguous sentence slices.

    Returns (slice, start, end) triples whose concatenation reproduces the
    input exactly. Terminators, closing quotes and trailing whitespace stay
    attached to the sentence they end. Decimal points and common dotted
    abbreviations do not split.
    """
    n = len(text)
    out: list[tuple[str, int, int]] = []
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            if ch == ".":
                if 0 < i < n - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
                    i += 1
                    continue
                if _abbreviation_before(text, i):
                    i += 1
                    continue
            j = i + 1
            while j < n and text[j] in _TERMINATORS:
                j += 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            while j < n and text[j] in _WHITESPACE:
                j += 1
            out.append((text[start:j], start, j))
            start = j
            i = j
            continue
        i += 1
    if start < n:
        tail = text[start:]
        if tail.strip():
            out.append((tail, start, n))
        elif out:
            prev, pstart, _ = out[-1]
            out[-1] = (prev + tail, pstart, n)
    return out


def word_tokens(text: str) -> set[str]:
    """Lowercased overlap tokens: ASCII words (>=3 chars, no stopwords)
    plus CJK bigrams (single characters for length-1 runs)."""
    lowered = text.lower()
    tokens = {
        w for w in _ASCII_WORD_RE.findall(lowered)
        if len(w) >= 3 and w not in _STOPWORDS
    }
    for run in _CJK_RUN_RE.findall(lowered):
        if len(run) == 1:
            tokens.add(run)
        else:
            tokens.update(run[k : k + 2] for k in range(len(run) - 1))
    return tokens


def top_keywords(text: str, limit: int = 5) -> list[str]:
    """Most frequent overlap tokens, ties broken lexicographically."""
    counts: dict[str, int] = {}
    lowered = text.lower()
    for w in _ASCII_WORD_RE.findall(lowered):
        if len(w) >= 3 and w not in _STOPWORDS:
            counts[w] = counts.get(w, 0) + 1
    for run in _CJK_RUN_RE.findall(lowered):
        grams = [run] if len(run) == 1 else [run[k : k + 2] for k in range(len(run) - 1)]
        for g in grams:
            counts[g] = counts.get(g, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in ranked[:limit]]


def parse_lexicon(text: str) -> tuple[str, ...]:
    """One term per line; blank lines and '#' comment lines ignored."""
    terms = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.append(line)
    return tuple(dict.fromkeys(terms))


def load_lexicon(path: str | Path) -> tuple[str, ...]:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def stable_hash(*parts: object) -> int:
    """Deterministic 31-bit hash, stable across processes and platforms."""
    h = 0
    for part in parts:
        h = zlib.crc32(repr(part).encode("utf-8"), h)
    return h & 0x7FFFFFFF


def derive_seed(seed: int, *salt: object) -> int:
    """Derive a child seed from a parent seed and arbitrary salt values."""
    return stable_hash(seed, *salt)
