"""Pluggable language identification with a character n-gram baseline.

The baseline is a character-trigram multinomial per language. Relative
n-gram frequencies are smoothed with an additive mass ``s``:

    P(g | L) = (f_g + s) / (1 + s * (V_L + 1))

where ``f_g`` is the n-gram's relative frequency in language L's training
text and ``V_L`` the number of distinct n-grams observed for L; the extra
``+1`` reserves one smoothed bucket for unseen n-grams. Smoothing relative
frequencies (rather than raw counts) makes the per-language distribution
invariant to duplicating the training text. Classification sums n-gram
log-probabilities and converts the per-language scores to a posterior with
a softmax over equal priors, so confidences sum to 1 over the label set.

Any detector exposing the same (language, confidence) surface can stand in
for the baseline; profiles serialize to a versioned JSON file.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .ingest import _atomic_text_writer

PROFILE_FORMAT = "corpusforge-langid"
PROFILE_VERSION = 1

_WS_RUN = re.compile(r"\s+")


@dataclass(frozen=True)
class LangPrediction:
    """Argmax language and its posterior probability over the profile's labels."""

    language: str
    confidence: float


class LangProfile:
    """Immutable per-language n-gram log-probability tables."""

    def __init__(self, n: int, smoothing: float,
                 tables: dict[str, dict[str, float]],
                 unseen: dict[str, float]):
        self.n = n
        self.smoothing = smoothing
        self.tables = tables
        self.unseen = unseen

    @property
    def languages(self) -> list[str]:
        return sorted(self.tables)

    def to_json(self) -> str:
        payload = {
            "format": PROFILE_FORMAT,
            "version": PROFILE_VERSION,
            "n": self.n,
            "smoothing": self.smoothing,
            "languages": {
                lang: {"log_probs": dict(sorted(self.tables[lang].items())),
                       "log_unseen": self.unseen[lang]}
                for lang in sorted(self.tables)
            },
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "LangProfile":
        payload = json.loads(text)
        if payload.get("format") != PROFILE_FORMAT:
            raise ValueError("not a language profile file")
        if payload.get("version") != PROFILE_VERSION:
            raise ValueError(f"unsupported profile version: {payload.get('version')}")
        tables = {lang: dict(entry["log_probs"]) for lang, entry in payload["languages"].items()}
        unseen = {lang: float(entry["log_unseen"]) for lang, entry in payload["languages"].items()}
        return cls(n=int(payload["n"]), smoothing=float(payload["smoothing"]),
                   tables=tables, unseen=unseen)

    def save(self, path: str | Path) -> None:
        with _atomic_text_writer(Path(path)) as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "LangProfile":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _normalize(text: str) -> str:
    # Simple Unicode lowercase; whitespace runs collapse to one space so
    # line structure does not leak into the n-gram inventory.
    return _WS_RUN.sub(" ", text.lower()).strip()


def _ngrams(text: str, n: int) -> Iterable[str]:
    for i in range(len(text) - n + 1):
        yield text[i:i + n]


def train_profiles(labeled_corpus: Iterable[tuple[str, str]] | Mapping[str, Iterable[str]],
                   n: int = 3, smoothing: float = 1e-4) -> LangProfile:
    """Count n-grams per language and build smoothed log-probability tables.

    ``labeled_corpus`` is either (language, text) pairs or a mapping from
    language to an iterable of texts. The profile is a pure function of the
    per-language n-gram multisets, so training order never matters and
    retraining on the same corpus is byte-identical after serialization.
    """
    if not 1 <= n <= 5:
        raise ValueError(f"n-gram order must be in [1, 5], got {n}")
    if smoothing <= 0:
        raise ValueError(f"smoothing mass must be positive, got {smoothing}")

    if isinstance(labeled_corpus, Mapping):
        pairs: Iterable[tuple[str, str]] = (
            (language, text)
            for language in sorted(labeled_corpus)
            for text in labeled_corpus[language]
        )
    else:
        pairs = labeled_corpus

    counts: dict[str, dict[str, int]] = {}
    for language, text in pairs:
        text = _normalize(text)
        if not text:
            continue
        if len(text) < n:
            text = text.ljust(n)
        table = counts.setdefault(language, {})
        for gram in _ngrams(text, n):
            table[gram] = table.get(gram, 0) + 1

    if not counts:
        raise ValueError("empty training corpus")

    tables: dict[str, dict[str, float]] = {}
    unseen: dict[str, float] = {}
    for language in sorted(counts):
        table = counts[language]
        total = sum(table.values())
        vocab = len(table)
        denom = math.log(1.0 + smoothing * (vocab + 1))
        tables[language] = {
            gram: math.log(table[gram] / total + smoothing) - denom
            for gram in sorted(table)
        }
        unseen[language] = math.log(smoothing) - denom
    return LangProfile(n=n, smoothing=smoothing, tables=tables, unseen=unseen)


def classify(profile: LangProfile, text: str) -> LangPrediction:
    """Return the most likely language with a softmax-normalized confidence.

    Ties break toward the lexicographically smaller language code. Text
    shorter than the n-gram order is right-padded with spaces.
    """
    text = _normalize(text)
    if not text:
        raise ValueError("empty input")
    if len(text) < profile.n:
        text = text.ljust(profile.n)

    grams: dict[str, int] = {}
    for gram in _ngrams(text, profile.n):
        grams[gram] = grams.get(gram, 0) + 1

    scores: dict[str, float] = {}
    for language in profile.languages:
        table = profile.tables[language]
        fallback = profile.unseen[language]
        scores[language] = sum(
            count * table.get(gram, fallback) for gram, count in grams.items()
        )

    # Softmax over languages; iteration in sorted order makes the argmax
    # tie-break lexicographic.
    peak = max(scores.values())
    exp_scores = {lang: math.exp(score - peak) for lang, score in scores.items()}
    norm = sum(exp_scores.values())
    best = max(sorted(exp_scores), key=lambda lang: exp_scores[lang])
    return LangPrediction(language=best, confidence=exp_scores[best] / norm)
