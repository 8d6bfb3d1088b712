"""The page-filter cascade: line-length, cross-document line dedup, bad words,
optional terminal-punctuation mode, and the language-confidence gate.

Stage order is pinned: line split -> line-length filter -> line dedup ->
bad-words filter -> confidence gate. Every filter can be toggled for
ablations; disabling a filter never decreases the number of survivors.
Language identification runs once per page on the deduplicated text,
directly before the bad-words filter (which selects its wordlist by
predicted language); the prediction is applied as a drop criterion only at
the gate, so drop accounting follows the pinned stage order.

The cascade is deterministic given (config, input order, profile): dedup
keeps the first occurrence of each line under the canonical document order,
and parallel execution only farms out the stateless per-page work while
preserving that order.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, TypeVar

from .ingest import CleanPage, RawDocument, _atomic_text_writer, split_lines
from .langid import LangPrediction, LangProfile, classify

# Scripts written without word separators; their wordlists match by substring.
UNSEGMENTED_CODES = frozenset({"ja", "km", "lo", "my", "th", "zh"})

DEFAULT_TERMINAL_PUNCTUATION = (".", "!", "?", '"')

T = TypeVar("T")
U = TypeVar("U")


@dataclass
class FilterConfig:
    """Toggles and thresholds for the cascade."""

    enable_line_length: bool = True
    min_long_lines: int = 3
    min_line_chars: int = 200
    enable_dedup: bool = True
    enable_badwords: bool = True
    badwords_dir: str | None = None
    c4_mode: bool = False
    english_prob_threshold: float = 0.99
    confidence_threshold: float = 0.70
    seed: int = 0

    def validate(self) -> None:
        if self.min_long_lines < 1:
            raise ValueError(f"min_long_lines must be >= 1, got {self.min_long_lines}")
        if self.min_line_chars < 0:
            raise ValueError(f"min_line_chars must be >= 0, got {self.min_line_chars}")
        if not 0 < self.confidence_threshold <= 1:
            raise ValueError(
                f"confidence_threshold must be in (0, 1], got {self.confidence_threshold}")
        if not 0 < self.english_prob_threshold <= 1:
            raise ValueError(
                f"english_prob_threshold must be in (0, 1], got {self.english_prob_threshold}")


@dataclass
class StageCounter:
    pages_in: int = 0
    pages_out: int = 0
    pages_dropped: int = 0
    detail: dict[str, int] = field(default_factory=dict)

    def bump(self, reason: str, by: int = 1) -> None:
        self.detail[reason] = self.detail.get(reason, 0) + by


@dataclass
class FilterReport:
    """Per-stage conservation counters: pages_in == pages_out + pages_dropped."""

    stages: dict[str, StageCounter] = field(default_factory=dict)

    def stage(self, name: str) -> StageCounter:
        return self.stages.setdefault(name, StageCounter())

    def to_dict(self) -> dict:
        return {
            name: {
                "pages_in": c.pages_in,
                "pages_out": c.pages_out,
                "pages_dropped": c.pages_dropped,
                **({"detail": dict(sorted(c.detail.items()))} if c.detail else {}),
            }
            for name, c in self.stages.items()
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=1)

    def save(self, path: str | Path) -> None:
        with _atomic_text_writer(Path(path)) as fh:
            fh.write(self.to_json() + "\n")


def line_length_filter(page: CleanPage, min_long_lines: int = 3,
                       min_line_chars: int = 200) -> bool:
    """True iff the page has at least ``min_long_lines`` lines of
    ``min_line_chars`` or more Unicode code points."""
    long_lines = sum(1 for line in page.lines if len(line) >= min_line_chars)
    return long_lines >= min_long_lines


def terminal_punct_filter(page: CleanPage,
                          punctuation: tuple[str, ...] = DEFAULT_TERMINAL_PUNCTUATION,
                          ) -> CleanPage:
    """Drop lines that do not end in a terminal punctuation mark (C4 mode)."""
    kept = [line for line in page.lines if line.rstrip().endswith(punctuation)]
    return CleanPage(url=page.url, timestamp=page.timestamp, lines=kept,
                     language=page.language, confidence=page.confidence,
                     source_filters=list(page.source_filters))


class BadWordsFilter:
    """Per-language blocklists; whole-word matching for alphabetic scripts,
    substring matching for unsegmented ones."""

    def __init__(self, wordlists: dict[str, set[str]],
                 unsegmented: frozenset[str] = UNSEGMENTED_CODES):
        self.patterns: dict[str, re.Pattern[str]] = {}
        self.unsegmented = unsegmented
        for code, words in wordlists.items():
            cleaned = sorted({w.strip().lower() for w in words if w.strip()})
            if not cleaned:
                continue
            alternation = "|".join(re.escape(w) for w in cleaned)
            if code in unsegmented:
                pattern = f"(?:{alternation})"
            else:
                # lookarounds match word boundaries for non-ASCII scripts too
                pattern = rf"(?<!\w)(?:{alternation})(?!\w)"
            self.patterns[code] = re.compile(pattern, re.IGNORECASE | re.UNICODE)

    @classmethod
    def from_dir(cls, directory: str | Path,
                 unsegmented: frozenset[str] = UNSEGMENTED_CODES) -> "BadWordsFilter":
        """Load one UTF-8 wordlist file per language, named by language code."""
        directory = Path(directory)
        wordlists: dict[str, set[str]] = {}
        for path in sorted(directory.iterdir()):
            if path.is_dir():
                continue
            code = path.stem
            try:
                words = path.read_text(encoding="utf-8").splitlines()
            except UnicodeDecodeError as exc:
                raise ValueError(f"malformed wordlist file {path}: {exc}") from exc
            wordlists[code] = {w for w in (line.strip() for line in words) if w}
        return cls(wordlists, unsegmented=unsegmented)

    def has_list(self, language: str | None) -> bool:
        return language is not None and language in self.patterns

    def passes(self, page: CleanPage, language: str | None) -> bool:
        """True iff no listed word for ``language`` occurs in the page."""
        if language is None or language not in self.patterns:
            return True
        pattern = self.patterns[language]
        return not any(pattern.search(line) for line in page.lines)


def bad_words_filter(page: CleanPage, wordlists: dict[str, set[str]],
                     language: str | None = None) -> bool:
    """Single-page form of :class:`BadWordsFilter`: True means pass."""
    checker = BadWordsFilter(wordlists)
    return checker.passes(page, language if language is not None else page.language)


def _line_key(line: str) -> bytes:
    # Trim-only exact match; 16-byte digests bound the seen-set memory.
    return hashlib.blake2b(line.strip().encode("utf-8"), digest_size=16).digest()


class _LineDeduper:
    """Shared seen-line set; first occurrence wins under the stream order."""

    def __init__(self) -> None:
        self.seen: set[bytes] = set()

    def filter_lines(self, lines: list[str]) -> tuple[list[str], int]:
        kept = []
        dropped = 0
        for line in lines:
            key = _line_key(line)
            if key in self.seen:
                dropped += 1
            else:
                self.seen.add(key)
                kept.append(line)
        return kept, dropped


def dedup_lines(pages: Iterable[CleanPage]) -> Iterator[CleanPage]:
    """Keep each distinct line only at its first occurrence across the stream.

    Pages arrive in the canonical document total order; pages whose every
    line was already seen are dropped. Idempotent: a deduplicated stream
    passes through unchanged.
    """
    deduper = _LineDeduper()
    for page in pages:
        kept, dropped = deduper.filter_lines(page.lines)
        if not kept:
            continue
        if dropped:
            page = CleanPage(url=page.url, timestamp=page.timestamp, lines=kept,
                             language=page.language, confidence=page.confidence,
                             source_filters=list(page.source_filters))
        yield page


def confidence_gate(page: CleanPage, prediction: LangPrediction,
                    threshold: float) -> bool:
    """Pass iff the prediction meets the threshold; on pass, stamp the page."""
    if prediction.confidence >= threshold:
        page.language = prediction.language
        page.confidence = prediction.confidence
        return True
    return False


def _bounded_map(pool: ThreadPoolExecutor, fn: Callable[[T], U],
                 items: Iterable[T], window: int) -> Iterator[U]:
    """Order-preserving parallel map with a bounded in-flight window."""
    pending: deque = deque()
    for item in items:
        pending.append(pool.submit(fn, item))
        if len(pending) >= window:
            yield pending.popleft().result()
    while pending:
        yield pending.popleft().result()


def run_cascade(config: FilterConfig, docs: Iterable[RawDocument],
                profile: LangProfile, report: FilterReport | None = None,
                badwords: BadWordsFilter | None = None,
                parallelism: int = 1) -> tuple[Iterator[CleanPage], FilterReport]:
    """Run the full cascade over a document stream.

    Returns a lazy page stream plus the report object, which is complete
    once the stream is exhausted. ``parallelism`` farms the stateless
    per-page work (line split, line filters, classification) out to a
    thread pool with an order-preserving bounded map, so the output is
    identical for every degree. Classification sees the deduplicated page
    text, and its prediction drops pages only at the gate.
    """
    config.validate()
    if report is None:
        report = FilterReport()
    if badwords is None and config.enable_badwords and config.badwords_dir:
        badwords = BadWordsFilter.from_dir(config.badwords_dir)

    def split_and_length(doc: RawDocument) -> tuple[CleanPage, bool]:
        page = CleanPage(url=doc.url, timestamp=doc.timestamp, lines=split_lines(doc.text))
        if config.c4_mode:
            page = terminal_punct_filter(page)
            page.source_filters.append("terminal_punct")
        if config.enable_line_length:
            if not line_length_filter(page, config.min_long_lines, config.min_line_chars):
                return page, False
            page.source_filters.append("line_length")
        return page, True

    def classify_page(page: CleanPage) -> tuple[CleanPage, LangPrediction | None]:
        text = page.text().strip()
        return page, (classify(profile, text) if text else None)

    def stage_line_length(items) -> Iterator[CleanPage]:
        counter = report.stage("line_length")
        for page, keep in items:
            counter.pages_in += 1
            if not keep:
                counter.pages_dropped += 1
                counter.bump("too_few_long_lines")
                continue
            counter.pages_out += 1
            yield page

    def stage_dedup(items) -> Iterator[CleanPage]:
        if not config.enable_dedup:
            yield from items
            return
        counter = report.stage("dedup")
        deduper = _LineDeduper()
        for page in items:
            counter.pages_in += 1
            kept, dropped = deduper.filter_lines(page.lines)
            if dropped:
                counter.bump("lines_dropped", dropped)
            if not kept:
                counter.pages_dropped += 1
                counter.bump("pages_emptied")
                continue
            counter.pages_out += 1
            page.lines = kept
            page.source_filters.append("dedup")
            yield page

    def stage_badwords(items) -> Iterator[tuple[CleanPage, LangPrediction | None]]:
        if not (config.enable_badwords and badwords is not None):
            yield from items
            return
        counter = report.stage("badwords")
        for page, prediction in items:
            counter.pages_in += 1
            language = prediction.language if prediction else None
            if not badwords.has_list(language):
                counter.bump("no_wordlist")
                ok = True
            else:
                ok = badwords.passes(page, language)
            if ok:
                counter.pages_out += 1
                page.source_filters.append("badwords")
                yield page, prediction
            else:
                counter.pages_dropped += 1
                counter.bump("bad_word")

    def stage_gate(items) -> Iterator[CleanPage]:
        counter = report.stage("confidence_gate")
        for page, prediction in items:
            counter.pages_in += 1
            if prediction is None:
                counter.pages_dropped += 1
                counter.bump("empty_page")
                continue
            if config.c4_mode:
                ok = (prediction.language == "en"
                      and prediction.confidence >= config.english_prob_threshold)
                if ok:
                    page.language = prediction.language
                    page.confidence = prediction.confidence
            else:
                ok = confidence_gate(page, prediction, config.confidence_threshold)
            if ok:
                counter.pages_out += 1
                page.source_filters.append("confidence_gate")
                yield page
            else:
                counter.pages_dropped += 1
                counter.bump("low_confidence")

    def pipeline() -> Iterator[CleanPage]:
        # dedup is the one serial stage; the work on either side of it is
        # stateless per page, so both sides can fan out to the same pool
        if parallelism > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                window = parallelism * 4
                split = _bounded_map(pool, split_and_length, docs, window=window)
                deduped = stage_dedup(stage_line_length(split))
                classified = _bounded_map(pool, classify_page, deduped, window=window)
                yield from stage_gate(stage_badwords(classified))
        else:
            deduped = stage_dedup(stage_line_length(map(split_and_length, docs)))
            yield from stage_gate(stage_badwords(map(classify_page, deduped)))

    return pipeline(), report
