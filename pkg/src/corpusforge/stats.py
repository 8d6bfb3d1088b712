"""Per-language corpus statistics and histogram export.

Counts are a commutative monoid: shards accumulate independently and merge
into the same totals as a single pass. "Tokens" here are whitespace-delimited
maximal non-space runs, which is reproducible but not comparable to wordpiece
counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .ingest import CleanPage, _atomic_text_writer


@dataclass
class LanguageStats:
    """Pages / tokens / bytes per language plus derived totals."""

    pages: dict[str, int] = field(default_factory=dict)
    tokens: dict[str, int] = field(default_factory=dict)
    bytes: dict[str, int] = field(default_factory=dict)

    @property
    def languages(self) -> list[str]:
        return sorted(self.pages)

    @property
    def total_pages(self) -> int:
        return sum(self.pages.values())

    @property
    def total_tokens(self) -> int:
        return sum(self.tokens.values())

    @property
    def total_bytes(self) -> int:
        return sum(self.bytes.values())

    def add_page(self, page: CleanPage) -> None:
        if not page.language:
            raise ValueError(f"page without language: {page.url!r}")
        lang = page.language
        self.pages[lang] = self.pages.get(lang, 0) + 1
        self.tokens[lang] = self.tokens.get(lang, 0) + sum(
            len(line.split()) for line in page.lines)
        self.bytes[lang] = self.bytes.get(lang, 0) + sum(
            len(line.encode("utf-8")) for line in page.lines)

    def merge(self, other: "LanguageStats") -> "LanguageStats":
        out = LanguageStats(pages=dict(self.pages), tokens=dict(self.tokens),
                            bytes=dict(self.bytes))
        for lang in other.pages:
            out.pages[lang] = out.pages.get(lang, 0) + other.pages[lang]
            out.tokens[lang] = out.tokens.get(lang, 0) + other.tokens[lang]
            out.bytes[lang] = out.bytes.get(lang, 0) + other.bytes[lang]
        return out

    def to_dict(self) -> dict:
        langs = self.languages
        return {
            "languages": {
                lang: {"pages": self.pages[lang], "tokens": self.tokens[lang],
                       "bytes": self.bytes[lang]}
                for lang in langs
            },
            "totals": {"pages": self.total_pages, "tokens": self.total_tokens,
                       "bytes": self.total_bytes},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LanguageStats":
        stats = cls()
        for lang, row in data["languages"].items():
            stats.pages[lang] = int(row["pages"])
            stats.tokens[lang] = int(row["tokens"])
            stats.bytes[lang] = int(row["bytes"])
        return stats

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=1)

    def save(self, path: str | Path, extra: dict | None = None) -> None:
        doc = self.to_dict()
        if extra:
            doc.update(extra)
        with _atomic_text_writer(Path(path)) as fh:
            fh.write(json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1)
                     + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "LanguageStats":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def accumulate(pages: Iterable[CleanPage]) -> LanguageStats:
    """Fold a page stream into per-language counts.

    Every page must already carry a language tag; an untagged page means an
    upstream bug, not bad data, so it raises.
    """
    stats = LanguageStats()
    for page in pages:
        stats.add_page(page)
    return stats


def apply_inclusion_threshold(stats: LanguageStats, min_pages: int = 10000) -> set[str]:
    """Languages with at least ``min_pages`` pages."""
    return {lang for lang, n in stats.pages.items() if n >= min_pages}


def export_histogram(stats: LanguageStats, alphas: list[float]) -> list[dict]:
    """Rows of (language, pages, sampling percentage per alpha), sorted by
    descending page count (ties by language code)."""
    from .mixture import compute_sampling_probs

    if not stats.pages:
        raise ValueError("empty stats")
    for alpha in alphas:
        if alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {alpha}")
    specs = {alpha: compute_sampling_probs(stats.pages, alpha) for alpha in alphas}
    rows = []
    for lang in sorted(stats.pages, key=lambda l: (-stats.pages[l], l)):
        row = {"language": lang, "pages": stats.pages[lang]}
        for alpha in alphas:
            row[f"pct_alpha_{alpha:g}"] = 100.0 * specs[alpha].probs[lang]
        rows.append(row)
    return rows


def write_histogram(stats: LanguageStats, alphas: list[float],
                    path: str | Path) -> None:
    """Serialize :func:`export_histogram` as TSV for external plotting."""
    rows = export_histogram(stats, alphas)
    header = ["language", "pages"] + [f"pct_alpha_{a:g}" for a in alphas]
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(
            [row["language"], str(row["pages"])]
            + [f"{row[f'pct_alpha_{a:g}']:.6f}" for a in alphas]))
    with _atomic_text_writer(Path(path)) as fh:
        fh.write("\n".join(lines) + "\n")
