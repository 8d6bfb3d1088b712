"""Smoothed language-mixture sampling.

p(L) is proportional to |L|^alpha with |L| measured in pages; alpha < 1
boosts low-resource languages. Weights are formed in log space so extreme
count ratios cannot overflow. The sampler is deterministic given the seed:
language draws come from one substream, each language's store cycles through
seeded reshuffles on its own substream, so output never depends on
consumption interleaving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .ingest import _atomic_text_writer


@dataclass(frozen=True)
class MixtureSpec:
    alpha: float
    counts: dict[str, int]
    probs: dict[str, float]


def compute_sampling_probs(counts: Mapping[str, int], alpha: float) -> MixtureSpec:
    """Normalize count^alpha over languages.

    Zero-count languages get probability exactly 0; everything else is
    positive, sums to 1, and preserves the count ordering for any alpha > 0.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    positive = {lang: c for lang, c in counts.items() if c > 0}
    if any(c < 0 for c in counts.values()):
        raise ValueError("negative counts")
    if not positive:
        raise ValueError("all counts are zero")
    langs = sorted(positive)
    log_w = np.array([alpha * math.log(positive[lang]) for lang in langs])
    log_w -= log_w.max()
    weights = np.exp(log_w)
    normed = weights / weights.sum()
    probs = {lang: 0.0 for lang in counts}
    for lang, p in zip(langs, normed):
        probs[lang] = float(p)
    return MixtureSpec(alpha=alpha, counts=dict(counts), probs=probs)


class _CyclicStore:
    """Epoch iterator over one language's examples: a seeded permutation per
    epoch, reshuffled when exhausted, so low-resource stores repeat."""

    def __init__(self, examples: Sequence, rng: np.random.Generator):
        self.examples = examples
        self.rng = rng
        self.order: list[int] = []
        self.pos = 0

    def next(self):
        if self.pos >= len(self.order):
            self.order = list(self.rng.permutation(len(self.examples)))
            self.pos = 0
        item = self.examples[self.order[self.pos]]
        self.pos += 1
        return item


def _open_stores(spec: MixtureSpec, stores: Mapping[str, Sequence],
                 seed: int) -> tuple[list[str], np.ndarray, dict[str, _CyclicStore]]:
    langs = sorted(lang for lang, p in spec.probs.items() if p > 0)
    for lang in langs:
        if lang not in stores or len(stores[lang]) == 0:
            raise ValueError(f"no examples available for language {lang!r}")
    probs = np.array([spec.probs[lang] for lang in langs])
    probs = probs / probs.sum()
    cyclic = {
        lang: _CyclicStore(stores[lang],
                           np.random.default_rng(np.random.SeedSequence([seed, 1 + i])))
        for i, lang in enumerate(langs)
    }
    return langs, probs, cyclic


def sample_mixture(spec: MixtureSpec, stores: Mapping[str, Sequence], n: int,
                   seed: int) -> Iterator[tuple[str, object]]:
    """Draw n (language, example) pairs i.i.d. over languages.

    Fails up front, not mid-stream, if any positive-probability language has
    an empty store.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    langs, probs, cyclic = _open_stores(spec, stores, seed)
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    lang_rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    for _ in range(n):
        idx = int(np.searchsorted(cum, lang_rng.random(), side="right"))
        lang = langs[min(idx, len(langs) - 1)]
        yield lang, cyclic[lang].next()


def export_tokenizer_sample(spec: MixtureSpec, stores: Mapping[str, Sequence[str]],
                            n_chars: int, seed: int, path: str | Path) -> int:
    """Write roughly n_chars of one-line-per-example text whose per-language
    character shares follow p(L); returns the number of lines written.

    Each language fills a char budget of p(L) * n_chars from its own cyclic
    store, so the share error is bounded by one line length per language.
    """
    if n_chars < 0:
        raise ValueError(f"n_chars must be >= 0, got {n_chars}")
    langs, probs, cyclic = _open_stores(spec, stores, seed)
    for lang in langs:
        if all(not str(ex).strip() for ex in stores[lang]):
            raise ValueError(f"store for language {lang!r} has no usable text")
    lines_written = 0
    with _atomic_text_writer(Path(path)) as fh:
        if n_chars > 0:
            for lang, p in zip(langs, probs):
                budget = p * n_chars
                written = 0
                while written < budget:
                    line = str(cyclic[lang].next()).replace("\n", " ").strip()
                    if not line:
                        continue
                    fh.write(line + "\n")
                    written += len(line)
                    lines_written += 1
    return lines_written
