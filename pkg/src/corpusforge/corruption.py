"""Span-corruption example construction.

A plan partitions round(n * rate) noise tokens (clamped to [1, n-1]) into
max(1, round(noise / mean_span)) spans, with both the span-length and the
gap-length compositions drawn uniformly at random. Position 0 is never
noise and spans are separated by at least one kept token, so the mean span
length stays measurable. Rounding is half-away-from-zero throughout so a
given (n, rate, mean_span) always yields the same counts.

Each text gets its own rng substream derived from (seed, stream index),
so generation order and parallelism never change the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .vocab import Vocabulary, encode


@dataclass(frozen=True)
class CorruptionParams:
    mask_rate: float = 0.15
    mean_span_len: float = 3.0
    seq_len: int = 1024
    seed: int = 0

    def validate(self) -> None:
        if not 0 < self.mask_rate < 1:
            raise ValueError(f"mask_rate must be in (0, 1), got {self.mask_rate}")
        if self.mean_span_len < 1:
            raise ValueError(f"mean_span_len must be >= 1, got {self.mean_span_len}")
        if self.seq_len < 2:
            raise ValueError(f"seq_len must be >= 2, got {self.seq_len}")


@dataclass(frozen=True)
class CorruptionExample:
    input_ids: list[int]
    target_ids: list[int]
    num_spans: int


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def _random_composition(total: int, parts: int, rng: np.random.Generator) -> list[int]:
    """Split total into parts positive integers, uniform over compositions."""
    if parts == 1:
        return [total]
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False))
    bounds = np.concatenate(([0], cuts, [total]))
    return list(np.diff(bounds).astype(int))


def plan_spans(n: int, params: CorruptionParams,
               rng: np.random.Generator) -> list[tuple[int, int]]:
    """Choose noise spans for a length-n sequence.

    Returns sorted (start, length) pairs: non-overlapping, non-adjacent,
    never starting at position 0, with lengths summing to the noise budget.
    """
    if n < 2:
        raise ValueError(f"sequence too short to corrupt: n={n}")
    params.validate()
    num_noise = max(1, _round_half_away(n * params.mask_rate))
    if num_noise >= n:
        num_noise = n - 1
    num_spans = max(1, _round_half_away(num_noise / params.mean_span_len))
    # each span needs a preceding kept token, so spans are capped by both
    # the noise budget and the non-noise budget
    num_spans = min(num_spans, num_noise, n - num_noise)

    noise_parts = _random_composition(num_noise, num_spans, rng)
    gap_parts = _random_composition(n - num_noise, num_spans, rng)
    spans = []
    pos = 0
    for gap, length in zip(gap_parts, noise_parts):
        pos += gap
        spans.append((pos, length))
        pos += length
    return spans


def build_example(ids: list[int], spans: list[tuple[int, int]],
                  vocab: Vocabulary) -> CorruptionExample:
    """Replace each span with a sentinel; target carries the dropped tokens.

    input = ids with span k collapsed to sentinel k; target = for each k,
    sentinel k then the original span tokens, then the end-of-sequence id.
    """
    if len(spans) > vocab.sentinel_count:
        raise ValueError(
            f"{len(spans)} spans exceed sentinel budget {vocab.sentinel_count}")
    for pos, token_id in enumerate(ids):
        # sentinel and end-of-sequence ids in the content would make the
        # target unsplicable, so reject them up front
        if vocab.is_sentinel(token_id) or token_id == vocab.eos_id:
            raise ValueError(
                f"reserved id {token_id} at position {pos} cannot be corrupted")
    prev_end = -1
    for start, length in spans:
        if length < 1:
            raise ValueError(f"zero-length span at {start}")
        if start <= prev_end:
            raise ValueError(f"span at {start} overlaps or touches previous span")
        if start + length > len(ids):
            raise ValueError(f"span ({start}, {length}) exceeds sequence length {len(ids)}")
        prev_end = start + length

    input_ids: list[int] = []
    target_ids: list[int] = []
    cursor = 0
    for k, (start, length) in enumerate(spans):
        sentinel = vocab.sentinel_id(k)
        input_ids.extend(ids[cursor:start])
        input_ids.append(sentinel)
        target_ids.append(sentinel)
        target_ids.extend(ids[start:start + length])
        cursor = start + length
    input_ids.extend(ids[cursor:])
    target_ids.append(vocab.eos_id)
    return CorruptionExample(input_ids=input_ids, target_ids=target_ids,
                             num_spans=len(spans))


def reconstruct(example: CorruptionExample, vocab: Vocabulary) -> list[int]:
    """Splice target spans back at sentinel positions; inverse of build_example."""
    spans: dict[int, list[int]] = {}
    current: list[int] | None = None
    for token_id in example.target_ids:
        if vocab.is_sentinel(token_id):
            current = spans.setdefault(token_id, [])
        elif token_id == vocab.eos_id:
            current = None
        else:
            if current is None:
                raise ValueError("target tokens before first sentinel")
            current.append(token_id)
    out: list[int] = []
    for token_id in example.input_ids:
        if vocab.is_sentinel(token_id):
            out.extend(spans.get(token_id, []))
        else:
            out.append(token_id)
    return out


def corrupt_stream(texts: Iterable[str], vocab: Vocabulary,
                   params: CorruptionParams) -> Iterator[CorruptionExample]:
    """Encode, truncate to seq_len, plan and build one example per text.

    Texts that encode to fewer than 2 ids cannot host a span and are
    skipped. The rng substream for text i is SeedSequence([seed, i]).
    """
    params.validate()
    for index, text in enumerate(texts):
        ids = encode(vocab, text)[:params.seq_len]
        if len(ids) < 2:
            continue
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, index]))
        spans = plan_spans(len(ids), params, rng)
        yield build_example(ids, spans, vocab)
