"""corpusforge: streaming multilingual corpus construction and pretraining-data tooling.

Stages: JSONL ingestion, language identification, the page-filter cascade,
per-language statistics, smoothed mixture sampling, byte-fallback tokenization,
span-corruption example generation, text-to-text task casting with metrics,
and training-schedule arithmetic. All stages are deterministic under a fixed
seed; the `forge` CLI ties them into reproducible pipelines.
"""

__version__ = "0.1.0"
