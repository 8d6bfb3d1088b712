"""Pretraining schedule arithmetic and the exported training-config document.

The package never runs training; this module exists so external trainers
get the exact schedule constants (inverse-sqrt learning rate with warmup,
batch/sequence geometry, no dropout during pretraining, fine-tune constants)
from one audited place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .ingest import _atomic_text_writer


@dataclass(frozen=True)
class SchedulePlan:
    warmup_steps: int = 10**4
    total_steps: int = 10**6
    batch_size: int = 1024
    seq_len: int = 1024
    finetune_lr: float = 0.001
    finetune_dropout: float = 0.1

    def validate(self) -> None:
        for name in ("warmup_steps", "total_steps", "batch_size", "seq_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.warmup_steps > self.total_steps:
            raise ValueError(
                f"warmup_steps {self.warmup_steps} exceeds total_steps {self.total_steps}")
        if self.finetune_lr <= 0:
            raise ValueError(f"finetune_lr must be > 0, got {self.finetune_lr}")
        if not 0 <= self.finetune_dropout < 1:
            raise ValueError(
                f"finetune_dropout must be in [0, 1), got {self.finetune_dropout}")


def learning_rate(n: int, k: int = 10**4) -> float:
    """1 / sqrt(max(n, k)): constant at 1/sqrt(k) through warmup, then decaying."""
    if k < 1:
        raise ValueError(f"warmup steps must be >= 1, got {k}")
    if n < 0:
        raise ValueError(f"step must be >= 0, got {n}")
    return 1.0 / math.sqrt(max(n, k))


def token_budget(plan: SchedulePlan) -> int:
    """total_steps * batch_size * seq_len input tokens (exact integer)."""
    plan.validate()
    return plan.total_steps * plan.batch_size * plan.seq_len


def export_plan(plan: SchedulePlan) -> dict:
    """Machine-readable schedule document for external trainers."""
    plan.validate()
    return {
        "schedule": {
            "learning_rate": "1/sqrt(max(step, warmup_steps))",
            "warmup_steps": plan.warmup_steps,
            "total_steps": plan.total_steps,
            "batch_size": plan.batch_size,
            "seq_len": plan.seq_len,
            "lr_at_step_0": learning_rate(0, plan.warmup_steps),
            "lr_at_final_step": learning_rate(plan.total_steps, plan.warmup_steps),
        },
        "token_budget": token_budget(plan),
        "pretrain_dropout": 0.0,
        "finetune": {
            "learning_rate": plan.finetune_lr,
            "dropout": plan.finetune_dropout,
        },
        "checkpoint_every_steps": 200,
    }


def save_plan(plan: SchedulePlan, path: str | Path) -> None:
    with _atomic_text_writer(Path(path)) as fh:
        fh.write(json.dumps(export_plan(plan), sort_keys=True, indent=1) + "\n")
