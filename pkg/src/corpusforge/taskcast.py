"""Cast classification, NER, and extractive-QA data to text-to-text pairs,
parse generated text back, and score it.

Casting is pure and deterministic. The NER target serialization is
"LABEL: surface" fragments joined by " $$ " in order of appearance, with
"None" for the empty entity list; the separator is chosen so the rendering
is unambiguous and round-trippable for surfaces that avoid it. Parsing of
model output never raises: unparseable fragments are skipped and counted.

QA scoring uses the standard extractive convention: lowercase, strip
punctuation and English articles, collapse whitespace; EM is any-gold exact
match and F1 the best token-overlap harmonic mean. Entity F1 compares
(label, surface) multisets micro-averaged over the corpus, which coarsens
repeated identical surfaces into counts.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass, field

NER_SEPARATOR = " $$ "
NER_EMPTY_TARGET = "None"

XNLI_LABELS = ("entailment", "neutral", "contradiction")
PAWSX_LABELS = ("paraphrase", "not_paraphrase")

_TASK_LABELS = {"xnli": XNLI_LABELS, "pawsx": PAWSX_LABELS}
_TASK_FIELDS = {"xnli": ("premise", "hypothesis"),
                "pawsx": ("sentence1", "sentence2")}


@dataclass(frozen=True)
class TextToTextExample:
    task: str
    input_text: str
    target_text: str
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EntitySpan:
    label: str
    surface: str
    order_index: int


@dataclass(frozen=True)
class MetricResult:
    metric: str
    value: float
    counts: dict


def cast_classification(task: str, fields: dict, label: str,
                        metadata: dict | None = None) -> TextToTextExample:
    """XNLI / PAWS-X pairs become "<task> key1: ... key2: ..." with the
    literal label text as target."""
    if task not in _TASK_LABELS:
        raise ValueError(f"unknown classification task {task!r}")
    if label not in _TASK_LABELS[task]:
        raise ValueError(
            f"unknown label {label!r} for task {task}; expected one of "
            f"{', '.join(_TASK_LABELS[task])}")
    key1, key2 = _TASK_FIELDS[task]
    for key in (key1, key2):
        if key not in fields:
            raise ValueError(f"missing field {key!r} for task {task}")
    input_text = f"{task} {key1}: {fields[key1]} {key2}: {fields[key2]}"
    return TextToTextExample(task=task, input_text=input_text, target_text=label,
                             metadata=metadata or {})


def cast_ner(tokens: list[str], entities: list[EntitySpan],
             metadata: dict | None = None) -> TextToTextExample:
    """Entities rendered in order of appearance; empty list targets "None"."""
    sentence = " ".join(tokens)
    for ent in entities:
        if ent.surface not in sentence:
            raise ValueError(f"entity surface {ent.surface!r} not found in sentence")
    ordered = sorted(entities, key=lambda e: e.order_index)
    if ordered:
        target = NER_SEPARATOR.join(f"{e.label}: {e.surface}" for e in ordered)
    else:
        target = NER_EMPTY_TARGET
    return TextToTextExample(task="ner", input_text="ner: " + sentence,
                             target_text=target, metadata=metadata or {})


def parse_ner_output(text: str) -> tuple[list[EntitySpan], int]:
    """Best-effort inverse of cast_ner over untrusted model output.

    Returns (entities, malformed_fragment_count); never raises.
    """
    text = text.strip()
    if not text or text == NER_EMPTY_TARGET:
        return [], 0
    entities: list[EntitySpan] = []
    malformed = 0
    for fragment in text.split(NER_SEPARATOR):
        label, sep, surface = fragment.partition(": ")
        label = label.strip()
        surface = surface.strip()
        if not sep or not label or not surface:
            malformed += 1
            continue
        entities.append(EntitySpan(label=label, surface=surface,
                                   order_index=len(entities)))
    return entities, malformed


def cast_qa(context: str, question: str, answer: str,
            metadata: dict | None = None) -> TextToTextExample:
    if not context.strip():
        raise ValueError("empty context")
    if not answer.strip():
        raise ValueError("empty answer")
    input_text = f"question: {question} context: {context}"
    return TextToTextExample(task="qa", input_text=input_text, target_text=answer,
                             metadata=metadata or {})


_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation and articles, collapse whitespace."""
    text = text.lower()
    text = text.translate(_PUNCT_TABLE)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def _f1_counts(prediction: str, gold: str) -> tuple[int, int, int]:
    pred_tokens = normalize_answer(prediction).split()
    gold_tokens = normalize_answer(gold).split()
    tp = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    return tp, len(pred_tokens) - tp, len(gold_tokens) - tp


def qa_metrics(prediction: str, golds: list[str]) -> tuple[MetricResult, MetricResult]:
    """Per-example (F1, EM) against one or more gold answers."""
    if not golds:
        raise ValueError("need at least one gold answer")
    norm_pred = normalize_answer(prediction)
    em = int(any(norm_pred == normalize_answer(g) for g in golds))

    f1 = -1.0
    tp = fp = fn = 0
    for gold in golds:
        g_tp, g_fp, g_fn = _f1_counts(prediction, gold)
        if g_tp + g_fp + g_fn == 0:
            # both empty after normalization: exact agreement
            g_f1 = 1.0
        elif g_tp == 0:
            g_f1 = 0.0
        else:
            g_f1 = 2 * g_tp / (2 * g_tp + g_fp + g_fn)
        if g_f1 > f1:
            f1, tp, fp, fn = g_f1, g_tp, g_fp, g_fn
    return (
        MetricResult(metric="f1", value=f1, counts={"tp": tp, "fp": fp, "fn": fn}),
        MetricResult(metric="em", value=float(em), counts={"correct": em, "total": 1}),
    )


def qa_dataset_scores(predictions: list[str],
                      golds: list[list[str]]) -> dict[str, float]:
    """Dataset-level F1/EM: means over examples, scaled to 0-100."""
    if len(predictions) != len(golds):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions, {len(golds)} golds")
    if not predictions:
        raise ValueError("empty evaluation set")
    f1_total = em_total = 0.0
    for pred, gold in zip(predictions, golds):
        f1, em = qa_metrics(pred, gold)
        f1_total += f1.value
        em_total += em.value
    n = len(predictions)
    return {"f1": 100.0 * f1_total / n, "em": 100.0 * em_total / n}


def _span_multiset(spans: list[EntitySpan]) -> Counter:
    return Counter((s.label, s.surface) for s in spans)


def entity_f1(predicted: list[EntitySpan], gold: list[EntitySpan]) -> MetricResult:
    """Sentence-level F1 on (label, surface) multisets."""
    return entity_f1_corpus([predicted], [gold])


def entity_f1_corpus(predicted: list[list[EntitySpan]],
                     gold: list[list[EntitySpan]]) -> MetricResult:
    """Micro-averaged F1: counts pooled over all sentences before the ratio."""
    if len(predicted) != len(gold):
        raise ValueError(
            f"length mismatch: {len(predicted)} predictions, {len(gold)} golds")
    tp = fp = fn = 0
    for pred_spans, gold_spans in zip(predicted, gold):
        pred_ms = _span_multiset(pred_spans)
        gold_ms = _span_multiset(gold_spans)
        overlap = sum((pred_ms & gold_ms).values())
        tp += overlap
        fp += sum(pred_ms.values()) - overlap
        fn += sum(gold_ms.values()) - overlap
    value = 1.0 if tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn)
    return MetricResult(metric="entity_f1", value=value,
                        counts={"tp": tp, "fp": fp, "fn": fn})


def accuracy(predictions: list[str], golds: list[str]) -> MetricResult:
    """Exact-match rate after whitespace trim."""
    if len(predictions) != len(golds):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions, {len(golds)} golds")
    if not predictions:
        raise ValueError("empty evaluation set")
    correct = sum(1 for p, g in zip(predictions, golds) if p.strip() == g.strip())
    return MetricResult(metric="accuracy", value=correct / len(predictions),
                        counts={"correct": correct, "total": len(predictions)})
