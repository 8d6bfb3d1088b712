"""The ``forge`` command: clean / stats / mix / corrupt / cast / eval / plan.

Every flag has a config-file equivalent (``key = value`` lines, ``#``
comments); flags override config. A single seed (flag, config, or the
FORGE_SEED environment variable, in that precedence) governs all
randomness. Outputs are written atomically, so a failed stage never leaves
a partial file under its final name.
"""

from __future__ import annotations

import argparse
import glob
import itertools
import json
import os
import sys
from pathlib import Path

from . import cleanse, corruption, ingest, mixture, stats, taskcast, trainplan
from .langid import LangProfile


def load_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; later keys win; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(),
                                  start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {lineno}: expected key = value, "
                             f"got {line.strip()!r}")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


class Settings:
    """Flag-over-config-over-default resolution with typed casts."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: dict[str, str] = {}
        if getattr(args, "config", None):
            self.config = load_config(args.config)

    def get(self, name: str, default=None, cast=str):
        value = getattr(self.args, name, None)
        if value is None:
            value = self.config.get(name)
            if value is not None and cast is bool:
                value = value.lower() in ("1", "true", "yes", "on")
            elif value is not None:
                value = cast(value)
        if value is None:
            value = default
        return value

    def require(self, name: str, cast=str):
        value = self.get(name, cast=cast)
        if value is None:
            raise ValueError(f"missing required setting {name!r} "
                             f"(flag --{name.replace('_', '-')} or config key)")
        return value

    def seed(self) -> int:
        value = self.get("seed", cast=int)
        if value is None:
            env = os.environ.get("FORGE_SEED")
            if env is not None:
                value = int(env)
        if value is None:
            raise ValueError("no seed: pass --seed, set seed in the config, "
                             "or set FORGE_SEED")
        return value


def _jsonl_records(path: str | Path):
    for lineno, line in ingest._decoded_lines(path):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise ingest.CorpusFormatError(
                f"malformed record at line {lineno} in {path}: {exc.msg}") from exc


def _write_jsonl(path: Path, records) -> int:
    count = 0
    with ingest._atomic_text_writer(path) as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


def cmd_clean(args: argparse.Namespace) -> int:
    settings = Settings(args)
    pattern = settings.require("in")
    out_dir = Path(settings.require("out"))
    files = sorted(glob.glob(pattern))
    if not files:
        raise ValueError(f"no input files match {pattern!r}")
    profile = LangProfile.load(settings.require("profile"))

    config = cleanse.FilterConfig(
        enable_line_length=settings.get("enable_line_length", True, cast=bool),
        min_long_lines=settings.get("min_long_lines", 3, cast=int),
        min_line_chars=settings.get("min_line_chars", 200, cast=int),
        enable_dedup=settings.get("enable_dedup", True, cast=bool),
        enable_badwords=settings.get("enable_badwords", True, cast=bool),
        badwords_dir=settings.get("badwords"),
        c4_mode=settings.get("c4_mode", False, cast=bool),
        confidence_threshold=settings.get("confidence_threshold", 0.70, cast=float),
        english_prob_threshold=settings.get("english_prob_threshold", 0.99, cast=float),
        seed=settings.get("seed", 0, cast=int),
    )
    parallelism = settings.get("parallelism", 1, cast=int)
    docs = itertools.chain.from_iterable(ingest.read_documents(f) for f in files)
    pages, report = cleanse.run_cascade(config, docs, profile,
                                        parallelism=parallelism)
    written = ingest.write_pages(pages, out_dir / "cleaned.jsonl")
    report_path = settings.get("report") or str(out_dir / "report.json")
    report.save(report_path)
    stage_counts = report.to_dict()
    total_in = stage_counts.get("line_length", {}).get("pages_in", written)
    print(f"clean: {total_in} pages in, {written} pages out "
          f"({len(files)} input files); report: {report_path}")
    return 0


def _read_pages_dir(directory: str | Path):
    files = sorted(Path(directory).glob("*.jsonl")) + sorted(
        Path(directory).glob("*.jsonl.gz"))
    if not files:
        raise ValueError(f"no page files (*.jsonl) in {directory}")
    for path in files:
        yield from ingest.read_pages(path)


def cmd_stats(args: argparse.Namespace) -> int:
    settings = Settings(args)
    in_dir = settings.require("in")
    out_path = settings.require("out")
    # no path is recorded: outputs must be byte-identical wherever they land
    collected = stats.accumulate(_read_pages_dir(in_dir))
    collected.save(out_path)
    histogram = settings.get("histogram")
    if histogram:
        alphas = [float(a) for a in settings.get("alphas", "0.2,0.3,0.7").split(",")]
        stats.write_histogram(collected, alphas, histogram)
    print(f"stats: {collected.total_pages} pages, "
          f"{len(collected.languages)} languages -> {out_path}")
    return 0


def cmd_mix(args: argparse.Namespace) -> int:
    settings = Settings(args)
    stats_path = settings.require("stats")
    doc = json.loads(Path(stats_path).read_text(encoding="utf-8"))
    counts = {lang: row["pages"] for lang, row in doc["languages"].items()}
    pages_dir = settings.get("in") or doc.get("source")
    if not pages_dir:
        raise ValueError("no page source: pass --in or use a stats file that "
                         "records one")
    alpha = settings.get("alpha", 0.3, cast=float)
    n = settings.require("n", cast=int)
    seed = settings.seed()

    stores: dict[str, list[str]] = {}
    for page in _read_pages_dir(pages_dir):
        if page.language:
            stores.setdefault(page.language, []).append(page.text())
    spec = mixture.compute_sampling_probs(counts, alpha)
    records = (
        {"index": i, "language": lang, "text": text}
        for i, (lang, text) in enumerate(mixture.sample_mixture(spec, stores, n, seed))
    )
    out_path = Path(settings.require("out"))
    written = _write_jsonl(out_path, records)
    print(f"mix: {written} examples at alpha={alpha:g} seed={seed} -> {out_path}")
    return 0


def cmd_corrupt(args: argparse.Namespace) -> int:
    settings = Settings(args)
    from .vocab import load_vocab

    vocab = load_vocab(settings.require("vocab"))
    params = corruption.CorruptionParams(
        mask_rate=settings.get("rate", 0.15, cast=float),
        mean_span_len=settings.get("mean_span", 3.0, cast=float),
        seq_len=settings.get("seq_len", 1024, cast=int),
        seed=settings.seed(),
    )
    in_path = settings.require("in")

    def texts():
        for lineno, record in _jsonl_records(in_path):
            if "text" not in record:
                raise ingest.CorpusFormatError(
                    f"missing field text at line {lineno} in {in_path}")
            yield record["text"]

    examples = (
        {"input_ids": ex.input_ids, "num_spans": ex.num_spans,
         "target_ids": ex.target_ids}
        for ex in corruption.corrupt_stream(texts(), vocab, params)
    )
    out_path = Path(settings.require("out"))
    written = _write_jsonl(out_path, examples)
    print(f"corrupt: {written} examples (rate={params.mask_rate:g}, "
          f"mean_span={params.mean_span_len:g}, seq_len={params.seq_len}) "
          f"-> {out_path}")
    return 0


def _entities_from_record(record: dict) -> list[taskcast.EntitySpan]:
    return [
        taskcast.EntitySpan(label=e["label"], surface=e["surface"], order_index=i)
        for i, e in enumerate(record.get("entities", []))
    ]


def _gold_answers(record: dict) -> list[str]:
    if "answers" in record:
        return list(record["answers"])
    if "answer" in record:
        return [record["answer"]]
    raise ValueError("gold record has neither 'answer' nor 'answers'")


def cmd_cast(args: argparse.Namespace) -> int:
    settings = Settings(args)
    task = settings.require("task")
    in_path = settings.require("in")

    def examples():
        for lineno, record in _jsonl_records(in_path):
            try:
                if task in ("xnli", "pawsx"):
                    ex = taskcast.cast_classification(task, record, record["label"])
                elif task == "ner":
                    ex = taskcast.cast_ner(record["tokens"],
                                           _entities_from_record(record))
                elif task == "qa":
                    ex = taskcast.cast_qa(record["context"], record["question"],
                                          _gold_answers(record)[0])
                else:
                    raise ValueError(f"unknown task {task!r}")
            except (KeyError, ValueError) as exc:
                detail = (f"missing field {exc}" if isinstance(exc, KeyError)
                          else str(exc))
                raise ValueError(f"line {lineno} in {in_path}: {detail}") from exc
            out = {"task": ex.task, "input": ex.input_text, "target": ex.target_text}
            if "id" in record:
                out["id"] = record["id"]
            yield out

    out_path = Path(settings.require("out"))
    written = _write_jsonl(out_path, examples())
    print(f"cast: {written} {task} examples -> {out_path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    settings = Settings(args)
    task = settings.require("task")
    pred_path = settings.require("pred")
    gold_path = settings.require("gold")
    predictions = Path(pred_path).read_text(encoding="utf-8").splitlines()
    golds = [record for _, record in _jsonl_records(gold_path)]
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predictions but {len(golds)} "
                         f"gold records")

    if task == "qa":
        scores = taskcast.qa_dataset_scores(predictions,
                                            [_gold_answers(g) for g in golds])
        metrics = {"task": "qa", "examples": len(golds), **scores}
    elif task == "ner":
        parsed = [taskcast.parse_ner_output(p) for p in predictions]
        result = taskcast.entity_f1_corpus(
            [spans for spans, _ in parsed],
            [_entities_from_record(g) for g in golds])
        metrics = {"task": "ner", "examples": len(golds),
                   "entity_f1": 100.0 * result.value,
                   "counts": result.counts,
                   "malformed_fragments": sum(bad for _, bad in parsed)}
    elif task in ("xnli", "pawsx"):
        result = taskcast.accuracy(predictions, [g["label"] for g in golds])
        metrics = {"task": task, "examples": len(golds),
                   "accuracy": 100.0 * result.value, "counts": result.counts}
    else:
        raise ValueError(f"unknown task {task!r}")

    out_path = Path(settings.require("out"))
    with ingest._atomic_text_writer(out_path) as fh:
        fh.write(json.dumps(metrics, ensure_ascii=False, sort_keys=True, indent=1)
                 + "\n")
    summary = {k: v for k, v in metrics.items()
               if isinstance(v, float)}
    print(f"eval: {task} on {len(golds)} examples -> "
          + ", ".join(f"{k}={v:.2f}" for k, v in sorted(summary.items())))
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    settings = Settings(args)
    plan = trainplan.SchedulePlan(
        warmup_steps=settings.get("warmup_steps", 10**4, cast=int),
        total_steps=settings.get("total_steps", 10**6, cast=int),
        batch_size=settings.get("batch_size", 1024, cast=int),
        seq_len=settings.get("seq_len", 1024, cast=int),
    )
    out_path = settings.require("out")
    trainplan.save_plan(plan, out_path)
    print(f"plan: token budget {trainplan.token_budget(plan):,} -> {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Streaming toolkit for multilingual web-corpus cleaning, "
                    "mixture sampling, and span-corruption pretraining data.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="rng seed (or FORGE_SEED)")
        p.set_defaults(func=func)
        return p

    p = add("clean", cmd_clean, "run the filter cascade over raw documents")
    p.add_argument("--in", dest="in", help="input JSONL glob")
    p.add_argument("--out", help="output directory")
    p.add_argument("--report", help="filter report path (default <out>/report.json)")
    p.add_argument("--profile", help="language-id profile JSON")
    p.add_argument("--badwords", help="directory of per-language wordlists")
    p.add_argument("--parallelism", type=int, help="worker threads")
    p.add_argument("--c4", dest="c4_mode", action="store_const", const=True,
                   help="monolingual mode: terminal-punctuation line filter "
                        "and a 0.99 English gate")
    p.add_argument("--no-line-length", dest="enable_line_length",
                   action="store_const", const=False)
    p.add_argument("--no-dedup", dest="enable_dedup",
                   action="store_const", const=False)
    p.add_argument("--no-badwords", dest="enable_badwords",
                   action="store_const", const=False)
    p.add_argument("--min-long-lines", dest="min_long_lines", type=int)
    p.add_argument("--min-line-chars", dest="min_line_chars", type=int)
    p.add_argument("--confidence-threshold", dest="confidence_threshold", type=float)

    p = add("stats", cmd_stats, "per-language statistics over cleaned pages")
    p.add_argument("--in", dest="in", help="directory of cleaned page JSONL")
    p.add_argument("--out", help="stats JSON path")
    p.add_argument("--histogram", help="histogram TSV path")
    p.add_argument("--alphas", help="comma-separated smoothing exponents")

    p = add("mix", cmd_mix, "sample a smoothed language mixture")
    p.add_argument("--stats", help="stats JSON from `forge stats`")
    p.add_argument("--alpha", type=float, help="smoothing exponent (default 0.3)")
    p.add_argument("--n", type=int, help="number of examples to draw")
    p.add_argument("--in", dest="in", help="pages directory (default: stats source)")
    p.add_argument("--out", help="mixture JSONL path")

    p = add("corrupt", cmd_corrupt, "build span-corruption examples")
    p.add_argument("--vocab", help="vocabulary file")
    p.add_argument("--in", dest="in", help="mixture JSONL with a text field")
    p.add_argument("--out", help="examples JSONL path")
    p.add_argument("--rate", type=float, help="mask rate (default 0.15)")
    p.add_argument("--mean-span", dest="mean_span", type=float,
                   help="mean noise span length (default 3)")
    p.add_argument("--seq-len", dest="seq_len", type=int,
                   help="max encoded length (default 1024)")

    p = add("cast", cmd_cast, "cast labeled data to text-to-text pairs")
    p.add_argument("--task", choices=["xnli", "pawsx", "ner", "qa"])
    p.add_argument("--in", dest="in", help="gold JSONL")
    p.add_argument("--out", help="text-to-text JSONL path")

    p = add("eval", cmd_eval, "score predictions against gold data")
    p.add_argument("--task", choices=["xnli", "pawsx", "ner", "qa"])
    p.add_argument("--pred", help="predictions, one per line")
    p.add_argument("--gold", help="gold JSONL")
    p.add_argument("--out", help="metrics JSON path")

    p = add("plan", cmd_plan, "export the training-schedule document")
    p.add_argument("--out", help="plan JSON path")
    p.add_argument("--total-steps", dest="total_steps", type=int)
    p.add_argument("--warmup-steps", dest="warmup_steps", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--seq-len", dest="seq_len", type=int)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        print(f"forge {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
