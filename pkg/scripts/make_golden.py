"""Regenerate the checked-in golden pipeline outputs.

Runs the CLI end to end on the fixture corpus with a fixed seed:
clean -> stats (with histogram) -> mix -> corrupt -> plan, writing into
tests/golden/.  The determinism acceptance test reruns the same commands
into a scratch directory and requires byte-identical files, so regenerate
the goldens whenever fixtures or pipeline behavior intentionally change.
"""

import pathlib
import shutil
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from corpusforge.cli import main as forge

REPO = pathlib.Path(__file__).resolve().parent.parent
FIX = REPO / "tests" / "fixtures"
GOLDEN = REPO / "tests" / "golden"

SEED = 7


def run(out_dir: pathlib.Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    steps = [
        ["clean",
         "--in", str(FIX / "corpus" / "shard-*"),
         "--out", str(out_dir),
         "--report", str(out_dir / "report.json"),
         "--profile", str(FIX / "langid_profile.json"),
         "--badwords", str(FIX / "badwords"),
         "--seed", str(SEED)],
        ["stats",
         "--in", str(out_dir),
         "--out", str(out_dir / "stats.json"),
         "--histogram", str(out_dir / "hist.tsv"),
         "--seed", str(SEED)],
        ["mix",
         "--stats", str(out_dir / "stats.json"),
         "--in", str(out_dir),
         "--out", str(out_dir / "mixture.jsonl"),
         "--n", "400",
         "--alpha", "0.3",
         "--seed", str(SEED)],
        ["corrupt",
         "--in", str(out_dir / "mixture.jsonl"),
         "--out", str(out_dir / "examples.jsonl"),
         "--vocab", str(FIX / "test_vocab.model"),
         "--seq-len", "128",
         "--seed", str(SEED)],
        ["plan",
         "--out", str(out_dir / "plan.json"),
         "--seed", str(SEED)],
    ]
    for argv in steps:
        code = forge(argv)
        if code != 0:
            raise SystemExit(f"forge {argv[0]} failed with exit code {code}")


def main() -> int:
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    run(GOLDEN)
    for path in sorted(GOLDEN.iterdir()):
        print(f"wrote {path} ({path.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
