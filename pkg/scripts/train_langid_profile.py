"""Train the checked-in language-id profile from the fixture corpus.

Reads one training file per language from tests/fixtures/langtext/train/
and writes tests/fixtures/langid_profile.json.  Rerunning produces a
byte-identical file; regenerate whenever the training texts change.
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from corpusforge.langid import train_profiles

REPO = pathlib.Path(__file__).resolve().parent.parent
TRAIN_DIR = REPO / "tests" / "fixtures" / "langtext" / "train"
OUT_PATH = REPO / "tests" / "fixtures" / "langid_profile.json"


def load_training_texts(train_dir: pathlib.Path) -> dict[str, list[str]]:
    texts: dict[str, list[str]] = {}
    for path in sorted(train_dir.glob("*.txt")):
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
        if not lines:
            raise SystemExit(f"empty training file: {path}")
        texts[path.stem] = lines
    if not texts:
        raise SystemExit(f"no training files in {train_dir}")
    return texts


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--train-dir", type=pathlib.Path, default=TRAIN_DIR)
    parser.add_argument("--out", type=pathlib.Path, default=OUT_PATH)
    parser.add_argument("--ngram", type=int, default=3)
    parser.add_argument("--smoothing", type=float, default=1e-4)
    args = parser.parse_args()

    texts = load_training_texts(args.train_dir)
    profile = train_profiles(texts, n=args.ngram, smoothing=args.smoothing)
    profile.save(args.out)
    print(f"wrote {args.out} ({len(texts)} languages)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
