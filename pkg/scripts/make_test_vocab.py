"""Build the checked-in test vocabulary from the fixture texts.

Pieces are chosen for coverage of the fixture languages: the most frequent
whitespace-delimited words (with the leading-space marker) and the most
frequent single characters, on top of full byte coverage.  Deterministic;
rerunning produces a byte-identical tests/fixtures/test_vocab.model.
"""

import argparse
import collections
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from corpusforge.vocab import SPACE_MARKER, byte_piece

REPO = pathlib.Path(__file__).resolve().parent.parent
TEXT_DIR = REPO / "tests" / "fixtures" / "langtext"
OUT_PATH = REPO / "tests" / "fixtures" / "test_vocab.model"

SPECIALS = ("<pad>", "</s>", "<unk>")
SENTINELS = 100


def collect_pieces(text_dir: pathlib.Path, target: int) -> list[str]:
    word_counts: collections.Counter[str] = collections.Counter()
    char_counts: collections.Counter[str] = collections.Counter()
    for path in sorted(text_dir.rglob("*.txt")):
        for line in path.read_text(encoding="utf-8").splitlines():
            for word in line.split():
                word_counts[SPACE_MARKER + word] += 1
            for ch in line:
                if ch != " ":
                    char_counts[ch] += 1

    pieces: list[str] = []
    seen: set[str] = set()

    def add(piece: str) -> None:
        # raw-space and marker-only pieces collide with the encoder's
        # space handling; single bytes are covered by the byte pieces
        if piece in seen or piece == SPACE_MARKER or " " in piece:
            return
        if len(piece.encode("utf-8")) == 1:
            return
        pieces.append(piece)
        seen.add(piece)

    for ch, _ in sorted(char_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        add(ch)
        add(SPACE_MARKER + ch)
    for word, _ in sorted(word_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        add(word)
        if len(pieces) >= target:
            break
    return pieces[:target]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=OUT_PATH)
    parser.add_argument("--text-dir", type=pathlib.Path, default=TEXT_DIR)
    parser.add_argument("--size", type=int, default=1000,
                        help="piece count including specials and byte pieces")
    args = parser.parse_args()

    byte_pieces = [byte_piece(b) for b in range(256)]
    budget = args.size - len(SPECIALS) - len(byte_pieces)
    if budget <= 0:
        raise SystemExit("--size leaves no room for text pieces")
    text_pieces = collect_pieces(args.text_dir, budget)

    lines = [f"#corpusforge-vocab v1", f"#sentinels {SENTINELS}"]
    score = 0.0
    for piece in (*SPECIALS, *byte_pieces, *text_pieces):
        lines.append(f"{piece}\t{score:.1f}")
        score -= 1.0
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    total = len(SPECIALS) + len(byte_pieces) + len(text_pieces)
    print(f"wrote {args.out} ({total} pieces + {SENTINELS} sentinels)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
