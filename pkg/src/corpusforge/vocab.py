"""Fixed wordpiece inventory with byte fallback and sentinel ids.

Vocab file format (version-tagged, one piece per line, optional
tab-separated score):

    #corpusforge-vocab v1
    #pad <pad>
    #eos </s>
    #unk <unk>
    #sentinels 100
    <pad>
    </s>
    <unk>
    <0x00>
    ...
    ▁the\t-2.5

Ids follow file order; any of the 256 byte pieces ``<0xNN>`` missing from
the file are synthesized at the end and reported on the loaded object.
Sentinels live above all pieces: sentinel i has id V-1-i, so ids stay dense
0..V-1 and changing sentinel_count never renumbers pieces.

Encoding is greedy longest-match over a marked view of the text where every
space is the visible-space marker ▁ and every literal ▁ is an
unmatchable placeholder, so literal markers always take the byte-fallback
path and decoding can map ▁ back to a space unconditionally. That makes
decode(encode(s)) == s for every valid-UTF-8 string. This segmentation is
deterministic but not unigram-LM Viterbi, so piece boundaries need not match
any externally trained tokenizer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

SPACE_MARKER = "▁"
_BYTE_PIECE_RE = re.compile(r"^<0x([0-9A-Fa-f]{2})>$")
_SENTINEL_TEXT_RE = re.compile(r"^<extra_id_\d+>$")
FORMAT_MAGIC = "#corpusforge-vocab v1"


def byte_piece(value: int) -> str:
    return f"<0x{value:02X}>"


@dataclass
class Vocabulary:
    """Immutable after load; encode/decode are safe to call concurrently."""

    pieces: list[str]
    byte_ids: list[int]
    sentinel_count: int
    pad_id: int
    eos_id: int
    unk_id: int
    synthesized_bytes: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.piece_to_id = {p: i for i, p in enumerate(self.pieces)}
        self._id_to_byte = {pid: b for b, pid in enumerate(self.byte_ids)}
        specials = {self.pad_id, self.eos_id, self.unk_id}
        self._match = {
            p: i for p, i in self.piece_to_id.items()
            if i not in specials and i not in self._id_to_byte
        }
        self._max_piece_len = max((len(p) for p in self._match), default=1)

    @property
    def size(self) -> int:
        return len(self.pieces) + self.sentinel_count

    def sentinel_id(self, i: int) -> int:
        if not 0 <= i < self.sentinel_count:
            raise ValueError(f"sentinel index {i} out of range 0..{self.sentinel_count - 1}")
        return self.size - 1 - i

    def is_sentinel(self, token_id: int) -> bool:
        return self.size - self.sentinel_count <= token_id < self.size

    def sentinel_index(self, token_id: int) -> int:
        if not self.is_sentinel(token_id):
            raise ValueError(f"id {token_id} is not a sentinel")
        return self.size - 1 - token_id


def load_vocab(path: str | Path) -> Vocabulary:
    """Parse a vocab file into a Vocabulary, synthesizing missing byte pieces."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#corpusforge-vocab"):
        raise ValueError(f"{path}: missing vocab format tag {FORMAT_MAGIC!r}")
    if lines[0].strip() != FORMAT_MAGIC:
        raise ValueError(f"{path}: unsupported vocab format {lines[0].strip()!r}")

    header = {"pad": "<pad>", "eos": "</s>", "unk": "<unk>"}
    sentinel_count = 100
    pieces: list[str] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) == 2 and parts[0] in ("pad", "eos", "unk"):
                header[parts[0]] = parts[1].strip()
            elif len(parts) == 2 and parts[0] == "sentinels":
                sentinel_count = int(parts[1])
            continue
        piece = line.split("\t", 1)[0]
        if not piece:
            raise ValueError(f"{path}: empty piece at line {lineno}")
        if "\x00" in piece or " " in piece:
            raise ValueError(
                f"{path}: piece {piece!r} at line {lineno} contains a raw space "
                f"or NUL; use the {SPACE_MARKER} marker for word boundaries")
        if _SENTINEL_TEXT_RE.match(piece):
            raise ValueError(
                f"{path}: piece {piece!r} at line {lineno} collides with the "
                f"sentinel rendering")
        if piece in seen:
            raise ValueError(
                f"{path}: duplicate piece {piece!r} at line {lineno} "
                f"(first at line {seen[piece]})")
        seen[piece] = lineno
        pieces.append(piece)
    if not pieces:
        raise ValueError(f"{path}: empty vocabulary file")
    if sentinel_count < 0:
        raise ValueError(f"{path}: sentinel count must be >= 0, got {sentinel_count}")

    for name in ("pad", "eos", "unk"):
        if header[name] not in seen:
            raise ValueError(f"{path}: special piece {header[name]!r} ({name}) "
                             f"not in vocabulary")

    synthesized = []
    present = set(pieces)
    for b in range(256):
        if byte_piece(b) not in present:
            pieces.append(byte_piece(b))
            synthesized.append(b)
    piece_to_id = {p: i for i, p in enumerate(pieces)}
    byte_ids = [piece_to_id[byte_piece(b)] for b in range(256)]
    return Vocabulary(
        pieces=pieces,
        byte_ids=byte_ids,
        sentinel_count=sentinel_count,
        pad_id=piece_to_id[header["pad"]],
        eos_id=piece_to_id[header["eos"]],
        unk_id=piece_to_id[header["unk"]],
        synthesized_bytes=synthesized,
    )


def encode(vocab: Vocabulary, text: str) -> list[int]:
    """Greedy longest-match segmentation with per-byte fallback.

    Total on valid UTF-8: any position no piece covers contributes the
    UTF-8 bytes of the original character.
    """
    view = []
    for ch in text:
        if ch == " ":
            view.append(SPACE_MARKER)
        elif ch == SPACE_MARKER:
            view.append("\x00")
        else:
            view.append(ch)
    marked = "".join(view)

    ids: list[int] = []
    match = vocab._match
    byte_ids = vocab.byte_ids
    i = 0
    n = len(text)
    while i < n:
        piece_id = None
        for length in range(min(vocab._max_piece_len, n - i), 0, -1):
            piece_id = match.get(marked[i:i + length])
            if piece_id is not None:
                i += length
                break
        if piece_id is not None:
            ids.append(piece_id)
        else:
            for b in text[i].encode("utf-8"):
                ids.append(byte_ids[b])
            i += 1
    return ids


def decode(vocab: Vocabulary, ids: list[int]) -> str:
    """Inverse of encode: pieces concatenated, byte runs reassembled.

    Byte-fallback runs are inserted verbatim (no marker-to-space mapping),
    which is exactly what makes literal markers survive the round trip.
    """
    out: list[str] = []
    byte_run = bytearray()
    run_start = -1

    def flush() -> None:
        nonlocal run_start
        if byte_run:
            try:
                out.append(byte_run.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise ValueError(
                    f"invalid UTF-8 in byte-fallback run starting at ids[{run_start}]: "
                    f"byte offset {exc.start} in run") from exc
            byte_run.clear()
        run_start = -1

    for pos, token_id in enumerate(ids):
        if not 0 <= token_id < vocab.size:
            raise ValueError(f"unknown id {token_id} (vocabulary size {vocab.size})")
        byte_value = vocab._id_to_byte.get(token_id)
        if byte_value is not None:
            if not byte_run:
                run_start = pos
            byte_run.append(byte_value)
            continue
        flush()
        if vocab.is_sentinel(token_id):
            out.append(f"<extra_id_{vocab.sentinel_index(token_id)}>")
        else:
            out.append(vocab.pieces[token_id].replace(SPACE_MARKER, " "))
    flush()
    return "".join(out)
