"""Build the checked-in raw fixture corpus and bad-words lists.

Produces three JSONL shards (the last one gzipped) under
tests/fixtures/corpus/ plus per-language blocklists under
tests/fixtures/badwords/.  The corpus is seeded and deterministic, and is
shaped so every cascade stage has work to do:

* bulk pages per language with globally unique long lines,
* shared boilerplate lines that later pages repeat (line dedup fodder),
* pages whose long lines are all boilerplate, leaving a short ambiguous
  tail that fails the confidence gate once the duplicates are gone,
* pages that are nothing but boilerplate (emptied by dedup),
* pages with too few long lines (line-length filter fodder; they survive
  when that filter is disabled),
* pages carrying a blocklisted word, plus a near-miss where the word only
  appears inside a longer token.
"""

import gzip
import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from corpusforge.langid import LangProfile, classify

REPO = pathlib.Path(__file__).resolve().parent.parent
TRAIN_DIR = REPO / "tests" / "fixtures" / "langtext" / "train"
CORPUS_DIR = REPO / "tests" / "fixtures" / "corpus"
BADWORDS_DIR = REPO / "tests" / "fixtures" / "badwords"
PROFILE_PATH = REPO / "tests" / "fixtures" / "langid_profile.json"

LANGS = ("en", "de", "fr", "es", "ru", "ja")
BULK_DOCS = {"en": 30, "de": 22, "fr": 16, "es": 14, "ru": 12, "ja": 10}
SEED = 20240601

# invented tokens, one list per language with a blocklist
BADWORDS = {
    "en": ["florgle", "wuzzlefrump"],
    "de": ["blorgheim"],
    "ja": ["ゾルグボン"],
}

BOILER = [
    ("Subscribe to our newsletter for weekly updates about events in the town "
     "and surrounding villages including market days concerts lectures readings "
     "and the seasonal festival programme with opening hours for every venue."),
    ("All rights reserved by the publisher of this site and its partner "
     "organisations; reproduction of articles photographs and illustrations in "
     "any form requires prior written permission from the editorial office."),
]

SHORT_TAILS = [
    "Ref 4417 - 3308 / 22",
    "Tel. +00 555 0199 / Fax +00 555 0198",
]


def load_sentences() -> dict[str, list[str]]:
    out = {}
    for code in LANGS:
        path = TRAIN_DIR / f"{code}.txt"
        out[code] = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln]
    return out


def make_line(sentences: list[str], rng: np.random.Generator, code: str,
              serial: int) -> str:
    """One unique line of >=200 chars built from shuffled train sentences."""
    joiner = "" if code == "ja" else " "
    order = rng.permutation(len(sentences))
    parts: list[str] = []
    for idx in order:
        parts.append(sentences[idx])
        if len(joiner.join(parts)) >= 200:
            break
    line = joiner.join(parts)
    while len(line) < 200:
        line = line + joiner + sentences[int(order[0])]
    return f"{line} ({serial:05d})"


def main() -> int:
    rng = np.random.default_rng(SEED)
    sentences = load_sentences()
    profile = LangProfile.load(PROFILE_PATH)

    for tail in SHORT_TAILS:
        pred = classify(profile, tail)
        assert pred.confidence < 0.70, (tail, pred)

    serial = 0
    docs: list[dict] = []

    def add(url_lang: str, text: str) -> None:
        nonlocal serial
        ts = f"2020-03-{1 + len(docs) % 28:02d}T{len(docs) % 24:02d}:00:00Z"
        docs.append({
            "url": f"https://{url_lang}.example.org/fixture/{len(docs):04d}",
            "timestamp": ts,
            "text": text,
        })
        serial += 1

    def bulk_doc(code: str, n_lines: int, extra: str | None = None) -> str:
        nonlocal serial
        lines = []
        for _ in range(n_lines):
            lines.append(make_line(sentences[code], rng, code, serial))
            serial += 1
        if extra is not None:
            lines.append(extra)
        return "\n".join(lines)

    # keeper page: first occurrence of both boilerplate lines, plus unique text
    add("en", bulk_doc("en", 3) + "\n" + BOILER[0] + "\n" + BOILER[1])

    # bulk pages per language; a few get quirks folded in
    for code in LANGS:
        for i in range(BULK_DOCS[code]):
            n_lines = 3 + int(rng.integers(0, 3))
            extra = None
            if code == "en" and i == 5:
                # near-miss: blocklisted word only inside a longer token
                extra = ("The florgleish dialect survey continues this spring "
                         "with volunteers from every parish recording word lists "
                         "and stories told by the oldest families of the region "
                         "for the sound archive of the provincial museum library.")
            if code == "en" and i == 9:
                extra = "Glossary entry ▁ marks a word boundary 🌊 in some tools."
            if code == "de" and i == 4:
                # windows line endings and blank lines survive splitting
                extra = "\r\nKurze Notiz am Rande.\r\n"
            add(code, bulk_doc(code, n_lines, extra))

    # boilerplate carriers: all long lines are duplicates, short tail remains
    for tail in SHORT_TAILS:
        add("en", "\n".join([BOILER[0], BOILER[1], BOILER[0], tail]))

    # page that dedup empties entirely
    add("en", "\n".join([BOILER[1], BOILER[0], BOILER[1]]))

    # too few long lines: survive only when the line-length filter is off
    for code in ("en", "de", "fr", "es", "ru"):
        lines = [make_line(sentences[code], rng, code, serial + k) for k in range(2)]
        serial += 2
        add(code, "\n".join(lines + ["Kontakt 555-0134" if code == "de" else "p. 44"]))

    # pages carrying a blocklisted word
    word_lines = {
        "en": "Anyone may florgle quietly after sunset according to the notice.",
        "de": "Die Gemeinde erinnert an blorgheim wie jedes Jahr im Herbst.",
        "ja": "村の記録にはゾルグボンという言葉が何度も現れる。",
    }
    for code, line in word_lines.items():
        add(code, bulk_doc(code, 3, line))

    # write three shards, contiguous blocks, last one gzipped
    CORPUS_DIR.mkdir(parents=True, exist_ok=True)
    for old in CORPUS_DIR.glob("shard-*"):
        old.unlink()
    cut = (len(docs) + 2) // 3
    shards = [docs[:cut], docs[cut:2 * cut], docs[2 * cut:]]
    for i, shard in enumerate(shards):
        payload = "".join(json.dumps(d, ensure_ascii=False, sort_keys=True) + "\n"
                          for d in shard)
        if i == 2:
            path = CORPUS_DIR / f"shard-{i:03d}.jsonl.gz"
            with gzip.GzipFile(filename="", mode="wb", fileobj=path.open("wb"),
                               mtime=0) as fh:
                fh.write(payload.encode("utf-8"))
        else:
            path = CORPUS_DIR / f"shard-{i:03d}.jsonl"
            path.write_text(payload, encoding="utf-8")
        print(f"wrote {path} ({len(shard)} docs)")

    BADWORDS_DIR.mkdir(parents=True, exist_ok=True)
    for code, words in BADWORDS.items():
        (BADWORDS_DIR / code).write_text("\n".join(words) + "\n", encoding="utf-8")
    print(f"wrote {BADWORDS_DIR} ({len(BADWORDS)} lists), {len(docs)} docs total")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
