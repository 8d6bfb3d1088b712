"""Read and write document streams as JSONL; normalize text into lines.

The interchange format is UTF-8 JSON-lines with fixed field names:
raw documents carry ``url``, ``timestamp``, ``text``; filtered pages carry
``url``, ``timestamp``, ``lines``, ``language``, ``confidence``,
``source_filters``. Files ending in ``.gz`` are gzip-compressed. Readers
and writers stream one record at a time; a writer is atomic per file
(temp-then-rename).
"""

from __future__ import annotations

import gzip
import io
import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator


class CorpusFormatError(ValueError):
    """A corpus file violates the interchange format."""


@dataclass(frozen=True)
class RawDocument:
    """One fetched web page: opaque location, ISO-8601 timestamp, raw text."""

    url: str
    timestamp: str
    text: str


@dataclass
class CleanPage:
    """A page that survived (part of) the filter cascade.

    ``lines`` is the newline-split of the retained text with empty lines
    removed; ``language``/``confidence`` are set once the page passes the
    language-confidence gate; ``source_filters`` lists the cascade stages
    the page went through, in order.
    """

    url: str
    timestamp: str
    lines: list[str]
    language: str | None = None
    confidence: float = 0.0
    source_filters: list[str] = field(default_factory=list)

    def text(self) -> str:
        return "\n".join(self.lines)


def split_lines(text: str) -> list[str]:
    """Split ``text`` on '\\n' into non-empty lines.

    A single trailing '\\r' per line is stripped; no other whitespace
    handling is applied.
    """
    out = []
    for line in text.split("\n"):
        if line.endswith("\r"):
            line = line[:-1]
        if line:
            out.append(line)
    return out


def _open_binary(path: str | Path, mode: str) -> IO[bytes]:
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode)  # type: ignore[return-value]
    return open(path, mode)


@contextmanager
def _atomic_writer(path: Path) -> Iterator[IO[bytes]]:
    """Write to a temp file in the target directory, rename on success.

    Gzip targets get mtime=0 in the header so identical content yields
    byte-identical files across runs.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as raw:
            if path.suffix == ".gz":
                with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as gz:
                    yield gz  # type: ignore[misc]
            else:
                yield raw
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


@contextmanager
def _atomic_text_writer(path: Path) -> Iterator[IO[str]]:
    with _atomic_writer(path) as raw:
        wrapper = io.TextIOWrapper(raw, encoding="utf-8", newline="\n")
        try:
            yield wrapper
        finally:
            wrapper.flush()
            wrapper.detach()


def _decoded_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (line_number, text) pairs, rejecting invalid UTF-8 by byte offset."""
    offset = 0
    with _open_binary(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                yield lineno, raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusFormatError(
                    f"invalid UTF-8 at byte offset {offset + exc.start} "
                    f"(line {lineno}) in {path}"
                ) from exc
            offset += len(raw)


def read_documents(path: str | Path, format: str = "jsonl") -> Iterator[RawDocument]:
    """Stream RawDocuments from a JSONL file, preserving file order.

    File order is the canonical document total order used by every
    downstream stage. A page record (``lines`` instead of ``text``) is
    accepted; its text is the newline-join of its lines, so writing pages
    and re-reading them as documents round-trips content.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported format: {format!r}")
    for lineno, text in _decoded_lines(path):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(
                f"malformed record at line {lineno} in {path}: {exc.msg}"
            ) from exc
        if not isinstance(record, dict):
            raise CorpusFormatError(f"malformed record at line {lineno} in {path}: not an object")
        for key in ("url", "timestamp"):
            if key not in record:
                raise CorpusFormatError(f"missing field {key} at line {lineno}")
        if "text" in record:
            body = record["text"]
        elif "lines" in record:
            body = "\n".join(record["lines"])
        else:
            raise CorpusFormatError(f"missing field text at line {lineno}")
        if not isinstance(body, str):
            raise CorpusFormatError(f"field text is not a string at line {lineno}")
        yield RawDocument(url=str(record["url"]), timestamp=str(record["timestamp"]), text=body)


def read_pages(path: str | Path) -> Iterator[CleanPage]:
    """Stream CleanPages from a JSONL file written by :func:`write_pages`."""
    for lineno, text in _decoded_lines(path):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(
                f"malformed record at line {lineno} in {path}: {exc.msg}"
            ) from exc
        for key in ("url", "timestamp", "lines"):
            if key not in record:
                raise CorpusFormatError(f"missing field {key} at line {lineno}")
        yield CleanPage(
            url=record["url"],
            timestamp=record["timestamp"],
            lines=list(record["lines"]),
            language=record.get("language"),
            confidence=float(record.get("confidence", 0.0)),
            source_filters=list(record.get("source_filters", [])),
        )


def page_to_record(page: CleanPage) -> dict:
    record: dict = {
        "url": page.url,
        "timestamp": page.timestamp,
        "lines": page.lines,
        "confidence": page.confidence,
        "source_filters": page.source_filters,
    }
    if page.language is not None:
        record["language"] = page.language
    return record


def write_pages(pages: Iterable[CleanPage], path: str | Path) -> int:
    """Write pages as JSONL, atomically; returns the number written."""
    path = Path(path)
    count = 0
    with _atomic_writer(path) as fh:
        for page in pages:
            line = json.dumps(page_to_record(page), ensure_ascii=False, sort_keys=True)
            fh.write(line.encode("utf-8") + b"\n")
            count += 1
    return count


def write_documents(docs: Iterable[RawDocument], path: str | Path) -> int:
    """Write raw documents as JSONL, atomically; returns the number written."""
    path = Path(path)
    count = 0
    with _atomic_writer(path) as fh:
        for doc in docs:
            record = {"url": doc.url, "timestamp": doc.timestamp, "text": doc.text}
            line = json.dumps(record, ensure_ascii=False, sort_keys=True)
            fh.write(line.encode("utf-8") + b"\n")
            count += 1
    return count
