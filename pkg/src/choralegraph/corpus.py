"""Chorale corpus model: record validation, JSONL ingestion, vocabulary."""

import json
import logging
from dataclasses import dataclass
from typing import ClassVar

logger = logging.getLogger(__name__)

MODES = ("major", "minor")


@dataclass(frozen=True)
class ChoraleRecord:
    """One composition: id, mode label, chord tokens, final-cadence tokens."""

    id: str
    mode: str
    chords: tuple[str, ...]
    cadence: tuple[str, ...]


@dataclass
class Corpus:
    """Loaded records plus the corpus-wide chord-token vocabulary.

    The vocabulary covers every token appearing in any record's chords or
    cadence field, indexed densely 0..|vocab|-1 in lexicographic token order
    so the same file bytes always yield the same indices regardless of
    record order.
    """

    records: list[ChoraleRecord]
    vocab: dict[str, int]
    tokens: list[str]

    @classmethod
    def from_records(cls, records: list[ChoraleRecord]) -> "Corpus":
        seen = set()
        for rec in records:
            if rec.id in seen:
                raise ValueError(f"duplicate record id: {rec.id!r}")
            seen.add(rec.id)
        toks = sorted({t for r in records for t in r.chords + r.cadence})
        return cls(records=list(records), vocab={t: i for i, t in enumerate(toks)}, tokens=toks)

    def record(self, rec_id: str) -> ChoraleRecord:
        for rec in self.records:
            if rec.id == rec_id:
                return rec
        raise KeyError(f"no record with id {rec_id!r}")

    def __len__(self) -> int:
        return len(self.records)


def _validate_token(tok, what: str, where: str) -> str:
    if not isinstance(tok, str) or not tok:
        raise ValueError(f"{where}: {what} token must be a non-empty string, got {tok!r}")
    if any(c.isspace() for c in tok):
        raise ValueError(f"{where}: {what} token {tok!r} contains whitespace")
    return tok


def _record_from_obj(obj, where: str) -> ChoraleRecord:
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    for key in ("id", "mode", "chords", "cadence"):
        if key not in obj:
            raise ValueError(f"{where}: missing key {key!r}")
    rec_id = obj["id"]
    if not isinstance(rec_id, str) or not rec_id:
        raise ValueError(f"{where}: id must be a non-empty string")
    mode = obj["mode"]
    if mode not in MODES:
        raise ValueError(f"{where}: mode must be one of {MODES}, got {mode!r}")
    chords = obj["chords"]
    if not isinstance(chords, list) or not chords:
        raise ValueError(f"{where}: chords must be a non-empty array (record {rec_id})")
    cadence = obj["cadence"]
    if not isinstance(cadence, list) or not cadence:
        raise ValueError(f"{where}: cadence must be a non-empty array (record {rec_id})")
    return ChoraleRecord(
        id=rec_id,
        mode=mode,
        chords=tuple(_validate_token(t, "chord", where) for t in chords),
        cadence=tuple(_validate_token(t, "cadence", where) for t in cadence),
    )


def load_corpus(path) -> Corpus:
    """Load a newline-delimited JSON corpus file.

    One JSON object per line with keys id, mode, chords, cadence; unknown
    keys are ignored, blank lines are skipped. Errors carry the offending
    line number.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}: line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{where}: malformed record: {exc}") from exc
            records.append(_record_from_obj(obj, where))
    if not records:
        raise ValueError(f"{path}: corpus file contains no records")
    return Corpus.from_records(records)


def save_corpus(corpus: Corpus, path) -> None:
    """Write the corpus back out in the ingestion format (round-trips exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in corpus.records:
            obj = {"id": r.id, "mode": r.mode, "chords": list(r.chords), "cadence": list(r.cadence)}
            fh.write(json.dumps(obj) + "\n")


@dataclass(frozen=True)
class Selector:
    """Which chord segment(s) of a record enter the similarity computation.

    kind "intro" takes the first n chords, "cadence" the cadence field,
    "intro_and_cadence" both.
    """

    kind: str
    n: int = 6

    KINDS: ClassVar[tuple[str, ...]] = ("intro", "cadence", "intro_and_cadence")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown selector kind {self.kind!r}")
        if self.kind != "cadence" and self.n < 1:
            raise ValueError(f"selector intro length must be >= 1, got {self.n}")

    @classmethod
    def intro(cls, n: int = 6) -> "Selector":
        return cls("intro", n)

    @classmethod
    def cadence(cls) -> "Selector":
        return cls("cadence")

    @classmethod
    def intro_and_cadence(cls, n: int = 6) -> "Selector":
        return cls("intro_and_cadence", n)

    @classmethod
    def from_string(cls, text: str) -> "Selector":
        """Parse "intro:6", "cadence", "intro_and_cadence:6" (n optional)."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if rest:
            try:
                n = int(rest)
            except ValueError:
                raise ValueError(f"bad selector length in {text!r}") from None
            return cls(kind, n)
        return cls(kind)

    def __str__(self) -> str:
        if self.kind == "cadence":
            return "cadence"
        return f"{self.kind}:{self.n}"


def segment(record: ChoraleRecord, selector: Selector) -> list[tuple[str, ...]]:
    """Extract the selector's segment(s) from a record.

    Returns one sequence for intro/cadence, two (intro first) for
    intro_and_cadence. intro(n) fails on records shorter than n.
    """
    segs = []
    if selector.kind in ("intro", "intro_and_cadence"):
        if len(record.chords) < selector.n:
            raise ValueError(
                f"record {record.id}: intro needs {selector.n} chords, record has {len(record.chords)}"
            )
        segs.append(record.chords[: selector.n])
    if selector.kind in ("cadence", "intro_and_cadence"):
        segs.append(record.cadence)
    return segs
