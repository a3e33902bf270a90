"""Corpus data model and JSONL/CSV note-event I/O.

A corpus is a list of pieces; each piece is a list of pitched note events
carrying an exact-rational score onset/duration (beats) and, optionally, a
performance onset/duration in seconds from an upstream audio alignment.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

__all__ = [
    "CorpusError",
    "NoteEvent",
    "Piece",
    "Corpus",
    "ValidationReport",
    "PieceReport",
    "CSV_HEADER",
    "parse_corpus",
    "serialize_corpus",
    "read_corpus",
    "write_corpus",
    "validate_corpus",
    "transpose_piece",
]

CSV_HEADER = ("piece_id", "pitch", "onset_num", "onset_den",
              "dur_num", "dur_den", "onset_s", "dur_s")


class CorpusError(ValueError):
    """Malformed or invalid corpus data."""


@dataclass(frozen=True)
class NoteEvent:
    pitch: int
    onset_score: Fraction
    duration_score: Fraction
    onset_perf: Optional[float] = None
    duration_perf: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise CorpusError(f"pitch {self.pitch} outside 0..127")
        if self.duration_score <= 0:
            raise CorpusError(f"nonpositive score duration {self.duration_score}")
        if (self.onset_perf is None) != (self.duration_perf is None):
            raise CorpusError("onset_s and dur_s must be both present or both absent")
        if self.onset_perf is not None:
            if not (math.isfinite(self.onset_perf) and self.onset_perf >= 0):
                raise CorpusError(f"invalid performance onset {self.onset_perf}")
            if not (math.isfinite(self.duration_perf) and self.duration_perf > 0):
                raise CorpusError(f"nonpositive performance duration {self.duration_perf}")

    @property
    def has_performance(self) -> bool:
        return self.onset_perf is not None

    def sort_key(self):
        # Trailing fields only order exact (onset, pitch) ties deterministically.
        return (self.onset_score, self.pitch, self.duration_score,
                -1.0 if self.onset_perf is None else self.onset_perf,
                -1.0 if self.duration_perf is None else self.duration_perf)


@dataclass(frozen=True)
class Piece:
    piece_id: str
    events: tuple

    def __post_init__(self):
        if not self.piece_id:
            raise CorpusError("empty piece_id")
        if not self.events:
            raise CorpusError(f"piece {self.piece_id!r} has no events")
        flags = {e.has_performance for e in self.events}
        if len(flags) > 1:
            raise CorpusError(
                f"piece {self.piece_id!r} mixes events with and without performance times")
        object.__setattr__(self, "events",
                           tuple(sorted(self.events, key=NoteEvent.sort_key)))

    @property
    def has_performance(self) -> bool:
        return self.events[0].has_performance


@dataclass(frozen=True)
class Corpus:
    pieces: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        ids = [p.piece_id for p in self.pieces]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise CorpusError(f"duplicate piece_id(s): {', '.join(dup)}")

    def __len__(self):
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    @property
    def has_performance(self) -> bool:
        """True when every piece is performance-aligned (vacuously for empty)."""
        return all(p.has_performance for p in self.pieces)

    def piece(self, piece_id: str) -> Piece:
        for p in self.pieces:
            if p.piece_id == piece_id:
                return p
        raise KeyError(piece_id)


# -- parsing -----------------------------------------------------------------

def _as_int(value, name, lineno):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                pass
        raise CorpusError(f"line {lineno}: field {name!r} must be an integer, got {value!r}")
    return value


def _as_float(value, name, lineno):
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise CorpusError(f"line {lineno}: field {name!r} must be a number")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise CorpusError(f"line {lineno}: field {name!r} must be a number, got {value!r}") from None


def _event_from_record(rec: dict, lineno: int):
    for key in CSV_HEADER[:6]:
        if key not in rec or rec[key] in (None, ""):
            raise CorpusError(f"line {lineno}: missing required field {key!r}")
    piece_id = rec["piece_id"]
    if not isinstance(piece_id, str) or not piece_id:
        raise CorpusError(f"line {lineno}: field 'piece_id' must be a nonempty string")
    pitch = _as_int(rec["pitch"], "pitch", lineno)
    if not 0 <= pitch <= 127:
        raise CorpusError(f"line {lineno}: field 'pitch' = {pitch} outside 0..127")
    ints = {k: _as_int(rec[k], k, lineno) for k in ("onset_num", "onset_den", "dur_num", "dur_den")}
    for k in ("onset_den", "dur_den"):
        if ints[k] <= 0:
            raise CorpusError(f"line {lineno}: field {k!r} must be positive")
    onset = Fraction(ints["onset_num"], ints["onset_den"])
    dur = Fraction(ints["dur_num"], ints["dur_den"])
    if onset < 0:
        raise CorpusError(f"line {lineno}: negative score onset")
    if dur <= 0:
        raise CorpusError(f"line {lineno}: field 'dur_num' gives nonpositive duration {dur}")
    onset_s = _as_float(rec.get("onset_s"), "onset_s", lineno)
    dur_s = _as_float(rec.get("dur_s"), "dur_s", lineno)
    try:
        event = NoteEvent(pitch, onset, dur, onset_s, dur_s)
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from None
    return piece_id, event


def _records_jsonl(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise CorpusError(f"line {lineno}: expected a JSON object")
        yield lineno, rec


def _records_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise CorpusError("line 1: CSV header must be exactly " + ",".join(CSV_HEADER))
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise CorpusError(f"line {lineno}: expected {len(CSV_HEADER)} columns, got {len(row)}")
        yield lineno, dict(zip(CSV_HEADER, (c.strip() for c in row)))


def parse_corpus(data, format: str = "jsonl") -> Corpus:
    """Parse a corpus from UTF-8 bytes (or text) in ``jsonl`` or ``csv`` format.

    Events are grouped by ``piece_id`` (pieces ordered by first appearance)
    and sorted by ``(onset_score, pitch)`` within each piece, so the line
    order of the file does not matter. Errors name the offending line.
    """
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    if format == "jsonl":
        records = _records_jsonl(text)
    elif format == "csv":
        records = _records_csv(text)
    else:
        raise CorpusError(f"unknown corpus format {format!r} (expected jsonl or csv)")
    grouped: dict[str, list] = {}
    perf_flag: dict[str, tuple] = {}
    for lineno, rec in records:
        pid, event = _event_from_record(rec, lineno)
        if pid in perf_flag and perf_flag[pid][0] != event.has_performance:
            raise CorpusError(
                f"line {lineno}: piece {pid!r} mixes events with and without performance "
                f"times (line {perf_flag[pid][1]} differs)")
        perf_flag.setdefault(pid, (event.has_performance, lineno))
        grouped.setdefault(pid, []).append(event)
    return Corpus(tuple(Piece(pid, tuple(evs)) for pid, evs in grouped.items()))


def _fmt_float(x):
    return "" if x is None else repr(float(x))


def serialize_corpus(corpus: Corpus, format: str = "jsonl") -> bytes:
    """Inverse of :func:`parse_corpus`. Floats are written with ``repr`` so
    they round-trip exactly."""
    if format == "jsonl":
        lines = []
        for piece in corpus:
            for e in piece.events:
                rec = {"piece_id": piece.piece_id, "pitch": e.pitch,
                       "onset_num": e.onset_score.numerator,
                       "onset_den": e.onset_score.denominator,
                       "dur_num": e.duration_score.numerator,
                       "dur_den": e.duration_score.denominator}
                if e.has_performance:
                    rec["onset_s"] = e.onset_perf
                    rec["dur_s"] = e.duration_perf
                lines.append(json.dumps(rec, separators=(",", ":")))
        return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for piece in corpus:
            for e in piece.events:
                writer.writerow([piece.piece_id, e.pitch,
                                 e.onset_score.numerator, e.onset_score.denominator,
                                 e.duration_score.numerator, e.duration_score.denominator,
                                 _fmt_float(e.onset_perf), _fmt_float(e.duration_perf)])
        return buf.getvalue().encode("utf-8")
    raise CorpusError(f"unknown corpus format {format!r} (expected jsonl or csv)")


def _format_from_path(path: str, format: Optional[str]) -> str:
    if format:
        return format
    return "csv" if str(path).lower().endswith(".csv") else "jsonl"


def read_corpus(path, format: Optional[str] = None) -> Corpus:
    with open(path, "rb") as fh:
        return parse_corpus(fh.read(), _format_from_path(path, format))


def write_corpus(corpus: Corpus, path, format: Optional[str] = None) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_corpus(corpus, _format_from_path(path, format)))


# -- validation ----------------------------------------------------------------

@dataclass
class PieceReport:
    piece_id: str
    event_count: int
    score_span: tuple  # (first onset, last release) in beats
    performance_aligned: bool
    violations: list = field(default_factory=list)


@dataclass
class ValidationReport:
    pieces: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [v for p in self.pieces for v in p.violations]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [f"{len(self.pieces)} pieces, {len(self.violations)} violations"]
        for p in self.pieces:
            start, end = p.score_span
            lines.append(f"{p.piece_id}: {p.event_count} events, span {start}..{end} beats, "
                         f"aligned={'yes' if p.performance_aligned else 'no'}, "
                         f"violations={len(p.violations)}")
            lines.extend("  " + v for v in p.violations)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "piece_count": len(self.pieces),
            "violation_count": len(self.violations),
            "pieces": [{"piece_id": p.piece_id, "event_count": p.event_count,
                        "score_span": [str(p.score_span[0]), str(p.score_span[1])],
                        "performance_aligned": p.performance_aligned,
                        "violations": list(p.violations)} for p in self.pieces],
        }


def _describe(idx, e):
    return f"event#{idx}(pitch={e.pitch}, onset={e.onset_score}, onset_s={e.onset_perf})"


def validate_corpus(corpus: Corpus) -> ValidationReport:
    """Report per-piece statistics and monotone-alignment violations.

    Never raises. A violation is a pair of events where the later score onset
    has the strictly earlier performance onset; for each event we report the
    earliest-scored offender only, which keeps the report linear in size.
    """
    report = ValidationReport()
    for piece in corpus:
        events = piece.events
        start = min(e.onset_score for e in events)
        end = max(e.onset_score + e.duration_score for e in events)
        pr = PieceReport(piece.piece_id, len(events), (start, end), piece.has_performance)
        if piece.has_performance:
            # Running max of perf onsets over strictly earlier score onsets.
            best = None  # (onset_perf, index) of the latest-performed earlier event
            i = 0
            while i < len(events):
                j = i
                while j < len(events) and events[j].onset_score == events[i].onset_score:
                    j += 1
                for k in range(i, j):
                    if best is not None and events[k].onset_perf < best[0]:
                        a = best[1]
                        pr.violations.append(
                            f"{piece.piece_id}: {_describe(k, events[k])} has later score "
                            f"onset but earlier performance onset than {_describe(a, events[a])}")
                for k in range(i, j):
                    if best is None or events[k].onset_perf > best[0]:
                        best = (events[k].onset_perf, k)
                i = j
        report.pieces.append(pr)
    return report


def transpose_piece(piece: Piece, k: int) -> Piece:
    """Shift every pitch by ``k`` semitones; timings are untouched."""
    for e in piece.events:
        if not 0 <= e.pitch + k <= 127:
            raise CorpusError(
                f"transposing pitch {e.pitch} by {k} leaves the MIDI range 0..127")
    return Piece(piece.piece_id, tuple(replace(e, pitch=e.pitch + k) for e in piece.events))
