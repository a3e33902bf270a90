"""Voice-leading-type (VLT) tokens, n-gram types and the pattern query syntax.

A slice is reduced to the set of pitch-class intervals above its lowest
pitch. Within an n-gram, every element after the first also carries the
ascending bass motion (mod 12) from the previously *selected* element. All
arithmetic is on pitch differences mod 12, so the encoding is invariant
under transposition.

Pattern grammar::

    pattern  := element (";" element)*
    element  := set | "(" MOTION ")" set   # motion forbidden first, required after
    set      := "{" "}" | "{" IVL ("," IVL)* "}"
    MOTION   := integer 0..11 ; IVL := integer 1..11

Whitespace between symbols is ignored.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

__all__ = [
    "PatternError",
    "ChordType",
    "Token",
    "NGramType",
    "EncodedSlice",
    "encode_slice",
    "encode_pitches",
    "encode_sequence",
    "ngram_type",
    "parse_pattern",
    "format_pattern",
    "format_chord",
    "BUILTIN_TARGETS",
    "CADENCE",
    "resolve_target",
]


class PatternError(ValueError):
    """Syntax or range error in a pattern string; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at byte {offset}"
        super().__init__(message)


class ChordType(tuple):
    """Ascending tuple of distinct pitch-class intervals (1..11) above the bass."""

    __slots__ = ()

    def __new__(cls, intervals=()):
        ivs = sorted(set(intervals))
        for iv in ivs:
            if not 1 <= iv <= 11:
                raise ValueError(f"interval {iv} outside 1..11")
        return super().__new__(cls, ivs)

    def __repr__(self):
        return f"ChordType({format_chord(self)})"


class Token(NamedTuple):
    motion: Optional[int]
    chord: ChordType


class NGramType(tuple):
    """Structural n-gram type: a tuple of :class:`Token`.

    The first token has ``motion is None``; every later token carries one.
    """

    __slots__ = ()

    def __new__(cls, tokens=()):
        tokens = tuple(tokens)
        if not tokens:
            raise ValueError("an n-gram type needs at least one token")
        if tokens[0].motion is not None:
            raise ValueError("initial token must not carry a bass motion")
        for tok in tokens[1:]:
            if tok.motion is None or not 0 <= tok.motion <= 11:
                raise ValueError("non-initial tokens need a bass motion in 0..11")
        return super().__new__(cls, tokens)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def chords(self) -> tuple:
        return tuple(t.chord for t in self)

    def prefix(self) -> "NGramType":
        return NGramType(self[:-1])

    def __str__(self):
        return format_pattern(self)

    def __repr__(self):
        return f"NGramType({format_pattern(self)!r})"


class EncodedSlice(NamedTuple):
    chord: ChordType
    bass_pc: int
    onset_perf: Optional[float]
    onset_score: object


def encode_slice(slice_) -> ChordType:
    """Pitch-class intervals above the lowest pitch, octave-reduced.

    F-A-D (65, 69, 74) gives ``{4,9}``, the first-inversion supertonic.
    """
    return encode_pitches(slice_.pitches)


def encode_pitches(pitches) -> ChordType:
    bass = min(pitches)
    return ChordType({(p - bass) % 12 for p in pitches} - {0})


def encode_sequence(seq) -> list:
    """Encode each slice of a :class:`SliceSequence` as an :class:`EncodedSlice`."""
    return [EncodedSlice(encode_pitches(s.pitches), min(s.pitches) % 12,
                         s.onset_perf, s.onset_score) for s in seq.slices]


def ngram_type(encoded: Sequence[EncodedSlice], indices: Sequence[int]) -> NGramType:
    """Build the n-gram type of the slices selected by ``indices``.

    Bass motion is measured between consecutive *selected* slices.
    """
    for a, b in zip(indices, indices[1:]):
        if not a < b:
            raise ValueError(f"indices must be strictly increasing, got {tuple(indices)}")
    first = encoded[indices[0]]
    tokens = [Token(None, first.chord)]
    prev = first.bass_pc
    for i in indices[1:]:
        e = encoded[i]
        tokens.append(Token((e.bass_pc - prev) % 12, e.chord))
        prev = e.bass_pc
    return tuple.__new__(NGramType, tokens)


# -- pattern syntax --------------------------------------------------------------

def format_chord(chord: Sequence[int]) -> str:
    return "{" + ",".join(str(i) for i in chord) + "}"


def format_pattern(g: Sequence[Token]) -> str:
    """Canonical text form; ``parse_pattern(format_pattern(g)) == g``."""
    parts = []
    for tok in g:
        head = "" if tok.motion is None else f"({tok.motion})"
        parts.append(head + format_chord(tok.chord))
    return ";".join(parts)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def offset(self, pos=None) -> int:
        return len(self.text[: self.pos if pos is None else pos].encode("utf-8"))

    def error(self, message, pos=None):
        return PatternError(message, self.offset(pos))

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def integer(self, lo, hi, what):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in "0123456789":
            self.pos += 1
        if start == self.pos:
            found = self.text[start] if start < len(self.text) else "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        value = int(self.text[start:self.pos])
        if not lo <= value <= hi:
            raise self.error(f"{what} {value} outside {lo}..{hi}", start)
        return value

    def chord(self):
        self.expect("{")
        ivs = []
        if self.peek() == "}":
            self.pos += 1
            return ChordType()
        ivs.append(self.integer(1, 11, "interval"))
        while self.peek() == ",":
            self.pos += 1
            ivs.append(self.integer(1, 11, "interval"))
        self.expect("}")
        return ChordType(ivs)

    def element(self, initial):
        start = self.pos
        motion = None
        if self.peek() == "(":
            if initial:
                raise self.error("initial element must not carry a bass motion", start)
            self.pos += 1
            motion = self.integer(0, 11, "motion")
            self.expect(")")
        elif not initial:
            self.skip_ws()
            raise self.error("non-initial element requires a bass motion '(m)'")
        return Token(motion, self.chord())

    def pattern(self):
        tokens = [self.element(True)]
        while self.peek() == ";":
            self.pos += 1
            tokens.append(self.element(False))
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}")
        return NGramType(tokens)


def parse_pattern(text: str) -> NGramType:
    """Parse the pattern grammar into an :class:`NGramType`.

    Intervals are normalized to ascending order, so ``{9,4}`` equals ``{4,9}``.
    """
    return _Parser(text).pattern()


CADENCE = "cadence:ii6-I64-V7-I"

BUILTIN_TARGETS = {
    CADENCE: "{4,9};(2){5,9};(0){4,7,10};(5){4,7}",
}


def resolve_target(text: str) -> NGramType:
    """Accept either a built-in target name or a pattern string."""
    name = text.strip()
    if name in BUILTIN_TARGETS:
        return parse_pattern(BUILTIN_TARGETS[name])
    if ":" in name and not name.startswith(("{", "(")):
        known = ", ".join(sorted(BUILTIN_TARGETS))
        raise PatternError(f"unknown built-in target {name!r} (known: {known})")
    return parse_pattern(text)
