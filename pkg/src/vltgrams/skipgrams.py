"""Skip-gram enumeration over encoded slice sequences.

Two selection modes:

* ``fixed(t)``: index tuples ``i1 < ... < in`` whose total number of skipped
  positions, ``sum(i[j+1] - i[j] - 1)``, is at most ``t``.
* ``variable(w)``: tuples whose consecutive performance onsets lie at most
  ``w`` seconds apart (``scope="pair"``), or whose first-to-last span is at
  most ``w`` (``scope="span"``). There is no limit on index distance.

Both enumerators stream tuples in lexicographic order without materializing
all ``C(L, n)`` candidates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .vlt import EncodedSlice, NGramType, ngram_type

__all__ = [
    "SelectionError",
    "SelectionConfig",
    "NGramInstance",
    "fixed_index_tuples",
    "variable_index_tuples",
    "enumerate_fixed",
    "enumerate_variable",
    "enumerate_instances",
    "count_fixed_expected",
    "index_array",
    "parse_selection",
]


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    """How n-gram instances are selected from a slice sequence.

    ``mode`` is ``"fixed"`` (``param`` = max total skips, an int) or
    ``"variable"`` (``param`` = window in seconds). ``scope`` only affects
    variable mode.
    """

    mode: str
    param: float
    scope: str = "pair"

    def __post_init__(self):
        if self.mode == "fixed":
            if int(self.param) != self.param or self.param < 0:
                raise SelectionError(f"fixed skips must be an integer >= 0, got {self.param}")
            object.__setattr__(self, "param", int(self.param))
        elif self.mode == "variable":
            if not self.param > 0:
                raise SelectionError(f"variable window must be > 0 seconds, got {self.param}")
            object.__setattr__(self, "param", float(self.param))
        else:
            raise SelectionError(f"unknown selection mode {self.mode!r}")
        if self.scope not in ("pair", "span"):
            raise SelectionError(f"window scope must be 'pair' or 'span', got {self.scope!r}")

    @classmethod
    def fixed(cls, t: int) -> "SelectionConfig":
        return cls("fixed", t)

    @classmethod
    def variable(cls, w: float, scope: str = "pair") -> "SelectionConfig":
        return cls("variable", w, scope)

    @property
    def needs_performance(self) -> bool:
        return self.mode == "variable"

    def __str__(self):
        if self.mode == "fixed":
            return f"fixed:{self.param}"
        s = f"variable:{self.param:g}"
        return s if self.scope == "pair" else s + "/span"

    def sort_key(self):
        return (self.mode, self.param, self.scope)


def parse_selection(text: str, scope: str = "pair") -> SelectionConfig:
    """Parse ``fixed:<t>`` or ``variable:<seconds>``."""
    mode, sep, value = text.strip().partition(":")
    if not sep:
        raise SelectionError(f"selection must look like fixed:<t> or variable:<seconds>, got {text!r}")
    try:
        if mode == "fixed":
            return SelectionConfig("fixed", int(value))
        if mode == "variable":
            return SelectionConfig("variable", float(value), scope)
    except ValueError as exc:
        if isinstance(exc, SelectionError):
            raise
        raise SelectionError(f"bad selection parameter in {text!r}") from None
    raise SelectionError(f"unknown selection mode {mode!r} in {text!r}")


class NGramInstance(NamedTuple):
    piece_id: str
    indices: tuple
    onsets_perf: Optional[tuple]
    type: NGramType


@lru_cache(maxsize=256)
def _offset_patterns(n: int, t: int) -> tuple:
    """Offsets (relative to the first index) of every n-tuple with <= t skips,
    in lexicographic order."""
    pats = []
    for gaps in itertools.product(range(t + 1), repeat=n - 1):
        if sum(gaps) <= t:
            offs = [0]
            for g in gaps:
                offs.append(offs[-1] + g + 1)
            pats.append(tuple(offs))
    return tuple(pats)   # product() is already lexicographic in gaps


def fixed_index_tuples(length: int, n: int, t: int) -> Iterator[tuple]:
    """Index tuples of a length-``length`` sequence for fixed selection."""
    if n < 1 or t < 0:
        raise SelectionError("need n >= 1 and t >= 0")
    pats = _offset_patterns(n, t)
    for i in range(length - n + 1):
        room = length - i
        for off in pats:
            if off[-1] < room:
                yield tuple(i + o for o in off)


def variable_index_tuples(onsets: Sequence[float], n: int, w: float,
                          scope: str = "pair") -> Iterator[tuple]:
    """Index tuples whose onsets satisfy the temporal window.

    ``onsets`` must be non-decreasing, which lets each extension step stop at
    the first onset beyond the window.
    """
    if n < 1:
        raise SelectionError("need n >= 1")
    length = len(onsets)

    def extend(prefix, first_onset):
        last = prefix[-1]
        ref = onsets[last] if scope == "pair" else first_onset
        for j in range(last + 1, length - (n - len(prefix)) + 1):
            if onsets[j] - ref > w:
                break
            nxt = prefix + (j,)
            if len(nxt) == n:
                yield nxt
            else:
                yield from extend(nxt, first_onset)

    for i in range(length - n + 1):
        if n == 1:
            yield (i,)
        else:
            yield from extend((i,), onsets[i])


def _window_limits(onsets: np.ndarray, w: float) -> np.ndarray:
    """``hi[i]``: largest j with ``onsets[j] - onsets[i] <= w``.

    Uses the same subtraction as the streaming enumerator, so rounding at the
    window edge agrees exactly.
    """
    length = len(onsets)
    hi = np.searchsorted(onsets, onsets + w, side="right") - 1
    hi = np.maximum(hi, np.arange(length))
    while True:
        nxt = np.minimum(hi + 1, length - 1)
        grow = (hi + 1 < length) & (onsets[nxt] - onsets <= w)
        if not grow.any():
            break
        hi = hi + grow
    while True:
        shrink = onsets[hi] - onsets > w
        if not shrink.any():
            break
        hi = hi - shrink
    return hi


def _expand(rows: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Append every j in ``lo[r]..hi[r]`` to row ``r``."""
    counts = np.maximum(hi - lo + 1, 0)
    rep = np.repeat(np.arange(len(rows)), counts)
    starts = np.cumsum(counts) - counts
    nxt = lo[rep] + (np.arange(len(rep)) - starts[rep])
    return np.column_stack([rows[rep], nxt])


def index_array(length: int, n: int, selection: SelectionConfig,
                onsets: Optional[Sequence[float]] = None) -> np.ndarray:
    """All selected index tuples as an ``(m, n)`` int array.

    Equivalent to the streaming enumerators as a set, built breadth-first by
    extending every partial tuple at once. Row order is unspecified.
    """
    if n < 1:
        raise SelectionError("need n >= 1")
    if length < n:
        return np.empty((0, n), dtype=np.int64)
    rows = np.arange(length, dtype=np.int64)[:, None]
    if selection.mode == "fixed":
        used = np.zeros(length, dtype=np.int64)
        t = selection.param
        for _ in range(n - 1):
            last = rows[:, -1]
            lo = last + 1
            hi = np.minimum(last + 1 + (t - used), length - 1)
            new_rows = _expand(rows, lo, hi)
            rep = np.repeat(np.arange(len(rows)), np.maximum(hi - lo + 1, 0))
            used = used[rep] + (new_rows[:, -1] - new_rows[:, -2] - 1)
            rows = new_rows
        return rows
    if onsets is None or (len(onsets) and onsets[0] is None):
        raise SelectionError("variable selection needs performance times")
    o = np.asarray(onsets, dtype=np.float64)
    hi_of = _window_limits(o, selection.param)
    for _ in range(n - 1):
        ref = rows[:, -1] if selection.scope == "pair" else rows[:, 0]
        rows = _expand(rows, rows[:, -1] + 1, hi_of[ref])
    return rows


def _instances(piece_id, encoded, tuples) -> Iterator[NGramInstance]:
    perf = [e.onset_perf for e in encoded]
    has_perf = bool(perf) and perf[0] is not None
    for idx in tuples:
        onsets = tuple(perf[i] for i in idx) if has_perf else None
        yield NGramInstance(piece_id, idx, onsets, ngram_type(encoded, idx))


def enumerate_fixed(encoded: Sequence[EncodedSlice], n: int, t: int,
                    piece_id: str = "") -> Iterator[NGramInstance]:
    """Stream fixed-skip instances in lexicographic index order.

    Performance onsets are attached whenever the sequence has them.
    """
    return _instances(piece_id, encoded, fixed_index_tuples(len(encoded), n, t))


def enumerate_variable(encoded: Sequence[EncodedSlice], n: int, w: float,
                       piece_id: str = "", scope: str = "pair") -> Iterator[NGramInstance]:
    """Stream time-windowed instances in lexicographic index order."""
    if not w > 0:
        raise SelectionError(f"window must be > 0 seconds, got {w}")
    if encoded and encoded[0].onset_perf is None:
        raise SelectionError(
            f"piece {piece_id!r} has no performance times; variable selection needs them")
    onsets = [e.onset_perf for e in encoded]
    return _instances(piece_id, encoded, variable_index_tuples(onsets, n, w, scope))


def enumerate_instances(encoded, n: int, selection: SelectionConfig,
                        piece_id: str = "") -> Iterator[NGramInstance]:
    if selection.mode == "fixed":
        return enumerate_fixed(encoded, n, selection.param, piece_id)
    return enumerate_variable(encoded, n, selection.param, piece_id, selection.scope)


def count_fixed_expected(length: int, n: int, t: int) -> int:
    """Closed-form number of fixed-skip n-tuples in a sequence of ``length``.

    Tuples with exactly ``s`` skips number ``(length - n - s + 1)`` start
    positions times ``C(s + n - 2, n - 2)`` gap distributions.
    """
    if n == 1:
        return max(0, length)
    total = 0
    for s in range(0, min(t, length - n) + 1):
        total += max(0, length - n - s + 1) * comb(s + n - 2, n - 2)
    return total
