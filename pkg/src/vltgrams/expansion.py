"""Full expansion of a piece into vertical sonorities.

One slice is produced at every distinct score onset. A slice holds every pitch
sounding at that onset, so a sustained note is duplicated into each later
slice it overlaps. Note releases never create slices.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .corpus_io import Piece

__all__ = ["Slice", "SliceSequence", "full_expand", "merge_repeats", "expand_corpus"]


@dataclass(frozen=True)
class Slice:
    onset_score: Fraction
    onset_perf: Optional[float]
    pitches: frozenset

    def __post_init__(self):
        if not self.pitches:
            raise ValueError("a slice needs at least one pitch")
        object.__setattr__(self, "pitches", frozenset(self.pitches))

    @property
    def pitch_classes(self) -> frozenset:
        return frozenset(p % 12 for p in self.pitches)


@dataclass(frozen=True)
class SliceSequence:
    piece_id: str
    slices: tuple

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        for a, b in zip(self.slices, self.slices[1:]):
            if not a.onset_score < b.onset_score:
                raise ValueError(f"{self.piece_id}: slice onsets must strictly increase")
            if a.onset_perf is not None and b.onset_perf is not None \
                    and b.onset_perf < a.onset_perf:
                raise ValueError(f"{self.piece_id}: performance onsets decrease")

    def __len__(self):
        return len(self.slices)

    @property
    def has_performance(self) -> bool:
        return bool(self.slices) and self.slices[0].onset_perf is not None


def full_expand(piece: Piece) -> SliceSequence:
    """Expand ``piece`` into one slice per unique score onset.

    The slice at onset ``O`` contains the pitch of every event with
    ``onset <= O < onset + duration``. Its performance onset is the earliest
    performance onset among events attacking exactly at ``O``.
    """
    events = piece.events  # sorted by onset
    slices = []
    active: list = []  # heap of (release, seq, pitch)
    i = 0
    while i < len(events):
        onset = events[i].onset_score
        perf = None
        while i < len(events) and events[i].onset_score == onset:
            e = events[i]
            heapq.heappush(active, (e.onset_score + e.duration_score, i, e.pitch))
            if e.onset_perf is not None and (perf is None or e.onset_perf < perf):
                perf = e.onset_perf
            i += 1
        while active and active[0][0] <= onset:
            heapq.heappop(active)
        slices.append(Slice(onset, perf, frozenset(p for _, _, p in active)))
    return SliceSequence(piece.piece_id, tuple(slices))


def merge_repeats(seq: SliceSequence) -> SliceSequence:
    """Collapse runs of consecutive slices with equal pitch-class content.

    The first slice of each run survives unchanged (pitches and onsets).
    """
    out = []
    last_pcs = None
    for s in seq.slices:
        pcs = s.pitch_classes
        if pcs != last_pcs:
            out.append(s)
            last_pcs = pcs
    return SliceSequence(seq.piece_id, tuple(out))


def expand_corpus(corpus, merge: bool = False) -> list:
    """Expand every piece of ``corpus``, optionally merging repeated sonorities."""
    seqs = [full_expand(p) for p in corpus]
    if merge:
        seqs = [merge_repeats(s) for s in seqs]
    return seqs
