from fractions import Fraction

from hypothesis import given, settings, strategies as st

from vltgrams.corpus_io import NoteEvent, Piece
from vltgrams.expansion import Slice, SliceSequence, full_expand, merge_repeats

F = Fraction


def ev(p, on, d, perf=None):
    if perf is None:
        return NoteEvent(p, F(on), F(d))
    return NoteEvent(p, F(on), F(d), perf, 0.1)


def test_sustained_note_is_duplicated():
    seq = full_expand(Piece("p", (ev(60, 0, 2), ev(64, 0, 1), ev(67, 1, 1))))
    assert [(s.onset_score, set(s.pitches)) for s in seq.slices] == [(0, {60, 64}), (1, {60, 67})]


def test_single_event_and_unison_onsets():
    assert [set(s.pitches) for s in full_expand(Piece("p", (ev(62, 3, 1),))).slices] == [{62}]
    seq = full_expand(Piece("p", (ev(60, 0, 1), ev(67, 0, 1))))
    assert len(seq) == 1 and set(seq.slices[0].pitches) == {60, 67}


def test_release_makes_no_slice():
    # 64 ends at beat 1 while 60 sustains; nothing attacks there
    seq = full_expand(Piece("p", (ev(60, 0, 3), ev(64, 0, 1), ev(67, 2, 1))))
    assert [s.onset_score for s in seq.slices] == [0, 2]


def test_slice_perf_onset_is_min_of_attacks():
    seq = full_expand(Piece("p", (ev(60, 0, 1, 0.30), ev(64, 0, 1, 0.25), ev(67, 1, 1, 0.9))))
    assert [s.onset_perf for s in seq.slices] == [0.25, 0.9]


def brute_force(piece):
    onsets = sorted({e.onset_score for e in piece.events})
    out = []
    for o in onsets:
        pitches = frozenset(e.pitch for e in piece.events
                            if e.onset_score <= o < e.onset_score + e.duration_score)
        perf = [e.onset_perf for e in piece.events if e.onset_score == o]
        out.append((o, None if perf[0] is None else min(perf), pitches))
    return out


@st.composite
def pieces(draw):
    aligned = draw(st.booleans())
    n = draw(st.integers(1, 30))
    evs = []
    for _ in range(n):
        on = F(draw(st.integers(0, 24)), draw(st.sampled_from([1, 2, 3, 4])))
        d = F(draw(st.integers(1, 12)), draw(st.sampled_from([1, 2, 4])))
        evs.append(ev(draw(st.integers(30, 90)), on, d,
                      float(on) * 0.5 + draw(st.floats(0, 0.01)) if aligned else None))
    return Piece("p", tuple(evs))


@settings(max_examples=200, deadline=None)
@given(pieces())
def test_matches_brute_force_scan(piece):
    seq = full_expand(piece)
    assert [(s.onset_score, s.onset_perf, s.pitches) for s in seq.slices] == brute_force(piece)
    assert len(seq) == len({e.onset_score for e in piece.events})


def seq_of(*sets):
    return SliceSequence("p", tuple(Slice(F(i), None, frozenset(s)) for i, s in enumerate(sets)))


def test_merge_repeats_examples():
    out = merge_repeats(seq_of({60, 64, 67}, {60, 64, 67}, {65, 69}))
    assert [set(s.pitches) for s in out.slices] == [{60, 64, 67}, {65, 69}]
    out = merge_repeats(seq_of({60, 64, 67}, {72, 76, 79}))
    assert [set(s.pitches) for s in out.slices] == [{60, 64, 67}]
    assert out.slices[0].onset_score == 0
    s = seq_of({60}, {62}, {60})
    assert merge_repeats(s) == s


@settings(max_examples=100, deadline=None)
@given(pieces())
def test_merge_repeats_idempotent(piece):
    once = merge_repeats(full_expand(piece))
    assert merge_repeats(once) == once
