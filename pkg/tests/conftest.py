from fractions import Fraction

import pytest

from vltgrams.corpus_io import Corpus, NoteEvent, Piece

ACCEPTANCE_LINES = []


def make_piece(piece_id, sonorities, iois=None, start=0.0, aligned=True):
    """Block-chord piece: one sonority per beat, performance onsets from ``iois``."""
    onsets = [start]
    if iois is None:
        iois = [0.5] * (len(sonorities) - 1)
    for d in iois:
        onsets.append(onsets[-1] + d)
    events = []
    for j, pitches in enumerate(sonorities):
        for p in pitches:
            if aligned:
                events.append(NoteEvent(p, Fraction(j), Fraction(1), onsets[j], 0.4))
            else:
                events.append(NoteEvent(p, Fraction(j), Fraction(1)))
    return Piece(piece_id, tuple(events))


def make_corpus(*pieces):
    return Corpus(tuple(pieces))


# Three distinct chord types with consistent bass motions between them.
A = (60, 64, 67)        # {4,7}, bass C
B = (62, 65, 69)        # {3,7}, bass D
C = (55, 59, 62, 65)    # {4,7,10}, bass G

CADENCE_C = [(65, 69, 74), (67, 72, 76), (67, 71, 74, 77), (60, 64, 67)]


@pytest.fixture
def abab():
    return make_corpus(make_piece("p1", [A, B, A, B]))


@pytest.fixture
def abcabc():
    return make_corpus(make_piece("p1", [A, B, C, A, B, C]))


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
