import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vltgrams.expansion import Slice, SliceSequence
from vltgrams.skipgrams import (SelectionConfig, SelectionError, count_fixed_expected,
                                enumerate_fixed, enumerate_instances, enumerate_variable,
                                index_array, parse_selection)
from vltgrams.vlt import encode_sequence, ngram_type


def encoded(onsets=None, length=None):
    length = len(onsets) if onsets is not None else length
    slices = tuple(Slice(Fraction(i), None if onsets is None else onsets[i],
                         frozenset({48 + (5 * i) % 12, 64}))
                   for i in range(length))
    return encode_sequence(SliceSequence("p", slices))


def idx(stream):
    return [inst.indices for inst in stream]


def test_fixed_counts_from_examples():
    assert len(idx(enumerate_fixed(encoded(length=5), 2, 0))) == 4
    assert len(idx(enumerate_fixed(encoded(length=5), 2, 1))) == 7
    assert len(idx(enumerate_fixed(encoded(length=6), 3, 2))) == 16
    assert count_fixed_expected(5, 2, 1) == 7
    assert count_fixed_expected(6, 3, 2) == 16
    assert count_fixed_expected(9, 4, 0) == 6
    assert count_fixed_expected(3, 4, 2) == 0


def test_fixed_is_lexicographic_and_typed():
    enc = encoded(length=5)
    insts = list(enumerate_fixed(enc, 2, 1, piece_id="p"))
    assert idx(insts) == sorted(idx(insts))
    assert all(i.type == ngram_type(enc, i.indices) and i.piece_id == "p" for i in insts)


def test_variable_examples():
    assert idx(enumerate_variable(encoded([0.0, 0.4, 0.9, 2.5]), 2, 0.5)) == [(0, 1), (1, 2)]
    assert idx(enumerate_variable(encoded([0.0, 0.4, 0.8, 1.6]), 3, 0.5)) == [(0, 1, 2)]
    on = [0.0, 0.3, 1.1, 1.2, 2.0]
    assert idx(enumerate_variable(encoded(on), 2, 10.0)) == list(itertools.combinations(range(5), 2))


def test_variable_span_scope():
    on = [0.0, 0.4, 0.8, 1.2]
    pair = idx(enumerate_variable(encoded(on), 3, 0.5))
    span = idx(enumerate_variable(encoded(on), 3, 0.9, scope="span"))
    assert pair == [(0, 1, 2), (1, 2, 3)]
    assert span == [(0, 1, 2), (1, 2, 3)]
    assert idx(enumerate_variable(encoded(on), 3, 0.7, scope="span")) == []


def test_variable_needs_performance():
    with pytest.raises(SelectionError):
        list(enumerate_variable(encoded(length=4), 2, 1.0))
    with pytest.raises(SelectionError):
        index_array(4, 2, SelectionConfig.variable(1.0))


def test_selection_config_and_parser():
    assert parse_selection("fixed:3") == SelectionConfig.fixed(3)
    assert parse_selection("variable:0.5", scope="span") == SelectionConfig.variable(0.5, "span")
    assert str(SelectionConfig.variable(1.5)) == "variable:1.5"
    for bad in ("fixed:-1", "fixed:x", "variable:0", "gap:3", "fixed"):
        with pytest.raises(SelectionError):
            parse_selection(bad)


def brute(L, n, sel, onsets):
    out = []
    for c in itertools.combinations(range(L), n):
        if sel.mode == "fixed":
            ok = sum(b - a - 1 for a, b in zip(c, c[1:])) <= sel.param
        elif sel.scope == "pair":
            ok = all(onsets[b] - onsets[a] <= sel.param for a, b in zip(c, c[1:]))
        else:
            ok = onsets[c[-1]] - onsets[c[0]] <= sel.param
        if ok:
            out.append(c)
    return out


selections = st.one_of(
    st.integers(0, 6).map(SelectionConfig.fixed),
    st.tuples(st.sampled_from([0.25, 0.5, 0.7, 1.0, 1.5, 2.0]), st.sampled_from(["pair", "span"]))
    .map(lambda a: SelectionConfig.variable(*a)))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from([0.1, 0.25, 0.3, 0.5, 0.7]), min_size=0, max_size=20),
       st.integers(1, 5), selections)
def test_enumerators_match_naive_filter(iois, n, sel):
    onsets = [0.0]
    for d in iois:
        onsets.append(onsets[-1] + d)
    enc = encoded(onsets)
    want = brute(len(enc), n, sel, onsets)
    got = idx(enumerate_instances(enc, n, sel, "p"))
    assert got == want
    assert sorted(map(tuple, index_array(len(enc), n, sel, onsets).tolist())) == want


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 20), st.integers(1, 5), st.integers(0, 5))
def test_fixed_monotone_in_t(L, n, t):
    a = set(idx(enumerate_fixed(encoded(length=L), n, t)))
    b = set(idx(enumerate_fixed(encoded(length=L), n, t + 1)))
    assert a <= b and len(a) == count_fixed_expected(L, n, t)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), max_size=15), st.integers(2, 4),
       st.floats(0.1, 2.0), st.floats(0.0, 1.0))
def test_variable_monotone_in_w(iois, n, w, extra):
    onsets = [0.0]
    for d in iois:
        onsets.append(onsets[-1] + d)
    enc = encoded(onsets)
    a = idx(enumerate_variable(enc, n, w))
    b = idx(enumerate_variable(enc, n, w + extra))
    assert set(a) <= set(b) and len(set(a)) == len(a)
