import numpy as np
import pytest

from vltgrams.corpus_io import serialize_corpus, transpose_piece
from vltgrams.evaluation import ModelConfig
from vltgrams.expansion import expand_corpus, full_expand
from vltgrams.ranking import accumulate
from vltgrams.skipgrams import SelectionConfig
from vltgrams.synth import (CADENCE_PITCHES, OracleCorpus, SynthParams, contains_contiguous,
                            generate_corpus, oracle_distribution, plant_pattern)
from vltgrams.vlt import CADENCE, encode_sequence, ngram_type, resolve_target
from vltgrams.weighting import WeightScheme

TARGET = resolve_target(CADENCE)
SMALL = dict(pieces=10, slices_per_piece=8)


def sonorities(piece):
    return [sorted(s.pitches) for s in full_expand(piece).slices]


def test_same_seed_same_bytes():
    a = generate_corpus(SynthParams(seed=11, **SMALL))
    b = generate_corpus(SynthParams(seed=11, **SMALL))
    assert serialize_corpus(a) == serialize_corpus(b)
    assert serialize_corpus(a) != serialize_corpus(generate_corpus(SynthParams(seed=12, **SMALL)))


def test_plant_rate_zero_has_no_target():
    c = generate_corpus(SynthParams(plant_rate=0.0, seed=4, **SMALL))
    assert not any(contains_contiguous(sonorities(p), TARGET) for p in c)


def test_zero_jitter_gives_grid_iois():
    c = generate_corpus(SynthParams(timing_jitter=0.0, base_ioi=0.5, seed=2, **SMALL))
    for seq in expand_corpus(c):
        assert set(np.diff([s.onset_perf for s in seq.slices]).tolist()) == {0.5}
    c = generate_corpus(SynthParams(timing_jitter=0.0, base_ioi=0.3, seed=2, **SMALL))
    for seq in expand_corpus(c):
        assert np.allclose(np.diff([s.onset_perf for s in seq.slices]), 0.3, rtol=0, atol=1e-12)


def test_planted_pieces_end_with_target():
    c = generate_corpus(SynthParams(plant_rate=1.0, seed=8, **SMALL))
    for seq in expand_corpus(c):
        enc = encode_sequence(seq)
        assert ngram_type(enc, range(len(enc) - 4, len(enc))) == TARGET
    d = accumulate(expand_corpus(c), 4, SelectionConfig.fixed(0), WeightScheme("none"))
    assert len(d.joint[TARGET].pieces) == len(c)


def test_planted_transpositions_vary_and_stay_invariant():
    c = generate_corpus(SynthParams(plant_rate=1.0, seed=8, pieces=20, slices_per_piece=6))
    basses = {min(sonorities(p)[-1]) for p in c}
    assert len(basses) > 1
    p = c.pieces[0]
    for k in (0, 3):
        enc = encode_sequence(full_expand(transpose_piece(p, k)))
        assert ngram_type(enc, range(len(enc) - 4, len(enc))) == TARGET


def test_planted_count_bound():
    params = SynthParams(plant_rate=0.6, timing_jitter=0.02, seed=21, pieces=20)
    d = accumulate(expand_corpus(generate_corpus(params)), 4, SelectionConfig.fixed(0),
                   WeightScheme("none"))
    assert d.joint[TARGET].weighted_count >= 0.6 * 20


def test_periodic_plant_timing():
    c = generate_corpus(SynthParams(plant_rate=1.0, plant_jitter=0.0, seed=3, **SMALL))
    for seq in expand_corpus(c):
        tail = [s.onset_perf for s in seq.slices[-4:]]
        assert np.allclose(np.diff(tail), 0.5, rtol=0, atol=1e-12)


def test_plant_rejects_short_pieces_and_bad_position():
    c = generate_corpus(SynthParams(plant_rate=0.0, seed=1, pieces=2, slices_per_piece=4))
    with pytest.raises(ValueError):
        plant_pattern(c, CADENCE_PITCHES + ((60,),), "end", SynthParams(plant_rate=1.0))
    with pytest.raises(ValueError):
        plant_pattern(c, CADENCE_PITCHES, "start")


@pytest.mark.parametrize("bad", [dict(pieces=0), dict(slices_per_piece=3), dict(plant_rate=1.5),
                                 dict(base_ioi=0), dict(timing_jitter=-1),
                                 dict(pitch_range=(60, 61), chord_size=3)])
def test_param_validation(bad):
    with pytest.raises(ValueError):
        SynthParams(**bad)


def test_oracle_empty_selection_and_contiguous_counter():
    c = generate_corpus(SynthParams(seed=6, **SMALL))
    oc = OracleCorpus(c)
    assert oc.distribution(2, SelectionConfig.variable(0.05), WeightScheme("none")).joint == {}
    d = oracle_distribution(c, ModelConfig(3, SelectionConfig.fixed(0), WeightScheme("none")))
    textbook = {}
    for seq in expand_corpus(c):
        enc = encode_sequence(seq)
        for i in range(len(enc) - 2):
            g = ngram_type(enc, (i, i + 1, i + 2))
            textbook[g] = textbook.get(g, 0) + 1
    assert {g: e.raw_count for g, e in d.joint.items()} == textbook
