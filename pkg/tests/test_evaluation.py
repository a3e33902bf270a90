import pytest

from conftest import A, B, C, make_corpus, make_piece
from vltgrams.evaluation import (CapabilityError, EvaluationError, ModelConfig, evaluate,
                                 fold_partition, reciprocal_rank, sweep)
from vltgrams.ranking import accumulate, rank_table
from vltgrams.expansion import expand_corpus
from vltgrams.skipgrams import SelectionConfig
from vltgrams.synth import SynthParams, generate_corpus
from vltgrams.vlt import CADENCE, encode_sequence, ngram_type, resolve_target
from vltgrams.weighting import WeightScheme

NONE = WeightScheme("none")
TARGET = resolve_target(CADENCE)


def test_reciprocal_rank_values():
    assert reciprocal_rank(1) == 1.0
    assert reciprocal_rank(4) == 0.25
    assert reciprocal_rank(None) == 0.0
    with pytest.raises(EvaluationError):
        reciprocal_rank(0)


def _bigram(corpus, i):
    enc = encode_sequence(expand_corpus(corpus)[0])
    return ngram_type(enc, (i, i + 1))


def test_most_frequent_target_ranks_first_under_count():
    corpus = make_corpus(make_piece("p1", [A, B, A, B, A, B, C]))
    target = _bigram(corpus, 0)
    res = evaluate(corpus, ModelConfig(2, SelectionConfig.fixed(0), NONE, "count", folds=1),
                   target)
    assert (res.rank, res.rr, res.mrr) == (1, 1.0, 1.0)


def test_absent_target_gives_zero():
    corpus = make_corpus(make_piece("p1", [A, B, A, B]))
    absent = _bigram(make_corpus(make_piece("q", [A, C])), 0)
    res = evaluate(corpus, ModelConfig(2, SelectionConfig.fixed(0), NONE, "pmi", folds=1), absent)
    assert res.rank is None and res.mrr == 0.0


def test_single_fold_mrr_equals_rr_and_folds_average():
    corpus = generate_corpus(SynthParams(pieces=12, slices_per_piece=8, seed=5))
    cfg = ModelConfig(4, SelectionConfig.fixed(1), WeightScheme("periodicity"), "pwpmi", folds=1)
    res = evaluate(corpus, cfg, TARGET)
    assert res.mrr == res.rr and res.per_fold == []
    res4 = evaluate(corpus, ModelConfig(4, cfg.selection, cfg.weighting, "pwpmi", folds=4), TARGET)
    assert len(res4.per_fold) == 4
    assert res4.mrr == pytest.approx(sum(f.rr for f in res4.per_fold) / 4)
    assert sum(f.pieces for f in res4.per_fold) == 12


def test_removing_target_zeroes_rr():
    corpus = generate_corpus(SynthParams(pieces=10, slices_per_piece=8, plant_rate=0.0, seed=9))
    res = evaluate(corpus, ModelConfig(4, SelectionConfig.fixed(0), NONE, "count", folds=2),
                   TARGET)
    assert res.rr == 0.0 and res.mrr == 0.0


def test_rank_matches_table():
    corpus = generate_corpus(SynthParams(pieces=10, slices_per_piece=8, seed=2))
    cfg = ModelConfig(4, SelectionConfig.fixed(2), WeightScheme("proximity"), "lpmi", folds=1)
    d = accumulate(expand_corpus(corpus), 4, cfg.selection, cfg.weighting)
    assert evaluate(corpus, cfg, TARGET).rank == rank_table(d, "lpmi").rank_of(TARGET)


def test_evaluate_is_deterministic():
    corpus = generate_corpus(SynthParams(pieces=15, slices_per_piece=8, seed=3))
    cfg = ModelConfig(4, SelectionConfig.variable(1.0), WeightScheme("resonance"), "dpmi",
                      folds=3, seed=7)
    assert evaluate(corpus, cfg, TARGET).to_dict() == evaluate(corpus, cfg, TARGET).to_dict()


def test_fold_partition_properties():
    ids = [f"x{i}" for i in range(23)]
    parts = fold_partition(ids, 5, 1)
    assert sorted(i for p in parts for i in p) == sorted(ids)
    assert {len(p) for p in parts} <= {4, 5}
    assert parts == fold_partition(list(reversed(ids)), 5, 1)
    assert parts != fold_partition(ids, 5, 2)
    assert fold_partition(ids, 1, 0) == [sorted(ids)]
    with pytest.raises(EvaluationError):
        fold_partition(ids[:3], 4, 0)


def test_capability_errors():
    score_only = make_corpus(make_piece("s", [A, B, C, A], aligned=False))
    target = _bigram(score_only, 0)
    with pytest.raises(CapabilityError):
        evaluate(score_only, ModelConfig(2, SelectionConfig.variable(0.5), NONE, "pmi", folds=1),
                 target)
    with pytest.raises(CapabilityError):
        evaluate(score_only, ModelConfig(2, SelectionConfig.fixed(0), WeightScheme("proximity"),
                                         "pmi", folds=1), target)
    with pytest.raises(EvaluationError):
        evaluate(score_only, ModelConfig(3, SelectionConfig.fixed(0), NONE, "pmi", folds=1),
                 target)


def test_one_cell_sweep_equals_evaluate():
    corpus = generate_corpus(SynthParams(pieces=10, slices_per_piece=8, seed=4))
    sel, w = SelectionConfig.fixed(1), WeightScheme("periodicity")
    rep = sweep(corpus, TARGET, 4, [sel], [w], ["pwpmi"], folds=2, seed=3)
    res = evaluate(corpus, ModelConfig(4, sel, w, "pwpmi", folds=2, seed=3), TARGET)
    assert len(rep.results) == 1
    assert rep.results[0].to_dict() == res.to_dict()


def test_sweep_skips_unsupported_cells():
    score_only = make_corpus(make_piece("s", [A, B, C, A, B], aligned=False))
    target = _bigram(score_only, 0)
    rep = sweep(score_only, target, 2, [SelectionConfig.fixed(0), SelectionConfig.variable(1.0)],
                [NONE], ["count"], folds=1)
    status = {str(r.config.selection): r.status for r in rep.results}
    assert status["fixed:0"] == "ok"
    assert status["variable:1"].startswith("skipped")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_periodicity_tops_noisy_sweep(seed):
    # Heavily jittered noise with a few periodic plants: periodic weighting
    # should separate the target from coincidental matches.
    params = SynthParams(pieces=30, slices_per_piece=16, plant_rate=0.3, plant_jitter=0.0,
                         timing_jitter=0.12, chord_size=3, pitch_range=(55, 70), seed=seed)
    rep = sweep(generate_corpus(params), TARGET, 4, folds=5, seed=seed)
    assert len(rep.results) == 180
    assert rep.best().config.weighting.kind == "periodicity"
