"""Reciprocal-rank evaluation of a target pattern and the configuration sweep.

A model configuration is run on the whole corpus (``rank_full``) and, when
``folds > 1``, on each of ``folds`` disjoint piece subsets drawn by a seeded
shuffle. MRR is the mean reciprocal rank over folds; a fold in which the
target does not occur contributes 0.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .expansion import expand_corpus
from .ranking import (MEASURES, Distribution, RankingError, merge_into, fingerprint,
                      piece_distribution, rank_table)
from .skipgrams import SelectionConfig
from .vlt import NGramType, format_pattern
from .weighting import SCHEMES, WeightScheme

__all__ = [
    "EvaluationError",
    "CapabilityError",
    "PRNG_NAME",
    "ModelConfig",
    "FoldResult",
    "EvalResult",
    "SweepReport",
    "reciprocal_rank",
    "fold_partition",
    "evaluate",
    "sweep",
    "default_grid",
    "DEFAULT_SELECTIONS",
    "DEFAULT_WEIGHTINGS",
]

PRNG_NAME = "numpy.random.PCG64"

DEFAULT_SELECTIONS = tuple([SelectionConfig.fixed(t) for t in range(5)]
                           + [SelectionConfig.variable(w) for w in (0.5, 1.0, 1.5, 2.0)])
DEFAULT_WEIGHTINGS = tuple(WeightScheme(k) for k in SCHEMES)

SWEEP_CSV_HEADER = ("selection", "param", "weighting", "measure", "k_folds",
                    "rank_full", "rr_full", "mrr", "table_size", "status")


class EvaluationError(ValueError):
    pass


class CapabilityError(EvaluationError):
    """The configuration needs data the corpus does not have."""


@dataclass(frozen=True)
class ModelConfig:
    n: int = 4
    selection: SelectionConfig = SelectionConfig.fixed(3)
    weighting: WeightScheme = WeightScheme("periodicity")
    measure: str = "pwpmi"
    merge_repeats: bool = False
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise EvaluationError(f"n must be >= 2, got {self.n}")
        if self.measure not in MEASURES:
            raise EvaluationError(f"unknown measure {self.measure!r}")
        if self.folds < 1:
            raise EvaluationError(f"folds must be >= 1, got {self.folds}")

    @property
    def needs_performance(self) -> bool:
        return self.selection.needs_performance or self.weighting.needs_performance

    def to_dict(self) -> dict:
        return {"n": self.n, "selection": str(self.selection),
                "window_scope": self.selection.scope,
                "weighting": self.weighting.kind, **self.weighting.params(),
                "measure": self.measure, "merge_repeats": self.merge_repeats,
                "folds": self.folds, "seed": self.seed}

    def sort_key(self):
        return (self.selection.sort_key(), self.weighting.kind, self.measure)


@dataclass
class FoldResult:
    fold: int
    rank: Optional[int]
    rr: float
    pieces: int


@dataclass
class EvalResult:
    config: ModelConfig
    rank: Optional[int]
    rr: float
    mrr: float
    table_size: int
    per_fold: list = field(default_factory=list)
    status: str = "ok"
    top: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"config": self.config.to_dict(), "rank": self.rank, "rr": self.rr,
               "mrr": self.mrr, "table_size": self.table_size,
               "per_fold": [{"fold": f.fold, "rank": f.rank, "rr": f.rr, "pieces": f.pieces}
                            for f in self.per_fold],
               "status": self.status}
        if self.top:
            out["top"] = self.top
        return out


def reciprocal_rank(rank: Optional[int]) -> float:
    """``1/rank``, or 0 when the target is absent."""
    if rank is None:
        return 0.0
    if rank < 1:
        raise EvaluationError(f"rank must be >= 1, got {rank}")
    return 1.0 / rank


def fold_partition(piece_ids: Sequence[str], folds: int, seed: int) -> list:
    """Split piece ids into ``folds`` disjoint, near-equal groups.

    Ids are sorted before the seeded shuffle, so the partition depends only
    on the set of ids, ``folds`` and ``seed``.
    """
    ids = sorted(piece_ids)
    if folds == 1:
        return [ids]
    if folds > len(ids):
        raise EvaluationError(f"{folds} folds requested but the corpus has {len(ids)} pieces")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(len(ids))
    return [sorted(ids[i] for i in chunk) for chunk in np.array_split(perm, folds)]


def check_capability(corpus, config: ModelConfig, target: Optional[NGramType] = None):
    if config.needs_performance and not corpus.has_performance:
        missing = sorted(p.piece_id for p in corpus if not p.has_performance)
        what = (f"selection {config.selection}" if config.selection.needs_performance
                else f"weighting {config.weighting.kind}")
        raise CapabilityError(
            f"{what} needs performance times (onset_s/dur_s), missing in "
            f"{len(missing)} piece(s), e.g. {missing[0]!r}")
    if config.folds > 1 and config.folds > len(corpus):
        raise CapabilityError(f"{config.folds} folds requested but the corpus has "
                              f"{len(corpus)} pieces")
    if target is not None and len(target) != config.n:
        raise EvaluationError(f"target has length {len(target)} but n={config.n}")


def _sum(piece_dists: dict, ids, n, config) -> Distribution:
    acc = Distribution(n=n, config=config)
    for pid in sorted(ids):
        merge_into(acc, piece_dists[pid])
    return acc


def _distributions(corpus, n, selection, weighting, merge_repeats, folds, seed):
    """Whole-corpus and per-fold distributions for one (selection, weighting)."""
    fp = fingerprint(n, selection, weighting, merge_repeats)
    seqs = expand_corpus(corpus, merge_repeats)
    per_piece = {s.piece_id: piece_distribution(s, n, selection, weighting, fp) for s in seqs}
    full = _sum(per_piece, per_piece, n, fp)
    parts = fold_partition(list(per_piece), folds, seed) if folds > 1 else []
    return full, [_sum(per_piece, part, n, fp) for part in parts]


def _rank(dist: Distribution, measure: str, target):
    if not dist.joint:
        return None, 0, None
    table = rank_table(dist, measure)
    return table.rank_of(target), len(table), table


def _result(config, target, full, fold_dists, top=0) -> EvalResult:
    rank, size, table = _rank(full, config.measure, target)
    rr = reciprocal_rank(rank)
    per_fold = []
    for i, d in enumerate(fold_dists):
        r, _, _ = _rank(d, config.measure, target)
        per_fold.append(FoldResult(i, r, reciprocal_rank(r), d.piece_count))
    mrr = rr if not per_fold else sum(f.rr for f in per_fold) / len(per_fold)
    rows = table.top(top).to_records() if (table is not None and top) else []
    return EvalResult(config, rank, rr, mrr, size, per_fold, "ok", rows)


def evaluate(corpus, config: ModelConfig, target: NGramType, top: int = 0) -> EvalResult:
    """Rank ``target`` under ``config`` on the corpus and, for folds > 1, per fold."""
    check_capability(corpus, config, target)
    full, fold_dists = _distributions(corpus, config.n, config.selection, config.weighting,
                                      config.merge_repeats, config.folds, config.seed)
    return _result(config, target, full, fold_dists, top)


# -- sweep -----------------------------------------------------------------------

def default_grid():
    return DEFAULT_SELECTIONS, DEFAULT_WEIGHTINGS, MEASURES


def _sweep_job(args):
    corpus, base, selection, weighting, measures, target, top = args
    configs = [ModelConfig(base.n, selection, weighting, m, base.merge_repeats,
                           base.folds, base.seed) for m in measures]
    try:
        check_capability(corpus, configs[0], target)
    except CapabilityError as exc:
        return [EvalResult(c, None, 0.0, 0.0, 0, [], f"skipped: {exc}") for c in configs]
    full, fold_dists = _distributions(corpus, base.n, selection, weighting,
                                      base.merge_repeats, base.folds, base.seed)
    return [_result(c, target, full, fold_dists, top) for c in configs]


@dataclass
class SweepReport:
    n: int
    target: NGramType
    folds: int
    seed: int
    results: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_CSV_HEADER)
        for r in self.results:
            c = r.config
            w.writerow([c.selection.mode, f"{c.selection.param:g}", c.weighting.kind, c.measure,
                        c.folds, "" if r.rank is None else r.rank, f"{r.rr:.6f}",
                        f"{r.mrr:.6f}", r.table_size, r.status])
        return buf.getvalue()

    def top_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("selection", "param", "weighting", "measure", "rank", "pattern", "score",
                    "weighted_count", "raw_count", "piece_count"))
        for r in self.results:
            c = r.config
            for row in r.top:
                w.writerow([c.selection.mode, f"{c.selection.param:g}", c.weighting.kind,
                            c.measure, row["rank"], row["pattern"], f"{row['score']:.6f}",
                            f"{row['weighted_count']:.6f}", row["raw_count"],
                            row["piece_count"]])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"n": self.n, "target": format_pattern(self.target), "k_folds": self.folds,
                "seed": self.seed, "fold_prng": PRNG_NAME,
                "cells": [r.to_dict() for r in self.results]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def best(self) -> EvalResult:
        return self.results[0]


def sweep(corpus, target: NGramType, n: int = 4, selections=None, weightings=None,
          measures=None, folds: int = 10, seed: int = 0, merge_repeats: bool = False,
          threads: int = 1, top: int = 0) -> SweepReport:
    """Evaluate every (selection, weighting, measure) cell of the grid.

    Distributions are shared across measures within a (selection, weighting)
    pair. Cells whose configuration the corpus cannot support are kept and
    flagged ``skipped``. Results are sorted by MRR descending, then by
    (selection, weighting, measure).
    """
    selections = DEFAULT_SELECTIONS if selections is None else tuple(selections)
    weightings = DEFAULT_WEIGHTINGS if weightings is None else tuple(weightings)
    measures = MEASURES if measures is None else tuple(measures)
    for m in measures:
        if m not in MEASURES:
            raise RankingError(f"unknown measure {m!r}")
    if len(target) != n:
        raise EvaluationError(f"target has length {len(target)} but n={n}")
    if folds > 1 and folds > len(corpus):
        raise EvaluationError(f"{folds} folds requested but the corpus has {len(corpus)} pieces")
    base = ModelConfig(n, DEFAULT_SELECTIONS[0], DEFAULT_WEIGHTINGS[0], MEASURES[0],
                       merge_repeats, folds, seed)
    jobs = [(corpus, base, s, w, measures, target, top) for s in selections for w in weightings]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_sweep_job, jobs))
    else:
        chunks = [_sweep_job(j) for j in jobs]
    results = [r for chunk in chunks for r in chunk]
    results.sort(key=lambda r: (-r.mrr, r.config.sort_key()))
    return SweepReport(n, target, folds, seed, results)
