"""Weighted n-gram distributions and the PMI family of ranking measures.

Probabilities are estimated as

* ``p(g)      = weighted_count(g) / total_joint_weight``
* ``p(c)      = unigram_count(c) / total_unigrams`` over all slices
* ``p_pre(h)  = prefix_weight(h) / total_prefix_weight`` where the prefix
  distribution is built with the same selection and weighting at length n-1.

Measures::

    pmi   = log2(p(g) / prod_i p(c_i))
    dpmi  = log2(p(g) / (p_pre(g[:-1]) * p(c_n)))
    lpmi  = weighted_count(g) * pmi
    pwpmi = piece_count(g) * pmi
    count = weighted_count(g)
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .skipgrams import SelectionConfig, SelectionError, index_array
from .vlt import NGramType, Token, encode_sequence, format_chord, format_pattern, parse_pattern
from .weighting import WeightError, WeightScheme

__all__ = [
    "RankingError",
    "MEASURES",
    "JointEntry",
    "Distribution",
    "fingerprint",
    "tally",
    "piece_distribution",
    "accumulate",
    "accumulate_many",
    "piece_distributions",
    "merge",
    "merge_into",
    "score",
    "score_pmi",
    "score_dpmi",
    "score_lpmi",
    "score_pwpmi",
    "RankRow",
    "RankTable",
    "rank_table",
    "score_all",
    "score_many",
    "rank_of",
]

MEASURES = ("count", "pmi", "dpmi", "lpmi", "pwpmi")
RANK_CSV_HEADER = ("rank", "pattern", "score", "weighted_count", "raw_count", "piece_count")


class RankingError(ValueError):
    pass


@dataclass
class JointEntry:
    weighted_count: float
    raw_count: int
    pieces: frozenset

    @property
    def piece_count(self) -> int:
        return len(self.pieces)


@dataclass
class Distribution:
    n: int
    config: str = ""
    joint: dict = field(default_factory=dict)      # NGramType -> JointEntry
    unigram: dict = field(default_factory=dict)    # ChordType -> int
    prefix: dict = field(default_factory=dict)     # NGramType (n-1) -> float
    total_joint_weight: float = 0.0
    total_unigrams: int = 0
    total_prefix_weight: float = 0.0
    piece_ids: frozenset = frozenset()

    @property
    def piece_count(self) -> int:
        return len(self.piece_ids)

    def __len__(self):
        return len(self.joint)

    def __contains__(self, g):
        return g in self.joint

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        joint = sorted(((format_pattern(g), e) for g, e in self.joint.items()), key=lambda x: x[0])
        prefix = sorted((format_pattern(h), w) for h, w in self.prefix.items())
        unigram = sorted((format_chord(c), k) for c, k in self.unigram.items())
        return {
            "n": self.n,
            "config": self.config,
            "piece_ids": sorted(self.piece_ids),
            "total_joint_weight": self.total_joint_weight,
            "total_unigrams": self.total_unigrams,
            "total_prefix_weight": self.total_prefix_weight,
            "joint": [{"pattern": p, "weighted_count": e.weighted_count,
                       "raw_count": e.raw_count, "pieces": sorted(e.pieces)} for p, e in joint],
            "unigram": [{"chord": c, "count": k} for c, k in unigram],
            "prefix": [{"pattern": p, "weighted_count": w} for p, w in prefix],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Distribution":
        return cls(
            n=data["n"],
            config=data.get("config", ""),
            joint={parse_pattern(r["pattern"]): JointEntry(r["weighted_count"], r["raw_count"],
                                                         frozenset(r["pieces"]))
                   for r in data["joint"]},
            unigram={parse_pattern(r["chord"])[0].chord: r["count"] for r in data["unigram"]},
            prefix={parse_pattern(r["pattern"]): r["weighted_count"] for r in data["prefix"]},
            total_joint_weight=data["total_joint_weight"],
            total_unigrams=data["total_unigrams"],
            total_prefix_weight=data["total_prefix_weight"],
            piece_ids=frozenset(data["piece_ids"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def fingerprint(n: int, selection: SelectionConfig, weighting: WeightScheme,
                merge_repeats: bool = False) -> str:
    return f"n={n};selection={selection};weighting={weighting};merge_repeats={merge_repeats}"


def tally(weighted: Iterable, n: Optional[int] = None):
    """Sum ``(instance, weight)`` pairs by type.

    Returns ``(joint, total)`` with ``joint[g] = [weight_sum, raw_count, piece_ids]``.
    """
    joint: dict = {}
    total = 0.0
    for inst, w in weighted:
        if n is None:
            n = len(inst.indices)
        elif len(inst.indices) != n:
            raise RankingError(f"mixed n-gram lengths: {n} and {len(inst.indices)}")
        entry = joint.get(inst.type)
        if entry is None:
            joint[inst.type] = [w, 1, {inst.piece_id}]
        else:
            entry[0] += w
            entry[1] += 1
            entry[2].add(inst.piece_id)
        total += w
    return joint, total


class _Prepared:
    """Per-sequence arrays shared by the joint and prefix passes."""

    def __init__(self, encoded):
        ids: dict = {}
        self.chords = [ids.setdefault(e.chord, len(ids)) for e in encoded]
        self.chord_of = list(ids)
        self.cid = np.array(self.chords, dtype=np.int64)
        self.bass = np.array([e.bass_pc for e in encoded], dtype=np.int64)
        self.has_perf = bool(encoded) and encoded[0].onset_perf is not None
        self.onsets = (np.array([e.onset_perf for e in encoded], dtype=np.float64)
                       if self.has_perf else None)
        self.length = len(encoded)
        self._tokens = None

    def tokens(self):
        if self._tokens is None:
            self._tokens = [Token(None if m == 12 else m, c)
                            for m in range(13) for c in self.chord_of]
        return self._tokens


def _count_types(prep: _Prepared, n, selection, weightings):
    """Weighted and raw counts per n-gram type for one sequence, once per
    weighting scheme (enumeration and typing are shared).

    Each instance is reduced to the digit row (chord id, motion, chord id,
    ...), rows are grouped with ``np.unique`` and summed with ``bincount``.
    Returns ``(types, raw_counts, [(weight_sums, total), ...])``.
    """
    if selection.needs_performance and not prep.has_perf:
        raise SelectionError("variable selection needs performance times")
    for weighting in weightings:
        if weighting.needs_performance and not prep.has_perf:
            raise WeightError(f"{weighting.kind} weighting needs performance times")
    idx = index_array(prep.length, n, selection, prep.onsets)
    if not len(idx):
        return [], [], [([], 0.0) for _ in weightings]
    digits = np.empty((len(idx), 2 * n - 1), dtype=np.int64)
    digits[:, 0::2] = prep.cid[idx]
    digits[:, 1::2] = np.diff(prep.bass[idx], axis=1) % 12
    base = max(len(prep.chord_of), 12)
    if base ** (2 * n - 1) < 2 ** 62:
        keys = digits[:, 0].copy()
        for j in range(1, 2 * n - 1):
            keys = keys * base + digits[:, j]
        _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
        rows = digits[first]
    else:
        rows, inv = np.unique(digits, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    raw = np.bincount(inv, minlength=len(rows))
    sums = []
    for weighting in weightings:
        weights = weighting.weigh_array(prep.onsets, idx)
        if weights is None:
            sums.append((raw.astype(np.float64).tolist(), float(len(idx))))
        else:
            wsum = np.bincount(inv, weights=weights, minlength=len(rows)).tolist()
            sums.append((wsum, math.fsum(wsum)))
    # Flat token table: motion m (12 = initial) times chord id.
    k = len(prep.chord_of)
    flat = rows[:, 0::2].copy()
    flat[:, 0] += 12 * k
    flat[:, 1:] += rows[:, 1::2] * k
    get = prep.tokens().__getitem__
    new = tuple.__new__
    types = [new(NGramType, map(get, r)) for r in flat.tolist()]
    return types, raw.tolist(), sums


def piece_distributions(seq, n: int, selection: SelectionConfig, weightings,
                        configs=None) -> list:
    """One single-piece distribution per weighting scheme, sharing enumeration."""
    weightings = list(weightings)
    configs = [""] * len(weightings) if configs is None else list(configs)
    encoded = encode_sequence(seq)
    pieces = frozenset([seq.piece_id])
    prep = _Prepared(encoded)
    jtypes, jraw, jsums = _count_types(prep, n, selection, weightings)
    ptypes, _, psums = _count_types(prep, n - 1, selection, weightings)
    unigram = dict(Counter(e.chord for e in encoded))
    out = []
    for config, (jw, total), (pw, ptotal) in zip(configs, jsums, psums):
        out.append(Distribution(
            n=n, config=config,
            joint={g: JointEntry(w, k, pieces) for g, w, k in zip(jtypes, jw, jraw)},
            unigram=dict(unigram),
            prefix=dict(zip(ptypes, pw)),
            total_joint_weight=total,
            total_unigrams=len(encoded),
            total_prefix_weight=ptotal,
            piece_ids=pieces,
        ))
    return out


def piece_distribution(seq, n: int, selection: SelectionConfig, weighting: WeightScheme,
                       config: str = "") -> Distribution:
    """Distribution contributed by a single slice sequence."""
    return piece_distributions(seq, n, selection, [weighting], [config])[0]


def merge_into(acc: Distribution, d: Distribution) -> None:
    """In-place ``acc += d``."""
    if acc.n != d.n:
        raise RankingError(f"cannot merge distributions with n={acc.n} and n={d.n}")
    if acc.config and d.config and acc.config != d.config:
        raise RankingError(f"config mismatch: {acc.config!r} vs {d.config!r}")
    acc.config = acc.config or d.config
    joint = acc.joint
    if not joint:
        joint.update(d.joint)
    else:
        for g, e in d.joint.items():
            cur = joint.get(g)
            if cur is None:
                joint[g] = e
            else:
                joint[g] = JointEntry(cur.weighted_count + e.weighted_count,
                                      cur.raw_count + e.raw_count, cur.pieces | e.pieces)
    for c, k in d.unigram.items():
        acc.unigram[c] = acc.unigram.get(c, 0) + k
    prefix = acc.prefix
    if not prefix:
        prefix.update(d.prefix)
    else:
        for h, w in d.prefix.items():
            prefix[h] = prefix.get(h, 0.0) + w
    acc.total_joint_weight += d.total_joint_weight
    acc.total_unigrams += d.total_unigrams
    acc.total_prefix_weight += d.total_prefix_weight
    acc.piece_ids = acc.piece_ids | d.piece_ids


def _copy(d: Distribution) -> Distribution:
    return Distribution(d.n, d.config, dict(d.joint), dict(d.unigram), dict(d.prefix),
                        d.total_joint_weight, d.total_unigrams, d.total_prefix_weight,
                        d.piece_ids)


def merge(d1: Distribution, d2: Distribution) -> Distribution:
    """Pointwise sum of two distributions built under the same configuration.

    The empty distribution (no pieces) is the identity.
    """
    out = _copy(d1)
    merge_into(out, d2)
    return out


def accumulate_many(sequences, n: int, selection: SelectionConfig, weightings,
                    configs=None) -> list:
    """:func:`accumulate` for several weighting schemes in one enumeration pass."""
    weightings = list(weightings)
    if configs is None:
        configs = [fingerprint(n, selection, w) for w in weightings]
    results = [Distribution(n=n, config=c) for c in configs]
    for seq in sorted(sequences, key=lambda s: s.piece_id):
        for acc, d in zip(results, piece_distributions(seq, n, selection, weightings, configs)):
            merge_into(acc, d)
    return results


def accumulate(sequences, n: int, selection: SelectionConfig, weighting: WeightScheme,
               config: Optional[str] = None) -> Distribution:
    """Build the corpus distribution from expanded slice sequences.

    Per-piece distributions are reduced in ascending ``piece_id`` order so
    the floating-point sums do not depend on input order.
    """
    configs = None if config is None else [config]
    return accumulate_many(sequences, n, selection, [weighting], configs)[0]


# -- scoring ---------------------------------------------------------------------

def _entry(d: Distribution, g: NGramType) -> JointEntry:
    try:
        return d.joint[g]
    except KeyError:
        raise RankingError(f"pattern {format_pattern(g)} not in distribution") from None


def _log2_ratio_pmi(d: Distribution, g: NGramType, e: JointEntry) -> float:
    logp = math.log2(e.weighted_count / d.total_joint_weight)
    for tok in g:
        logp -= math.log2(d.unigram[tok.chord] / d.total_unigrams)
    return logp


def score_pmi(d: Distribution, g: NGramType) -> float:
    return _log2_ratio_pmi(d, g, _entry(d, g))


def score_dpmi(d: Distribution, g: NGramType) -> float:
    e = _entry(d, g)
    h = NGramType(g[:-1])
    if h not in d.prefix:
        raise RankingError(f"prefix {format_pattern(h)} of {format_pattern(g)} missing "
                           "from the prefix distribution")
    return (math.log2(e.weighted_count / d.total_joint_weight)
            - math.log2(d.prefix[h] / d.total_prefix_weight)
            - math.log2(d.unigram[g[-1].chord] / d.total_unigrams))


def score_lpmi(d: Distribution, g: NGramType) -> float:
    e = _entry(d, g)
    return e.weighted_count * _log2_ratio_pmi(d, g, e)


def score_pwpmi(d: Distribution, g: NGramType) -> float:
    e = _entry(d, g)
    return e.piece_count * _log2_ratio_pmi(d, g, e)


def _score_count(d, g):
    return _entry(d, g).weighted_count


_SCORERS = {"count": _score_count, "pmi": score_pmi, "dpmi": score_dpmi,
            "lpmi": score_lpmi, "pwpmi": score_pwpmi}


def score_many(d: Distribution, measures) -> dict:
    """``{measure: {type: score}}`` for every type in ``d``.

    Values equal :func:`score`; the PMI core is computed once and shared.
    """
    for m in measures:
        if m not in _SCORERS:
            raise RankingError(f"unknown measure {m!r} (expected one of {', '.join(MEASURES)})")
    joint = d.joint
    out = {}
    if "count" in measures:
        out["count"] = {g: e.weighted_count for g, e in joint.items()}
    log2 = math.log2
    tw = d.total_joint_weight
    lu = {c: log2(k / d.total_unigrams) for c, k in d.unigram.items()}
    if "dpmi" in measures:
        dp = out["dpmi"] = {}
        tp = d.total_prefix_weight
        prefix = d.prefix
        for g, e in joint.items():
            h = tuple.__new__(NGramType, g[:-1])
            if h not in prefix:
                raise RankingError(f"prefix {format_pattern(h)} of {format_pattern(g)} missing "
                                   "from the prefix distribution")
            dp[g] = log2(e.weighted_count / tw) - log2(prefix[h] / tp) - lu[g[-1].chord]
    pmi_based = [m for m in ("pmi", "lpmi", "pwpmi") if m in measures]
    if pmi_based:
        marg = lu.__getitem__
        chord = itemgetter(1)
        pmi = {g: log2(e.weighted_count / tw) - sum(map(marg, map(chord, g)))
               for g, e in joint.items()}
        if "pmi" in measures:
            out["pmi"] = pmi
        if "lpmi" in measures:
            out["lpmi"] = {g: e.weighted_count * pmi[g] for g, e in joint.items()}
        if "pwpmi" in measures:
            out["pwpmi"] = {g: len(e.pieces) * pmi[g] for g, e in joint.items()}
    return {m: out[m] for m in measures}


def score_all(d: Distribution, measure: str) -> dict:
    """Scores of every type in ``d`` under ``measure`` (same values as :func:`score`)."""
    return score_many(d, [measure])[measure]


def score(d: Distribution, g: NGramType, measure: str) -> float:
    try:
        fn = _SCORERS[measure]
    except KeyError:
        raise RankingError(f"unknown measure {measure!r} (expected one of {', '.join(MEASURES)})") from None
    return fn(d, g)


# -- rank tables -----------------------------------------------------------------

class RankRow(NamedTuple):
    rank: int
    type: NGramType
    score: float
    weighted_count: float
    raw_count: int
    piece_count: int

    @property
    def pattern(self) -> str:
        return format_pattern(self.type)


@dataclass
class RankTable:
    measure: str
    rows: list
    _index: dict = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.rows)

    def rank_of(self, g: NGramType) -> Optional[int]:
        if self._index is None:
            self._index = {row.type: row.rank for row in self.rows}
        return self._index.get(g)

    def top(self, k: Optional[int]) -> "RankTable":
        return RankTable(self.measure, self.rows if k is None else self.rows[:k])

    def to_records(self) -> list:
        return [{"rank": r.rank, "pattern": r.pattern, "score": r.score,
                 "weighted_count": r.weighted_count, "raw_count": r.raw_count,
                 "piece_count": r.piece_count} for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RANK_CSV_HEADER)
        for r in self.rows:
            w.writerow([r.rank, r.pattern, f"{r.score:.6f}", f"{r.weighted_count:.6f}",
                        r.raw_count, r.piece_count])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"measure": self.measure, "rows": self.to_records()}, indent=1)


def rank_table(d: Distribution, measure: str) -> RankTable:
    """Score every type and order by (score desc, weighted count desc, pattern asc).

    Ranks are 1..N with no shared ranks.
    """
    if not d.joint:
        raise RankingError("cannot rank an empty distribution")
    if measure not in _SCORERS:
        raise RankingError(f"unknown measure {measure!r} (expected one of {', '.join(MEASURES)})")
    scores = score_all(d, measure)
    scored = [(-scores[g], -e.weighted_count, g, e) for g, e in d.joint.items()]
    scored.sort(key=lambda x: x[:2])
    # Exact ties on (score, weighted count) fall back to the pattern string.
    i = 0
    while i < len(scored):
        j = i + 1
        while j < len(scored) and scored[j][:2] == scored[i][:2]:
            j += 1
        if j - i > 1:
            scored[i:j] = sorted(scored[i:j], key=lambda x: format_pattern(x[2]))
        i = j
    rows = [RankRow(i, g, -neg, e.weighted_count, e.raw_count, e.piece_count)
            for i, (neg, _, g, e) in enumerate(scored, start=1)]
    return RankTable(measure, rows)


def rank_of(table: RankTable, g: NGramType) -> Optional[int]:
    return table.rank_of(g)
