"""Seeded synthetic corpora with planted cadences, plus brute-force oracles.

Noise pieces are sequences of random block sonorities (``chord_size``
distinct pitches from ``pitch_range``) on a one-beat grid.
Performance onsets follow ``(j + 1) * base_ioi + N(0, timing_jitter)``.
Selected pieces then end with a concrete, randomly transposed realization of
the closing progression ii6 - I64 - V7 - I.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``; the draw
order is fixed, so equal parameters give byte-identical corpora.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .corpus_io import Corpus, NoteEvent, Piece
from .expansion import full_expand, merge_repeats as _merge_repeats
from .ranking import Distribution, JointEntry
from .vlt import BUILTIN_TARGETS, CADENCE, NGramType, Token, ChordType, parse_pattern

__all__ = [
    "PRNG_NAME",
    "SynthParams",
    "CADENCE_PITCHES",
    "generate_corpus",
    "plant_pattern",
    "contains_contiguous",
    "OracleCorpus",
    "oracle_distribution",
    "oracle_score",
    "oracle_scores",
]

PRNG_NAME = "numpy.random.PCG64"

# F-A-D / G-C-E / G-B-D-F / C-E-G in C major.
CADENCE_PITCHES = ((53, 57, 62), (55, 60, 64), (55, 59, 62, 65), (48, 52, 55))

_MAX_REDRAWS = 10_000


@dataclass(frozen=True)
class SynthParams:
    pieces: int = 50
    slices_per_piece: int = 24
    plant_rate: float = 0.7
    base_ioi: float = 0.5
    timing_jitter: float = 0.02
    # Dense two-voice cluster noise: frequent but weakly associated n-grams.
    pitch_range: tuple = (60, 62)
    chord_size: int = 2
    seed: int = 42
    # None: planted slices keep the jittered noise timing; 0.0: exactly periodic.
    plant_jitter: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "pitch_range", tuple(self.pitch_range))
        lo, hi = self.pitch_range
        if self.pieces < 1:
            raise ValueError("pieces must be >= 1")
        if self.slices_per_piece < 4:
            raise ValueError("slices_per_piece must be >= 4")
        if not 0.0 <= self.plant_rate <= 1.0:
            raise ValueError("plant_rate must lie in [0, 1]")
        if not self.base_ioi > 0:
            raise ValueError("base_ioi must be > 0")
        if self.timing_jitter < 0 or (self.plant_jitter is not None and self.plant_jitter < 0):
            raise ValueError("jitter must be >= 0")
        if not 0 <= lo <= hi <= 127:
            raise ValueError("pitch_range must lie within 0..127")
        if not 1 <= self.chord_size <= hi - lo + 1:
            raise ValueError("chord_size must be between 1 and the pitch range width")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pitch_range"] = list(self.pitch_range)
        d["prng"] = PRNG_NAME
        return d


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(np.random.PCG64(seed_or_rng))


def _encode(pitches):
    bass = min(pitches)
    return bass % 12, ChordType({(p - bass) % 12 for p in pitches} - {0})


def contains_contiguous(sonorities: Sequence[Sequence[int]], target: NGramType) -> bool:
    """Scan a list of pitch sets for a contiguous occurrence of ``target``."""
    n = len(target)
    enc = [_encode(s) for s in sonorities]
    for i in range(len(enc) - n + 1):
        window = enc[i:i + n]
        if window[0][1] != target[0].chord:
            continue
        if all(tok.chord == window[j][1] and tok.motion == (window[j][0] - window[j - 1][0]) % 12
               for j, tok in enumerate(target) if j > 0):
            return True
    return False


def _onsets(rng, count, base_ioi, jitter):
    for _ in range(_MAX_REDRAWS):
        grid = (np.arange(count) + 1) * base_ioi
        onsets = grid + (rng.normal(0.0, jitter, count) if jitter > 0 else 0.0)
        if onsets[0] >= 0 and np.all(np.diff(onsets) > 0):
            return [float(x) for x in onsets]
    raise ValueError("timing_jitter is too large for strictly increasing onsets")


def _noise_piece(rng, params: SynthParams, target):
    lo, hi = params.pitch_range
    pool = np.arange(lo, hi + 1)
    for _ in range(_MAX_REDRAWS):
        sons = [sorted(int(p) for p in rng.choice(pool, size=params.chord_size, replace=False))
                for _ in range(params.slices_per_piece)]
        if not contains_contiguous(sons, target):
            break
    else:
        raise ValueError("could not draw a noise piece free of the target")
    onsets = _onsets(rng, params.slices_per_piece, params.base_ioi, params.timing_jitter)
    return sons, onsets


def _piece(piece_id, sonorities, onsets, base_ioi):
    events = []
    for j, (pitches, t) in enumerate(zip(sonorities, onsets)):
        for p in pitches:
            events.append(NoteEvent(p, Fraction(j), Fraction(1), t, base_ioi))
    return Piece(piece_id, tuple(events))


def generate_corpus(params: SynthParams) -> Corpus:
    """Draw a noise corpus and plant the cadence in ``plant_rate`` of its pieces."""
    rng = _rng(params.seed)
    target = parse_pattern(BUILTIN_TARGETS[CADENCE])
    pieces = []
    width = len(str(params.pieces - 1))
    for k in range(params.pieces):
        sons, onsets = _noise_piece(rng, params, target)
        pieces.append(_piece(f"synth{k:0{width}d}", sons, onsets, params.base_ioi))
    corpus = Corpus(tuple(pieces))
    return plant_pattern(corpus, CADENCE_PITCHES, "end", params, rng)


def plant_pattern(corpus: Corpus, target_pitches=CADENCE_PITCHES, position: str = "end",
                  params: Optional[SynthParams] = None, rng=None) -> Corpus:
    """Overwrite the final sonorities of selected pieces with ``target_pitches``.

    ``round(plant_rate * pieces)`` pieces are chosen at random; each receives
    its own transposition in -6..5 semitones (redrawn on range overflow).
    Notes sustained from earlier sonorities are cut at the planted region so
    the last ``len(target_pitches)`` slices are exactly the planted ones.
    """
    if position != "end":
        raise ValueError(f"unsupported plant position {position!r}")
    params = params or SynthParams()
    rng = _rng(params.seed if rng is None else rng)
    m = len(target_pitches)
    count = int(round(params.plant_rate * len(corpus)))
    chosen = set(int(i) for i in rng.choice(len(corpus), size=count, replace=False)) \
        if count else set()
    out = []
    for idx, piece in enumerate(corpus.pieces):
        if idx not in chosen:
            out.append(piece)
            continue
        onsets = sorted({e.onset_score for e in piece.events})
        if len(onsets) < m:
            raise ValueError(f"piece {piece.piece_id!r} is shorter than the planted pattern")
        region = onsets[-m:]
        lowest = min(min(s) for s in target_pitches)
        highest = max(max(s) for s in target_pitches)
        for _ in range(_MAX_REDRAWS):
            k = int(rng.integers(-6, 6))
            if 0 <= lowest + k and highest + k <= 127:
                break
        perf = {}
        for e in piece.events:
            if e.onset_score in region and e.has_performance:
                perf[e.onset_score] = min(perf.get(e.onset_score, math.inf), e.onset_perf)
        if perf and params.plant_jitter is not None:
            start = perf[region[0]]
            for j, o in enumerate(region):
                jit = float(rng.normal(0.0, params.plant_jitter)) if params.plant_jitter > 0 and j else 0.0
                perf[o] = start + j * params.base_ioi + jit
        kept = []
        for e in piece.events:
            if e.onset_score >= region[0]:
                continue
            end = e.onset_score + e.duration_score
            if end > region[0]:
                e = replace(e, duration_score=region[0] - e.onset_score)
            kept.append(e)
        for j, (o, pitches) in enumerate(zip(region, target_pitches)):
            score_dur = region[j + 1] - o if j + 1 < m else Fraction(1)
            for p in pitches:
                if perf:
                    kept.append(NoteEvent(p + k, o, score_dur, perf[o], params.base_ioi))
                else:
                    kept.append(NoteEvent(p + k, o, score_dur))
        out.append(Piece(piece.piece_id, tuple(kept)))
    return Corpus(tuple(out))


# -- brute-force oracle -------------------------------------------------------------

def _oracle_weights(kind, t, tau, p0, sigma):
    """Weights from the onset matrix ``t`` (one row per candidate), written
    from the definitions with natural logs and explicit products."""
    m = t.shape[1]
    if kind == "none" or m < 2:
        return np.ones(len(t))
    gaps = t[:, 1:] - t[:, :-1]
    if kind == "proximity":
        return np.exp(-(t[:, -1] - t[:, 0]) / tau)
    if kind == "periodicity":
        return gaps.min(axis=1) / gaps.max(axis=1)
    if kind == "resonance":
        prod = np.ones(len(t))
        for j in range(m - 1):
            prod = prod * np.exp(-(np.log(gaps[:, j] / p0) / math.log(2)) ** 2 / (2 * sigma ** 2))
        return prod ** (1.0 / (m - 1))
    raise ValueError(kind)


def _selected(combos, onsets, selection):
    """Boolean mask over candidate rows."""
    if combos.shape[1] == 1:
        return np.ones(len(combos), dtype=bool)
    if selection.mode == "fixed":
        return (combos[:, -1] - combos[:, 0]) - (combos.shape[1] - 1) <= selection.param
    t = onsets[combos]
    if selection.scope == "span":
        return t[:, -1] - t[:, 0] <= selection.param
    return np.all(t[:, 1:] - t[:, :-1] <= selection.param, axis=1)


class OracleCorpus:
    """Naive reference implementation of the counting pipeline.

    Every candidate index tuple ``itertools.combinations(range(L), n)`` is
    typed once per piece and n (by pitch-class offsets from the first bass),
    then filtered per selection with a boolean mask. Only full expansion is
    shared with the optimized path.
    """

    def __init__(self, corpus: Corpus, merge_repeats: bool = False):
        self.pieces = []
        chord_ids: dict = {}
        for piece in corpus:
            seq = full_expand(piece)
            if merge_repeats:
                seq = _merge_repeats(seq)
            enc = [_encode(s.pitches) for s in seq.slices]
            onsets = [s.onset_perf for s in seq.slices]
            perf = np.array(onsets, dtype=float) if onsets and onsets[0] is not None else None
            bass = np.array([b for b, _ in enc], dtype=np.int64)
            chords = np.array([chord_ids.setdefault(c, len(chord_ids)) for _, c in enc],
                              dtype=np.int64)
            self.pieces.append((seq.piece_id, enc, perf, bass, chords))
        self.pieces.sort(key=lambda x: x[0])
        self.chords = list(chord_ids)
        self._tables = {}
        self._memo = {}

    def _table(self, n):
        """Per piece: candidate combos and their global type ids; plus the type list."""
        if n not in self._tables:
            type_ids: dict = {}
            per_piece = []
            radix = 12 * max(len(self.chords), 1)
            nchords = len(self.chords)
            tokens = [Token(None if m == 12 else m, c) for m in range(13) for c in self.chords]
            for pid, enc, perf, bass, chords in self.pieces:
                combos = np.array(list(itertools.combinations(range(len(enc)), n)),
                                  dtype=np.int64).reshape(-1, n)
                if not len(combos):
                    per_piece.append((combos, np.empty(0, dtype=np.int64)))
                    continue
                rel = (bass[combos] - bass[combos[:, :1]]) % 12
                code = chords[combos] * 12 + rel
                key = np.zeros(len(combos), dtype=object if radix ** n >= 2 ** 62 else np.int64)
                for k in range(n):
                    key = key * radix + code[:, k]
                _, first, inv = np.unique(key, return_index=True, return_inverse=True)
                uc = code[first]
                flat = uc // 12                     # chord ids
                flat[:, 0] += 12 * nchords          # slot of the initial token
                flat[:, 1:] += (np.diff(uc % 12, axis=1) % 12) * nchords
                new = tuple.__new__
                local = [type_ids.setdefault(new(NGramType, map(tokens.__getitem__, r)),
                                             len(type_ids)) for r in flat.tolist()]
                per_piece.append((combos, np.array(local, dtype=np.int64)[inv.reshape(-1)]))
            self._tables[n] = (per_piece, list(type_ids))
        return self._tables[n]

    def _cached(self, key, build):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    def _tally(self, n, selection, weighting):
        """Per-type weight sums, raw counts and piece bitmasks over the corpus."""
        per_piece, types = self._table(n)
        sums = np.zeros(len(types))
        counts = np.zeros(len(types), dtype=np.int64)
        owners = np.zeros(len(types), dtype=np.int64 if len(self.pieces) < 63 else object)
        for k, ((pid, _, perf, _, _), (combos, gids)) in enumerate(zip(self.pieces, per_piece)):
            if selection.mode == "variable" and perf is None:
                raise ValueError("variable selection needs performance times")
            if weighting.kind != "none" and perf is None:
                raise ValueError("weighting needs performance times")
            if not len(combos):
                continue
            mask = self._cached(("mask", n, k, selection),
                                lambda: _selected(combos, perf, selection))
            w = self._cached(("weights", n, k, weighting), lambda: _oracle_weights(
                weighting.kind, perf[combos] if perf is not None else combos,
                weighting.tau, weighting.p0, weighting.sigma))
            c = np.bincount(gids[mask], minlength=len(types))
            sums += np.bincount(gids[mask], weights=w[mask], minlength=len(types))
            counts += c
            owners[c > 0] |= 1 << k
        return types, sums, counts, owners

    def distribution(self, n, selection, weighting, config: str = "") -> Distribution:
        unigram = {}
        units = 0
        for _, enc, _, _, _ in self.pieces:
            for _, chord in enc:
                unigram[chord] = unigram.get(chord, 0) + 1
            units += len(enc)
        pids = [p[0] for p in self.pieces]
        sets: dict = {}

        def piece_set(mask):
            if mask not in sets:
                sets[mask] = frozenset(p for k, p in enumerate(pids) if mask >> k & 1)
            return sets[mask]

        types, sums, counts, owners = self._tally(n, selection, weighting)
        nz = np.flatnonzero(counts)
        joint = {types[i]: JointEntry(w, c, piece_set(o)) for i, w, c, o in
                 zip(nz.tolist(), sums[nz].tolist(), counts[nz].tolist(), owners[nz].tolist())}
        ptypes, psums, pcounts, _ = self._tally(n - 1, selection, weighting)
        pnz = np.flatnonzero(pcounts)
        prefix = dict(zip([ptypes[i] for i in pnz.tolist()], psums[pnz].tolist()))
        return Distribution(
            n=n, config=config, joint=joint, unigram=unigram, prefix=prefix,
            total_joint_weight=math.fsum(sums[nz].tolist()), total_unigrams=units,
            total_prefix_weight=math.fsum(psums[pnz].tolist()),
            piece_ids=frozenset(pids))


def oracle_distribution(corpus: Corpus, config) -> Distribution:
    """Brute-force distribution for a :class:`~vltgrams.evaluation.ModelConfig`."""
    oc = OracleCorpus(corpus, config.merge_repeats)
    return oc.distribution(config.n, config.selection, config.weighting)


def oracle_score(d: Distribution, g: NGramType, measure: str) -> float:
    """Direct, unoptimized evaluation of a ranking measure (natural-log based)."""
    e = d.joint[g]
    pg = e.weighted_count / d.total_joint_weight
    denom = 1.0
    for tok in g:
        denom *= d.unigram[tok.chord] / d.total_unigrams
    pmi = math.log(pg / denom) / math.log(2)
    if measure == "pmi":
        return pmi
    if measure == "dpmi":
        h = NGramType(g[:-1])
        q = (d.prefix[h] / d.total_prefix_weight) * (d.unigram[g[-1].chord] / d.total_unigrams)
        return math.log(pg / q) / math.log(2)
    if measure == "lpmi":
        return e.weighted_count * pmi
    if measure == "pwpmi":
        return len(e.pieces) * pmi
    if measure == "count":
        return e.weighted_count
    raise ValueError(measure)


def oracle_scores(d: Distribution, types: Sequence[NGramType]) -> dict:
    """All measures for ``types`` at once, as ``{measure: array}``.

    Same formulas as :func:`oracle_score`, evaluated with numpy.
    """
    chords = sorted(d.unigram)
    col = {c: i for i, c in enumerate(chords)}
    marg = np.array([d.unigram[c] for c in chords], dtype=float) / d.total_unigrams
    n = len(types[0]) if types else 0
    ids = np.array([[col[tok.chord] for tok in g] for g in types], dtype=np.int64).reshape(-1, n)
    entries = [d.joint[g] for g in types]
    wc = np.fromiter((e.weighted_count for e in entries), float, len(types))
    pc = np.fromiter((len(e.pieces) for e in entries), float, len(types))
    # slicing a type gives a plain tuple, which hashes like the prefix key
    pref = np.fromiter((d.prefix[g[:-1]] for g in types), float, len(types))
    pg = wc / d.total_joint_weight
    pmi = np.log(pg / np.prod(marg[ids], axis=1)) / math.log(2)
    q = (pref / d.total_prefix_weight) * marg[ids[:, -1]] if n else pref
    return {"pmi": pmi, "dpmi": np.log(pg / q) / math.log(2), "lpmi": wc * pmi,
            "pwpmi": pc * pmi, "count": wc}
