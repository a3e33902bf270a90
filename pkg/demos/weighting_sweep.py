"""Which weighting separates a periodic pattern from noise?

Noise pieces get rough timing, the planted cadence gets exact timing.
A small sweep over selections, weightings and measures reports the MRR of
the cadence for each cell.
"""

from collections import defaultdict

import numpy as np

from vltgrams.evaluation import sweep
from vltgrams.skipgrams import SelectionConfig
from vltgrams.synth import SynthParams, generate_corpus
from vltgrams.vlt import CADENCE, resolve_target
from vltgrams.weighting import WeightScheme

params = SynthParams(pieces=30, slices_per_piece=16, plant_rate=0.3, plant_jitter=0.0,
                     timing_jitter=0.12, chord_size=3, pitch_range=(55, 70), seed=0)
corpus = generate_corpus(params)
target = resolve_target(CADENCE)

selections = [SelectionConfig.fixed(t) for t in (0, 2, 4)] + [SelectionConfig.variable(1.0)]
weightings = [WeightScheme(k) for k in ("none", "proximity", "periodicity", "resonance")]
report = sweep(corpus, target, 4, selections, weightings, ["pmi", "pwpmi"], folds=5, seed=0)

# best cells first
for r in report.results[:6]:
    c = r.config
    print("%-12s %-12s %-6s mrr=%.3f rank=%s" % (c.selection, c.weighting.kind, c.measure,
                                                r.mrr, r.rank))

# average MRR per weighting
by_kind = defaultdict(list)
for r in report.results:
    by_kind[r.config.weighting.kind].append(r.mrr)
print()
for kind, vals in sorted(by_kind.items(), key=lambda kv: -np.mean(kv[1])):
    print("%-12s %.3f" % (kind, np.mean(vals)))
