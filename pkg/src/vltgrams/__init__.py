"""Skip-gram pattern discovery over voice-leading types in polyphonic corpora."""

from .corpus_io import (Corpus, CorpusError, NoteEvent, Piece, parse_corpus, read_corpus,
                        serialize_corpus, transpose_piece, validate_corpus, write_corpus)
from .expansion import Slice, SliceSequence, expand_corpus, full_expand, merge_repeats
from .vlt import (CADENCE, ChordType, NGramType, PatternError, Token, encode_sequence,
                  encode_slice, format_pattern, ngram_type, parse_pattern, resolve_target)
from .skipgrams import (NGramInstance, SelectionConfig, count_fixed_expected, enumerate_fixed,
                        enumerate_variable, parse_selection)
from .weighting import (WeightScheme, weight_none, weight_periodicity, weight_proximity,
                        weight_resonance)
from .ranking import (MEASURES, Distribution, RankTable, accumulate, merge, rank_of, rank_table,
                      score, score_dpmi, score_lpmi, score_pmi, score_pwpmi)
from .evaluation import (EvalResult, ModelConfig, SweepReport, evaluate, reciprocal_rank, sweep)
from .synth import SynthParams, generate_corpus, oracle_distribution, plant_pattern

__version__ = "0.1.0"
