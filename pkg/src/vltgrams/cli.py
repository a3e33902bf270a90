"""Command-line interface: ``vltgrams <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data or
configuration errors. Diagnostics go to stderr; data goes to ``--out`` or
stdout. Whenever ``--out`` is given, a ``<out>.manifest.json`` file records
everything needed to reproduce the output.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from typing import Optional

from . import __version__
from .corpus_io import CorpusError, parse_corpus, serialize_corpus, validate_corpus
from .evaluation import (DEFAULT_SELECTIONS, PRNG_NAME, CapabilityError, EvaluationError,
                         ModelConfig, check_capability, evaluate, sweep)
from .expansion import expand_corpus
from .ranking import MEASURES, Distribution, RankingError, accumulate, fingerprint, rank_table
from .skipgrams import SelectionError, enumerate_instances, parse_selection
from .synth import SynthParams, generate_corpus
from .vlt import BUILTIN_TARGETS, PatternError, encode_sequence, format_pattern, resolve_target
from .weighting import SCHEMES, WeightError, WeightScheme

GRAMMAR = """\
pattern grammar:
  pattern  := element (";" element)*
  element  := set | "(" MOTION ")" set      # motion form forbidden for first element, required after
  set      := "{" "}" | "{" IVL ("," IVL)* "}"
  MOTION   := integer 0..11 ; IVL := integer 1..11

built-in targets:
""" + "".join(f"  {k} = {v}\n" for k, v in BUILTIN_TARGETS.items())

DATA_ERRORS = (CorpusError, PatternError, SelectionError, WeightError, RankingError,
               EvaluationError, ValueError, OSError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument groups ---------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", metavar="FILE",
                   help="JSON object of flag values (keys are flag names); flags win")


def _add_corpus(p):
    p.add_argument("--corpus", required=True, metavar="FILE", help="note-event JSONL or CSV")
    p.add_argument("--input-format", choices=("jsonl", "csv"),
                   help="corpus format (default: from the file extension)")


def _add_mining(p, n_default=4):
    p.add_argument("--n", type=int, default=n_default, help="n-gram length")
    p.add_argument("--selection", default="fixed:3", help="fixed:<t> or variable:<seconds>")
    p.add_argument("--window-scope", choices=("pair", "span"), default="pair",
                   help="variable window applies to each consecutive pair or the total span")
    _add_weighting(p)
    p.add_argument("--merge-repeats", action="store_true",
                   help="merge consecutive slices with equal pitch-class content")


def _add_weighting(p):
    p.add_argument("--weighting", choices=SCHEMES, default="none")
    p.add_argument("--tau", type=float, default=1.0, help="proximity decay (s)")
    p.add_argument("--p0", type=float, default=0.5, help="resonance peak period (s)")
    p.add_argument("--sigma", type=float, default=1.0, help="resonance width (octaves)")


def _add_output(p, formats, default):
    p.add_argument("--out", metavar="FILE", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vltgrams", description=__doc__.splitlines()[0],
                     epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"vltgrams {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_, epilog=GRAMMAR,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
        return p

    p = add("validate", "check corpus invariants and report per-piece statistics")
    _add_corpus(p)
    _add_output(p, ("text", "json"), "text")

    p = add("expand", "emit full-expansion slices as JSONL")
    _add_corpus(p)
    p.add_argument("--merge-repeats", action="store_true")
    p.add_argument("--out", metavar="FILE")

    p = add("mine", "count weighted n-gram types into a distribution (JSON)")
    _add_corpus(p)
    _add_mining(p)
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--dump-instances", metavar="FILE", help="write every instance as JSONL")

    p = add("rank", "rank a mined distribution by a measure")
    p.add_argument("--dist", required=True, metavar="FILE", help="output of `mine`")
    p.add_argument("--measure", choices=MEASURES, default="pwpmi")
    p.add_argument("--top", type=int, default=None, help="keep only the first N rows")
    _add_output(p, ("csv", "json"), "csv")

    p = add("eval", "reciprocal rank / MRR of a target pattern under one configuration")
    _add_corpus(p)
    _add_mining(p)
    p.add_argument("--measure", choices=MEASURES, default="pwpmi")
    p.add_argument("--target", default="cadence:ii6-I64-V7-I",
                   help="pattern string or built-in target name")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top", type=int, default=0, help="also report the top-N rank table rows")
    _add_output(p, ("json", "csv"), "json")

    p = add("sweep", "evaluate the full selection x weighting x measure grid")
    _add_corpus(p)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--selections", default=",".join(str(s) for s in DEFAULT_SELECTIONS),
                   help="comma-separated selections")
    p.add_argument("--window-scope", choices=("pair", "span"), default="pair")
    p.add_argument("--weightings", default=",".join(SCHEMES), help="comma-separated schemes")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--measures", default=",".join(MEASURES), help="comma-separated measures")
    p.add_argument("--merge-repeats", choices=("off", "on", "both"), default="off")
    p.add_argument("--target", default="cadence:ii6-I64-V7-I")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--top", type=int, default=0, help="also emit each cell's top-N rows")
    _add_output(p, ("csv", "json"), "csv")

    p = add("synth", "generate a synthetic corpus with planted cadences")
    d = SynthParams()
    p.add_argument("--pieces", type=int, default=d.pieces)
    p.add_argument("--slices-per-piece", type=int, default=d.slices_per_piece)
    p.add_argument("--plant-rate", type=float, default=d.plant_rate)
    p.add_argument("--base-ioi", type=float, default=d.base_ioi)
    p.add_argument("--timing-jitter", type=float, default=d.timing_jitter)
    p.add_argument("--plant-jitter", type=float, default=None)
    p.add_argument("--pitch-lo", type=int, default=d.pitch_range[0])
    p.add_argument("--pitch-hi", type=int, default=d.pitch_range[1])
    p.add_argument("--chord-size", type=int, default=d.chord_size)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--manifest", metavar="FILE", help="default: <out>.manifest.json")
    return parser


# -- helpers --------------------------------------------------------------------------

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _load_config(path: str, subparser: argparse.ArgumentParser) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a flat JSON object")
    dests = {a.dest for a in subparser._actions}
    out = {}
    for key, value in data.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in dests or dest in ("help", "config"):
            raise UsageError(f"config file {path}: unknown key {key!r}")
        if isinstance(value, (dict, list)):
            raise UsageError(f"config file {path}: value for {key!r} must be a scalar")
        out[dest] = value
    return out


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**_load_config(args.config, subparser))
        args = parser.parse_args(argv)
    return args


def _read(path, fmt=None):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from None
    if fmt is None:
        fmt = "csv" if path.lower().endswith(".csv") else "jsonl"
    return data, fmt


def _load_corpus(args):
    data, fmt = _read(args.corpus, args.input_format)
    return parse_corpus(data, fmt), _sha256(data)


def _emit(path: Optional[str], text: str, outputs: list):
    data = text.encode("utf-8")
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)
        outputs.append({"path": path, "sha256": _sha256(data)})


def _write_manifest(path: str, args, corpus_digest: Optional[str], outputs: list,
                    seed: Optional[int] = None, extra: Optional[dict] = None):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("config",)}
    body = {"tool": "vltgrams", "version": __version__, "command": args.command,
            "config": config, "config_file": args.config if getattr(args, "config", None) else None,
            "corpus_sha256": corpus_digest, "seed": seed, "prng": PRNG_NAME, "outputs": outputs}
    if extra:
        body.update(extra)
    body["digest"] = _sha256(json.dumps(body, sort_keys=True).encode("utf-8"))
    body["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _scheme(args, kind=None) -> WeightScheme:
    return WeightScheme(kind or args.weighting, args.tau, args.p0, args.sigma)


def _model_config(args, measure=None) -> ModelConfig:
    return ModelConfig(n=args.n, selection=parse_selection(args.selection, args.window_scope),
                       weighting=_scheme(args), measure=measure or args.measure,
                       merge_repeats=args.merge_repeats, folds=getattr(args, "folds", 1),
                       seed=getattr(args, "seed", 0))


# -- subcommands ----------------------------------------------------------------------

def cmd_validate(args):
    corpus, digest = _load_corpus(args)
    report = validate_corpus(corpus)
    outputs = []
    text = (json.dumps(report.to_dict(), indent=1) + "\n" if args.format == "json"
            else report.summary() + "\n")
    _emit(args.out, text, outputs)
    if args.out:
        _write_manifest(args.out + ".manifest.json", args, digest, outputs)
    if not report.ok:
        print(f"vltgrams validate: {len(report.violations)} violation(s) found", file=sys.stderr)
        return 2
    return 0


def cmd_expand(args):
    corpus, digest = _load_corpus(args)
    lines = []
    for seq in expand_corpus(corpus, args.merge_repeats):
        for s in seq.slices:
            lines.append(json.dumps({"piece_id": seq.piece_id,
                                     "onset_num": s.onset_score.numerator,
                                     "onset_den": s.onset_score.denominator,
                                     "onset_s": s.onset_perf,
                                     "pitches": sorted(s.pitches)}, separators=(",", ":")))
    outputs = []
    _emit(args.out, "".join(line + "\n" for line in lines), outputs)
    if args.out:
        _write_manifest(args.out + ".manifest.json", args, digest, outputs)
    return 0


def cmd_mine(args):
    corpus, digest = _load_corpus(args)
    config = _model_config(args, measure="count")
    check_capability(corpus, ModelConfig(config.n, config.selection, config.weighting,
                                         "count", folds=1))
    seqs = expand_corpus(corpus, args.merge_repeats)
    fp = fingerprint(config.n, config.selection, config.weighting, args.merge_repeats)
    dist = accumulate(seqs, config.n, config.selection, config.weighting, fp)
    outputs = []
    if args.dump_instances:
        lines = []
        for seq in sorted(seqs, key=lambda s: s.piece_id):
            enc = encode_sequence(seq)
            for inst in enumerate_instances(enc, config.n, config.selection, seq.piece_id):
                lines.append(json.dumps({
                    "piece_id": inst.piece_id, "indices": list(inst.indices),
                    "onsets_s": None if inst.onsets_perf is None else list(inst.onsets_perf),
                    "pattern": format_pattern(inst.type),
                    "weight": config.weighting(inst.onsets_perf)}, separators=(",", ":")))
        _emit(args.dump_instances, "".join(x + "\n" for x in lines), outputs)
    _emit(args.out, dist.to_json() + "\n", outputs)
    if args.out:
        _write_manifest(args.out + ".manifest.json", args, digest, outputs)
    return 0


def cmd_rank(args):
    data, _ = _read(args.dist)
    try:
        dist = Distribution.from_dict(json.loads(data))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{args.dist} is not a mined distribution ({exc})") from None
    table = rank_table(dist, args.measure).top(args.top)
    outputs = []
    _emit(args.out, table.to_csv() if args.format == "csv" else table.to_json() + "\n", outputs)
    if args.out:
        _write_manifest(args.out + ".manifest.json", args, None, outputs,
                        extra={"dist_sha256": _sha256(data)})
    return 0


def cmd_eval(args):
    corpus, digest = _load_corpus(args)
    config = _model_config(args)
    target = resolve_target(args.target)
    result = evaluate(corpus, config, target, top=args.top)
    outputs = []
    if args.format == "json":
        body = result.to_dict()
        body["target"] = format_pattern(target)
        body["fold_prng"] = PRNG_NAME
        text = json.dumps(body, indent=1) + "\n"
    else:
        text = ("fold,rank,rr,pieces\n"
                + "".join(f"{f.fold},{'' if f.rank is None else f.rank},{f.rr:.6f},{f.pieces}\n"
                          for f in result.per_fold)
                + f"full,{'' if result.rank is None else result.rank},{result.rr:.6f},"
                  f"{len(corpus)}\n")
    _emit(args.out, text, outputs)
    if args.out:
        _write_manifest(args.out + ".manifest.json", args, digest, outputs, seed=args.seed)
    return 0


def _split(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def cmd_sweep(args):
    corpus, digest = _load_corpus(args)
    target = resolve_target(args.target)
    selections = [parse_selection(s, args.window_scope) for s in _split(args.selections)]
    weightings = [_scheme(args, k) for k in _split(args.weightings)]
    measures = _split(args.measures)
    for m in measures:
        if m not in MEASURES:
            raise UsageError(f"unknown measure {m!r} (choose from {', '.join(MEASURES)})")
    flags = {"off": [False], "on": [True], "both": [False, True]}[args.merge_repeats]
    reports = [sweep(corpus, target, args.n, selections, weightings, measures, args.folds,
                     args.seed, merge, args.threads, args.top) for merge in flags]
    outputs = []
    if args.format == "csv":
        text = reports[0].to_csv() if len(reports) == 1 else _merged_csv(reports)
        _emit(args.out, text, outputs)
        if args.top and args.out:
            stem = os.path.splitext(args.out)[0]
            _emit(stem + ".top.csv", "".join(
                r.top_csv() if i == 0 else r.top_csv().split("\n", 1)[1]
                for i, r in enumerate(reports)), outputs)
    else:
        body = [r.to_dict() for r in reports]
        for r, b in zip(reports, body):
            b["merge_repeats"] = r.results[0].config.merge_repeats if r.results else None
        _emit(args.out, json.dumps(body[0] if len(body) == 1 else body, indent=1) + "\n",
              outputs)
    if args.out:
        _write_manifest(args.out + ".manifest.json", args, digest, outputs, seed=args.seed)
    return 0


def _merged_csv(reports):
    lines = []
    for i, r in enumerate(reports):
        merge = "on" if r.results and r.results[0].config.merge_repeats else "off"
        body = r.to_csv().splitlines()
        if i == 0:
            lines.append(body[0] + ",merge_repeats")
        lines.extend(row + "," + merge for row in body[1:])
    return "\n".join(lines) + "\n"


def cmd_synth(args):
    params = SynthParams(pieces=args.pieces, slices_per_piece=args.slices_per_piece,
                         plant_rate=args.plant_rate, base_ioi=args.base_ioi,
                         timing_jitter=args.timing_jitter,
                         pitch_range=(args.pitch_lo, args.pitch_hi),
                         chord_size=args.chord_size, seed=args.seed,
                         plant_jitter=args.plant_jitter)
    fmt = args.format or ("csv" if args.out.lower().endswith(".csv") else "jsonl")
    data = serialize_corpus(generate_corpus(params), fmt)
    with open(args.out, "wb") as fh:
        fh.write(data)
    outputs = [{"path": args.out, "sha256": _sha256(data)}]
    _write_manifest(args.manifest or args.out + ".manifest.json", args, _sha256(data), outputs,
                    seed=args.seed, extra={"params": params.to_dict()})
    return 0


COMMANDS = {"validate": cmd_validate, "expand": cmd_expand, "mine": cmd_mine,
            "rank": cmd_rank, "eval": cmd_eval, "sweep": cmd_sweep, "synth": cmd_synth}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except DATA_ERRORS as exc:
        print(f"vltgrams: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vltgrams {args.command}: {exc}", file=sys.stderr)
        return 1
    except CapabilityError as exc:
        print(f"vltgrams {args.command}: {exc}", file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        print(f"vltgrams {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
