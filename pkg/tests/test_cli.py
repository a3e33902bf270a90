import csv
import json
import subprocess
import sys

import pytest

from conftest import A, B, C, make_corpus, make_piece
from vltgrams.cli import main
from vltgrams.corpus_io import serialize_corpus


@pytest.fixture(scope="module")
def synth_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "synth.jsonl"
    assert main(["synth", "--pieces", "12", "--slices-per-piece", "10", "--seed", "3",
                 "--out", str(path)]) == 0
    return path


@pytest.fixture
def score_only(tmp_path):
    path = tmp_path / "score.jsonl"
    corpus = make_corpus(make_piece("s1", [A, B, C, A, B], aligned=False))
    path.write_bytes(serialize_corpus(corpus, "jsonl"))
    return path


def test_synth_writes_manifest(synth_corpus):
    man = json.loads(open(str(synth_corpus) + ".manifest.json").read())
    assert man["command"] == "synth" and man["seed"] == 3
    assert man["params"]["pieces"] == 12
    assert man["outputs"][0]["path"] == str(synth_corpus)


def test_eval_example(synth_corpus, tmp_path):
    out = tmp_path / "eval.json"
    rc = main(["eval", "--corpus", str(synth_corpus), "--n", "4", "--selection", "fixed:3",
               "--weighting", "periodicity", "--measure", "pwpmi", "--folds", "3",
               "--out", str(out)])
    assert rc == 0
    body = json.loads(out.read_text())
    assert len(body["per_fold"]) == 3 and 0 <= body["mrr"] <= 1
    man = json.loads((tmp_path / "eval.json.manifest.json").read_text())
    assert man["config"]["weighting"] == "periodicity"
    assert man["prng"] == body["fold_prng"]


def test_variable_selection_on_score_only_corpus_exits_2(score_only, capsys):
    assert main(["mine", "--corpus", str(score_only), "--selection", "variable:0.5"]) == 2
    assert "performance" in capsys.readouterr().err


def test_usage_errors_exit_1(synth_corpus):
    assert main(["mine"]) == 1
    assert main(["rank", "--dist", "x.json", "--measure", "nope"]) == 1
    assert main(["frobnicate"]) == 1


def test_config_file_and_flag_precedence(synth_corpus, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "weighting": "proximity", "selection": "fixed:1"}))
    out = tmp_path / "d.json"
    assert main(["mine", "--corpus", str(synth_corpus), "--config", str(cfg), "--n", "2",
                 "--out", str(out)]) == 0
    dist = json.loads(out.read_text())
    assert dist["n"] == 2
    man = json.loads((tmp_path / "d.json.manifest.json").read_text())
    assert man["config"]["weighting"] == "proximity"
    assert man["config"]["selection"] == "fixed:1"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["mine", "--corpus", str(synth_corpus), "--config", str(cfg)]) == 1


def test_mine_then_rank_top(synth_corpus, tmp_path):
    dist = tmp_path / "d.json"
    assert main(["mine", "--corpus", str(synth_corpus), "--selection", "fixed:2",
                 "--out", str(dist)]) == 0
    out = tmp_path / "r.csv"
    assert main(["rank", "--dist", str(dist), "--measure", "lpmi", "--top", "20",
                 "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert len(rows) == 21
    assert [r[0] for r in rows[1:]] == [str(i) for i in range(1, 21)]


def test_validate_and_expand(synth_corpus, tmp_path, capsys):
    assert main(["validate", "--corpus", str(synth_corpus), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["violation_count"] == 0
    out = tmp_path / "x.jsonl"
    assert main(["expand", "--corpus", str(synth_corpus), "--out", str(out)]) == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert len(lines) == 12 * 10
    assert {"piece_id", "onset_num", "onset_den", "onset_s", "pitches"} <= set(lines[0])


def test_validate_reports_violations(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("piece_id,pitch,onset_num,onset_den,dur_num,dur_den,onset_s,dur_s\n"
                   "p,60,0,1,1,1,1.0,0.5\np,64,1,1,1,1,0.5,0.5\n")
    assert main(["validate", "--corpus", str(bad)]) == 2


def test_sweep_subset(synth_corpus, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--corpus", str(synth_corpus), "--selections", "fixed:0,fixed:3",
                 "--weightings", "none,periodicity", "--measures", "pmi,pwpmi",
                 "--folds", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 8
    mrrs = [float(r["mrr"]) for r in rows]
    assert mrrs == sorted(mrrs, reverse=True)


def test_console_entry_point(synth_corpus):
    proc = subprocess.run([sys.executable, "-m", "vltgrams.cli", "eval", "--corpus",
                           str(synth_corpus), "--folds", "1", "--selection", "fixed:0",
                           "--weighting", "none", "--measure", "count"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "mrr" in json.loads(proc.stdout)
