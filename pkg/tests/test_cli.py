import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from paxp import engine, oracle, synth
from paxp.cli import EvalConfig, decimal_str, main, run_eval


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return _run


@pytest.fixture
def dt(models_dir):
    return models_dir / "dt_re.json"


def test_explain_minpaxp(run, dt):
    code, out, _ = run("explain", "--model", dt, "--instance", "4,4,2",
                       "--kind", "minpaxp", "--delta", "0.93")
    assert code == 0
    assert out.startswith("{x3} precision 15/16")
    assert "(0.9375)" in out


def test_explain_lmpaxp_delta_one(run, dt):
    code, out, _ = run("explain", "--model", dt, "--instance", "4,4,2",
                       "--kind", "lmpaxp", "--delta", "1")
    assert out.startswith("{x1,x3}")


def test_explain_from_instance_file(run, dt, models_dir):
    code, out, _ = run("explain", "--model", dt, "--instances",
                       models_dir / "dt_re_instances.csv", "--kind", "axp")
    assert out.startswith("{x1,x3} precision 1")


def test_explain_explicit_order(run, dt):
    code, out, _ = run("explain", "--model", dt, "--instance", "4,4,2",
                       "--delta", "93/100", "--order", "x3,x1,x2")
    # freeing x3 first fails, then x1 and x2 both go
    assert out.startswith("{x3}")


def test_explain_nbc(run, models_dir):
    code, out, _ = run("explain", "--model", models_dir / "nbc_re.json",
                       "--instance", "t,f,f,f,t", "--kind", "lmpaxp", "--delta", "0.85")
    assert out.startswith("{f1,f5} precision 7/8")


def test_explain_fixpoint_flag(run, dt):
    code, out, _ = run("explain", "--model", dt, "--instance", "4,4,2", "--delta", "0.93",
                       "--fixpoint")
    assert code == 0 and out.startswith("{x3}")


def test_count(run, dt, models_dir):
    assert run("count", "--model", dt, "--instance", "4,4,2", "--fixed", "x3")[1] \
        .splitlines()[0] == "15 / 16"
    assert run("count", "--model", dt, "--instance", "4,4,2", "--fixed", "x1,x2,x3")[1] \
        .splitlines()[0] == "1 / 1"
    assert run("count", "--model", dt, "--instance", "4,4,2", "--fixed", "x1,x2,x3",
               "--class", "-")[1].splitlines()[0] == "0 / 1"
    knap = models_dir / "knapsack_nbc.json"
    assert run("count", "--model", knap, "--instance", "3,1,3,3")[1].splitlines()[0] == "50 / 81"


def test_oracle_check(run, dt):
    code, out, _ = run("oracle-check", "--model", dt, "--queries", 1000)
    assert code == 0 and "1000/1000" in out
    code, _, err = run("oracle-check", "--model", dt, "--budget", 1)
    assert code == 2 and "refused" in err


def test_oracle_check_reports_mismatch(run, dt, monkeypatch):
    from paxp.dtree import DecisionTree
    from paxp.engine import CountPair

    monkeypatch.setattr(DecisionTree, "count", lambda self, v, fixed, c: CountPair(
        0, self.meta.universal_size(fixed)))
    code, out, err = run("oracle-check", "--model", dt, "--queries", 20)
    assert code == 3 and "mismatch" in err


def test_load_errors(run, tmp_path, dt):
    bad = tmp_path / "bad.json"
    bad.write_text(dt.read_text()[:-20])
    code, _, err = run("count", "--model", bad, "--instance", "4,4,2")
    assert code == 1 and "bad.json" in err
    code, _, err = run("count", "--model", dt, "--instance", "4,9,2")
    assert code == 1 and "'9'" in err
    code, _, err = run("count", "--model", dt, "--instance", "4,4,2", "--class", "?")
    assert code == 1


def test_eval_re(run, dt, models_dir, tmp_path):
    report = tmp_path / "r.jsonl"
    code, out, _ = run("eval", "--model", dt, "--instances", models_dir / "dt_re_instances.csv",
                       "--delta", "1", "--delta", "0.93", "--check-minimality",
                       "--report-out", report)
    assert code == 0
    recs = [json.loads(line) for line in report.read_text().splitlines()]
    rows = [r for r in recs if r["type"] == "record"]
    assert [r["length"] for r in rows] == [2, 1]
    assert [r["precision"] for r in rows] == ["1", "15/16"]
    assert all(r["subset_minimal"] for r in rows)
    assert "m⊆ %" in out


def test_eval_empty_table(run, dt, tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("x1,x2,x3\n")
    report = tmp_path / "r.jsonl"
    code, _, _ = run("eval", "--model", dt, "--instances", empty, "--report-out", report)
    assert code == 0
    aggs = [json.loads(line) for line in report.read_text().splitlines()]
    assert [a["instances"] for a in aggs] == [0]


def test_eval_records_failures_and_continues(run, dt, tmp_path):
    rows = tmp_path / "rows.csv"
    rows.write_text("x1,x2,x3\n4,4,2\n1,1,1\n")
    report = tmp_path / "r.jsonl"
    # an order that names a feature twice fails for every instance
    code, _, err = run("eval", "--model", dt, "--instances", rows, "--order", "x1,x1,x2,x3",
                       "--report-out", report)
    assert code == 0
    recs = [json.loads(line) for line in report.read_text().splitlines()]
    assert sum(r["type"] == "record" for r in recs) == 2
    assert recs[-1]["errors"] == 2


def test_eval_reports_are_reproducible(run, tmp_path):
    rng = random.Random(4)
    tree = synth.random_tree(rng, synth.random_meta(rng), max_depth=5)
    from paxp.formats import dumps_model
    model = tmp_path / "t.json"
    model.write_text(dumps_model(tree))
    rows = tmp_path / "rows.csv"
    rows.write_text(",".join(tree.meta.names) + "\n" + "\n".join(
        ",".join(map(str, synth.random_point(rng, tree.meta))) for _ in range(12)) + "\n")
    outs = []
    for jobs in ("1", "2", "1"):
        report = tmp_path / f"r{len(outs)}.jsonl"
        run("eval", "--model", model, "--instances", rows, "--delta", "0.8", "--delta", "1",
            "--kind", "lmpaxp", "--kind", "minpaxp", "--check-minimality", "--no-timing",
            "--jobs", jobs, "--report-out", report)
        outs.append(report.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_eval_subset_minimal_share_matches_enumeration():
    rng = random.Random(12)
    delta = Fraction(9, 10)
    claimed = verified = 0
    for _ in range(100):
        tree = synth.random_tree(rng, synth.random_meta(rng, synth.SpaceConfig(max_features=6)))
        v = synth.random_point(rng, tree.meta)
        records, _ = run_eval(tree, [v], EvalConfig((delta,), ("lmpaxp",), check_minimality=True))
        rec = records[0]
        claimed += rec.subset_minimal
        fixed = frozenset(tree.meta.names.index(n) for n in rec.features)
        verified += oracle.is_subset_minimal_by_enumeration(tree, v, fixed, delta)
    assert claimed == verified


def test_decimal_rendering():
    assert decimal_str(Fraction(15, 16)) == "0.9375"
    assert decimal_str(Fraction(21, 32)) == "0.6562"
    assert decimal_str(Fraction(1)) == "1"
    assert decimal_str(Fraction(2, 3), 2) == "0.67"


def test_module_entry_point(dt):
    out = subprocess.run([sys.executable, "-m", "paxp", "count", "--model", str(dt),
                          "--instance", "4,4,2", "--fixed", "x3"],
                         capture_output=True, text=True, check=True).stdout
    assert out.startswith("15 / 16")
