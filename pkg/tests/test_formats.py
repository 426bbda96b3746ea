import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paxp import synth
from paxp.ddnnf import DdnnfBackend, model_count
from paxp.dtree import DecisionTree
from paxp.formats import (
    ModelFormatError,
    dumps_model,
    format_features,
    load_instances,
    load_model,
    loads_model,
    parse_feature_list,
    parse_instances,
    parse_point,
    to_document,
)

FIXTURES = ["dt_re.json", "dg_re.json", "nbc_re.json", "knapsack_nbc.json",
            "omdd_small.json", "obdd_xor.json", "and2_ddnnf.json"]


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_roundtrip(models_dir, name):
    text = (models_dir / name).read_text()
    model = loads_model(text)
    assert dumps_model(model) == text
    assert to_document(loads_model(dumps_model(model))) == to_document(model)


def test_dt_re_file(dt_re):
    assert isinstance(dt_re, DecisionTree)
    assert len(dt_re.paths) == 5


def test_compiled_nnf(models_dir):
    b = load_model(models_dir / "and2.nnf")
    assert isinstance(b, DdnnfBackend)
    assert model_count(b.circuit) == 1


def test_nnf_sidecar(tmp_path):
    (tmp_path / "c.nnf").write_text("nnf 3 2 2\nL 1\nL 2\nA 2 0 1\n")
    (tmp_path / "c.nnf.json").write_text(json.dumps({
        "features": [{"name": "a", "domain": ["no", "yes"]}, {"name": "b", "domain": ["no", "yes"]}],
        "classes": ["neg", "pos"], "variables": [2, 1]}))
    b = load_model(tmp_path / "c.nnf")
    assert b.meta.names == ("a", "b")
    assert b.classify(("yes", "yes")) == "pos"


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("   \n", "empty"),
    ('{"family": "dt",\n "version": 1,\n oops}', r":3:2:"),
    ('{"family": "rf", "features": [], "classes": []}', "unknown model family"),
    ('[1, 2]', "JSON object"),
])
def test_load_errors(text, msg):
    with pytest.raises(ModelFormatError, match=msg):
        loads_model(text)


def _dt_doc(models_dir):
    return json.loads((models_dir / "dt_re.json").read_text())


def test_invalid_edge_is_identified(models_dir):
    doc = _dt_doc(models_dir)
    doc["body"]["edges"][3]["values"] = [2, 3, 9]
    with pytest.raises(ModelFormatError, match=r"edges\[3\].*9"):
        loads_model(json.dumps(doc))


def test_structural_violation_is_identified(models_dir):
    doc = _dt_doc(models_dir)
    doc["body"]["edges"][3]["values"] = [2, 3]      # value 4 of x2 now has no branch
    with pytest.raises(ModelFormatError, match="node 2"):
        loads_model(json.dumps(doc))


def test_unknown_feature_in_node(models_dir):
    doc = _dt_doc(models_dir)
    doc["body"]["nodes"][0]["feature"] = "x9"
    with pytest.raises(ModelFormatError, match=r"nodes\[0\].*x9"):
        loads_model(json.dumps(doc))


def test_nbc_requires_decimal_strings(models_dir):
    doc = json.loads((models_dir / "nbc_re.json").read_text())
    doc["body"]["log_prior"]["+"] = -1.1
    with pytest.raises(ModelFormatError, match="decimal string"):
        loads_model(json.dumps(doc))


def test_decimals_override(models_dir):
    b = load_model(models_dir / "nbc_re.json", decimals=1)
    assert b.decimals == 1
    assert load_model(models_dir / "nbc_re.json").decimals == 3


class TestInstances:
    def test_re_instance(self, dt_re):
        t = parse_instances("x1,x2,x3\n4,4,2\n", dt_re.meta)
        assert t.rows == ((4, 4, 2),)

    def test_header_only(self, dt_re):
        assert len(parse_instances("x1,x2,x3\n", dt_re.meta)) == 0

    def test_out_of_domain_names_value(self, dt_re):
        with pytest.raises(ModelFormatError, match="row 3.*'7'"):
            parse_instances("x1,x2,x3\n4,4,2\n4,7,2\n", dt_re.meta)

    def test_arity(self, dt_re):
        with pytest.raises(ModelFormatError, match="row 2 has 2 fields"):
            parse_instances("x1,x2,x3\n4,4\n", dt_re.meta)

    def test_header_mismatch(self, dt_re):
        with pytest.raises(ModelFormatError, match="header"):
            parse_instances("a,b,c\n", dt_re.meta)

    def test_label_column(self, nbc_re):
        t = parse_instances("f1,f2,f3,f4,f5,label\nt,f,f,f,t,+\n", nbc_re.meta)
        assert t.rows == (("t", "f", "f", "f", "t"),)
        assert t.labels == ("+",)

    def test_file(self, models_dir, dt_re):
        assert load_instances(models_dir / "dt_re_instances.csv", dt_re.meta).rows == ((4, 4, 2),)


def test_point_and_feature_lists(dt_re):
    meta = dt_re.meta
    assert parse_point("4, 4, 2", meta) == (4, 4, 2)
    assert parse_feature_list("x1,3", meta) == frozenset({0, 2})
    assert format_features(frozenset({2, 0}), meta) == "{x1,x3}"
    with pytest.raises(ModelFormatError):
        parse_feature_list("x4", meta)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(synth.FAMILIES))
def test_random_roundtrip(seed, family):
    rng = random.Random(seed)
    model = synth.random_model(rng, family)
    text = dumps_model(model)
    again = loads_model(text)
    assert dumps_model(again) == text
    v = synth.random_point(rng, model.meta)
    assert again.classify(v) == model.classify(v)
