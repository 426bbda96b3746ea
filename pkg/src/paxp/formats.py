"""Model documents, instance tables and reports.

All model families share one JSON container::

    {"family": "dt", "version": 1,
     "features": [{"name": "x1", "domain": [1, 2, 3, 4]}, ...],
     "classes": ["-", "+"],
     "body": {...family specific...}}

Probabilities and weights are decimal *strings*; nothing is stored as a
binary float.  Compiled-NNF files (``nnf N E V`` header) are also accepted
directly, with an optional ``<file>.json`` sidecar naming the features.
See ``docs/formats.md`` for the per-family bodies.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Hashable

from .ddg import DecisionGraph, Obdd, Omdd
from .ddnnf import DdnnfBackend, NnfError, dump_nnf, parse_nnf
from .dtree import DecisionTree, Edge, Node
from .engine import ClassifierMeta, ExplanationError
from .nbc import DEFAULT_DECIMALS, NbcBackend, NbcModel

FORMAT_VERSION = 1
FAMILIES = ("dt", "dg", "nbc", "omdd", "obdd", "ddnnf")


class ModelFormatError(ExplanationError):
    """Unreadable or invalid model / instance file."""


def _decimal(text: Any, where: str) -> Fraction:
    if not isinstance(text, str):
        raise ModelFormatError(f"{where}: expected a decimal string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelFormatError(f"{where}: bad decimal {text!r}") from exc


def _fmt_fraction(x: Fraction) -> str:
    """Shortest exact decimal for ``x`` (falls back to p/q when not terminating)."""
    den = x.denominator
    k = 0
    while den % 10 ** k and k < 64:
        k += 1
        if (10 ** k) % den == 0:
            break
    if (10 ** k) % den:
        return f"{x.numerator}/{x.denominator}"
    scaled = x * 10 ** k
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(k + 1, "0")
    if k == 0:
        return sign + digits
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


# ---------------------------------------------------------------------------
# meta


def _meta_from(doc: dict) -> ClassifierMeta:
    try:
        feats = doc["features"]
        classes = doc["classes"]
    except KeyError as exc:
        raise ModelFormatError(f"missing top-level key {exc.args[0]!r}") from None
    try:
        return ClassifierMeta(
            tuple(tuple(f["domain"]) for f in feats),
            tuple(classes),
            tuple(f["name"] for f in feats),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed feature table: {exc}") from None


def _meta_doc(meta: ClassifierMeta) -> dict:
    return {
        "features": [{"name": n, "domain": list(d)} for n, d in zip(meta.names, meta.domains)],
        "classes": list(meta.classes),
    }


def _feature_index(meta: ClassifierMeta, ref, where: str) -> int:
    if isinstance(ref, str) and ref in meta.names:
        return meta.names.index(ref)
    raise ModelFormatError(f"{where}: unknown feature {ref!r}")


# ---------------------------------------------------------------------------
# graphs (dt, dg, omdd, obdd)


def _graph_parts(meta: ClassifierMeta, body: dict):
    try:
        root = body["root"]
        raw_nodes = body["nodes"]
        raw_edges = body["edges"]
    except KeyError as exc:
        raise ModelFormatError(f"graph body misses {exc.args[0]!r}") from None
    nodes = []
    for k, n in enumerate(raw_nodes):
        where = f"nodes[{k}]"
        if "id" not in n:
            raise ModelFormatError(f"{where}: node without id")
        if "feature" in n:
            nodes.append(Node(n["id"], feature=_feature_index(meta, n["feature"], where)))
        elif "class" in n:
            if n["class"] not in meta.classes:
                raise ModelFormatError(f"{where}: unknown class {n['class']!r}")
            nodes.append(Node(n["id"], label=n["class"]))
        else:
            raise ModelFormatError(f"{where}: node needs 'feature' or 'class'")
    by_id = {n.id: n for n in nodes}
    edges = []
    for k, e in enumerate(raw_edges):
        where = f"edges[{k}]"
        try:
            src, dst, values = e["from"], e["to"], e["values"]
        except KeyError as exc:
            raise ModelFormatError(f"{where}: missing {exc.args[0]!r}") from None
        src_node = by_id.get(src)
        if src_node is None or src_node.is_leaf:
            raise ModelFormatError(f"{where}: source {src!r} is not an internal node")
        dom = meta.domains[src_node.feature]
        for val in values:
            if val not in dom:
                raise ModelFormatError(
                    f"{where}: value {val!r} not in the domain of "
                    f"{meta.names[src_node.feature]}")
        if len(set(values)) != len(values):
            raise ModelFormatError(f"{where}: repeated value")
        edges.append(Edge(src, dst, frozenset(values)))
    return nodes, edges, root


def _graph_body(g) -> dict:
    meta = g.meta
    nodes = []
    for n in g.nodes.values():
        if n.is_leaf:
            nodes.append({"id": n.id, "class": n.label})
        else:
            nodes.append({"id": n.id, "feature": meta.names[n.feature]})
    edges = []
    for outs in g.children.values():
        for e in outs:
            i = g.nodes[e.source].feature
            vals = [x for x in meta.domains[i] if x in e.values]
            edges.append({"from": e.source, "to": e.target, "values": vals})
    return {"root": g.root, "nodes": nodes, "edges": edges}


# ---------------------------------------------------------------------------
# nbc


def _nbc_from(meta: ClassifierMeta, body: dict, decimals: int | None):
    cls_key = {str(c): c for c in meta.classes}
    try:
        prior = {cls_key[k]: _decimal(v, f"log_prior[{k}]") for k, v in body["log_prior"].items()}
        table = body["log_cond"]
    except KeyError as exc:
        raise ModelFormatError(f"nbc body misses or mislabels {exc.args[0]!r}") from None
    cond = [dict() for _ in range(meta.feature_count)]
    for k, row in enumerate(table):
        where = f"log_cond[{k}]"
        i = _feature_index(meta, row.get("feature"), where)
        val = row.get("value")
        if val not in meta.domains[i]:
            raise ModelFormatError(f"{where}: value {val!r} not in the domain of {meta.names[i]}")
        try:
            probs = {cls_key[c]: _decimal(x, where) for c, x in row["log_prob"].items()}
        except KeyError as exc:
            raise ModelFormatError(f"{where}: unknown class or missing key {exc.args[0]!r}") from None
        cond[i][val] = probs
    model = NbcModel(meta, prior, cond)
    d = body.get("decimals", DEFAULT_DECIMALS) if decimals is None else decimals
    return NbcBackend(model, d)


def _nbc_body(b: NbcBackend) -> dict:
    m = b.model
    rows = []
    for i, dom in enumerate(m.meta.domains):
        for val in dom:
            rows.append({
                "feature": m.meta.names[i],
                "value": val,
                "log_prob": {str(c): _fmt_fraction(m.log_cond[i][val][c]) for c in m.meta.classes},
            })
    return {
        "decimals": b.decimals,
        "log_prior": {str(c): _fmt_fraction(m.log_prior[c]) for c in m.meta.classes},
        "log_cond": rows,
    }


# ---------------------------------------------------------------------------
# documents


def from_document(doc: dict, *, decimals: int | None = None):
    """Build a fully validated backend from a parsed model document."""
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    family = doc.get("family")
    if family not in FAMILIES:
        raise ModelFormatError(f"unknown model family {family!r}")
    if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {doc.get('version')!r}")
    meta = _meta_from(doc)
    body = doc.get("body")
    if not isinstance(body, dict):
        raise ModelFormatError("missing 'body' object")
    if family == "nbc":
        return _nbc_from(meta, body, decimals)
    if family == "ddnnf":
        if "nnf" not in body:
            raise ModelFormatError("ddnnf body misses 'nnf'")
        circuit = parse_nnf(body["nnf"])
        return DdnnfBackend(circuit, meta, body.get("variables"))
    nodes, edges, root = _graph_parts(meta, body)
    cls = {"dt": DecisionTree, "dg": DecisionGraph, "omdd": Omdd, "obdd": Obdd}[family]
    return cls(meta, nodes, edges, root)


def family_of(backend) -> str:
    if isinstance(backend, NbcBackend):
        return "nbc"
    if isinstance(backend, DdnnfBackend):
        return "ddnnf"
    if isinstance(backend, DecisionTree):
        return "dt"
    if isinstance(backend, (DecisionGraph, Omdd)):
        return backend.family
    raise ModelFormatError(f"cannot serialise {type(backend).__name__}")


def to_document(backend) -> dict:
    family = family_of(backend)
    doc = {"family": family, "version": FORMAT_VERSION, **_meta_doc(backend.meta)}
    if family == "nbc":
        doc["body"] = _nbc_body(backend)
    elif family == "ddnnf":
        doc["body"] = {"nnf": dump_nnf(backend.circuit), "variables": list(backend.variables)}
    else:
        doc["body"] = _graph_body(backend)
    return doc


def dumps_model(backend) -> str:
    return json.dumps(to_document(backend), indent=1, ensure_ascii=False) + "\n"


def loads_model(text: str, *, decimals: int | None = None, source: str = "<string>"):
    if not text.strip():
        raise ModelFormatError(f"{source}: empty model file")
    if text.lstrip().startswith("nnf"):
        try:
            return DdnnfBackend(parse_nnf(text))
        except NnfError as exc:
            raise ModelFormatError(f"{source}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return from_document(doc, decimals=decimals)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{source}: {exc}") from exc
    except ExplanationError as exc:
        raise ModelFormatError(f"{source}: invalid model: {exc}") from exc


def load_model(path, *, decimals: int | None = None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"{path}: {exc.strerror}") from exc
    if text.lstrip().startswith("nnf"):
        sidecar = path.with_name(path.name + ".json")
        if sidecar.exists():
            side = json.loads(sidecar.read_text(encoding="utf-8"))
            try:
                circuit = parse_nnf(text)
                meta = _meta_from(side)
                return DdnnfBackend(circuit, meta, side.get("variables"))
            except ExplanationError as exc:
                raise ModelFormatError(f"{path}: {exc}") from exc
    return loads_model(text, decimals=decimals, source=str(path))


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class InstanceTable:
    names: tuple
    rows: tuple               # tuples of domain values
    labels: tuple = ()        # optional, as written in the file

    def __len__(self):
        return len(self.rows)


LABEL_COLUMNS = ("label", "class")


def _resolve(meta: ClassifierMeta, i: int, token: str, where: str) -> Hashable:
    for val in meta.domains[i]:
        if str(val) == token:
            return val
    raise ModelFormatError(f"{where}: value {token!r} not in the domain of {meta.names[i]}")


def parse_instances(text: str, meta: ClassifierMeta, source: str = "<string>") -> InstanceTable:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ModelFormatError(f"{source}: missing header")
    header = [h.strip() for h in rows[0]]
    label_col = None
    if header and header[-1] in LABEL_COLUMNS:
        label_col = len(header) - 1
        header = header[:-1]
    if tuple(header) != meta.names:
        raise ModelFormatError(
            f"{source}: header {header} does not match features {list(meta.names)}")
    out, labels = [], []
    for lineno, raw in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in raw]
        want = len(header) + (label_col is not None)
        if len(cells) != want:
            raise ModelFormatError(f"{source}: row {lineno} has {len(cells)} fields, expected {want}")
        vals = tuple(_resolve(meta, i, cells[i], f"{source}: row {lineno}")
                     for i in range(len(header)))
        out.append(vals)
        if label_col is not None:
            labels.append(cells[label_col])
    return InstanceTable(tuple(header), tuple(out), tuple(labels))


def load_instances(path, meta: ClassifierMeta) -> InstanceTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"{path}: {exc.strerror}") from exc
    return parse_instances(text, meta, str(path))


def parse_point(text: str, meta: ClassifierMeta) -> tuple:
    """``'4,4,2'`` -> a validated point."""
    cells = [c.strip() for c in text.split(",")]
    if len(cells) != meta.feature_count:
        raise ModelFormatError(f"expected {meta.feature_count} comma-separated values")
    return tuple(_resolve(meta, i, cells[i], "instance") for i in range(len(cells)))


def parse_feature_list(text: str, meta: ClassifierMeta) -> frozenset:
    """``'x1,x3'`` or ``'1,3'`` (1-based positions) -> feature indices."""
    out = set()
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if tok in meta.names:
            out.add(meta.names.index(tok))
        elif tok.isdigit() and 1 <= int(tok) <= meta.feature_count:
            out.add(int(tok) - 1)
        else:
            raise ModelFormatError(f"unknown feature {tok!r}")
    return frozenset(out)


def format_features(fixed, meta: ClassifierMeta) -> str:
    return "{" + ",".join(meta.names[i] for i in sorted(fixed)) + "}"
