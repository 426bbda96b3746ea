"""Random models for property tests, oracle checks and the experiment scripts.

Every generator takes a ``random.Random`` so runs are reproducible from a seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .ddg import DecisionGraph, Obdd, Omdd
from .ddnnf import DdnnfBackend, NnfCircuit, NnfNode
from .dtree import DecisionTree, Edge, Node
from .engine import ClassifierMeta
from .nbc import NbcBackend, NbcModel


@dataclass(frozen=True)
class SpaceConfig:
    min_features: int = 2
    max_features: int = 6
    min_domain: int = 2
    max_domain: int = 4
    n_classes: int = 2


def random_meta(rng: random.Random, cfg: SpaceConfig = SpaceConfig()) -> ClassifierMeta:
    m = rng.randint(cfg.min_features, cfg.max_features)
    domains = [tuple(range(1, rng.randint(cfg.min_domain, cfg.max_domain) + 1)) for _ in range(m)]
    return ClassifierMeta(tuple(domains), tuple(range(cfg.n_classes)))


def random_point(rng: random.Random, meta: ClassifierMeta) -> tuple:
    return tuple(rng.choice(d) for d in meta.domains)


def random_subset(rng: random.Random, meta: ClassifierMeta) -> frozenset:
    return frozenset(i for i in range(meta.feature_count) if rng.random() < 0.5)


def _split(rng: random.Random, values: list) -> list[list]:
    """Random partition of ``values`` into at least two non-empty blocks."""
    values = values[:]
    rng.shuffle(values)
    k = rng.randint(2, len(values))
    blocks = [[v] for v in values[:k]]
    for v in values[k:]:
        rng.choice(blocks).append(v)
    return blocks


class _Builder:
    def __init__(self):
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []

    def leaf(self, label) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, label=label))
        return nid

    def internal(self, feature: int) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, feature=feature))
        return nid


def _grow_tree(rng, meta, b: _Builder, ctx: dict, depth: int, max_depth: int,
               features, stop: float, leaf_fn) -> int:
    open_feats = [i for i in features if len(ctx.get(i, meta.domains[i])) >= 2]
    if depth >= max_depth or not open_feats or (depth > 0 and rng.random() < stop):
        return leaf_fn()
    i = rng.choice(open_feats)
    nid = b.internal(i)
    for block in _split(rng, list(ctx.get(i, meta.domains[i]))):
        sub = dict(ctx)
        sub[i] = frozenset(block)
        child = _grow_tree(rng, meta, b, sub, depth + 1, max_depth, features, stop, leaf_fn)
        b.edges.append(Edge(nid, child, frozenset(block)))
    return nid


def random_tree(rng: random.Random, meta: ClassifierMeta, max_depth: int = 4,
                stop: float = 0.25) -> DecisionTree:
    """Random tree; features may be re-tested along a path on a narrower set."""
    b = _Builder()
    root = _grow_tree(rng, meta, b, {}, 0, max_depth, range(meta.feature_count), stop,
                      lambda: b.leaf(rng.choice(meta.classes)))
    if b.nodes[root].is_leaf:
        # always split at least once so the tree is not constant
        b = _Builder()
        root = _grow_tree(rng, meta, b, {}, 0, max(max_depth, 1), range(meta.feature_count),
                          0.0, lambda: b.leaf(rng.choice(meta.classes)))
    return DecisionTree(meta, b.nodes, b.edges, root)


def random_graph(rng: random.Random, meta: ClassifierMeta, max_depth: int = 3,
                 pool_size: int = 3) -> DecisionGraph:
    """Decision graph: an upper tree whose leaves point into a small pool of
    shared subtrees over a disjoint set of features."""
    feats = list(range(meta.feature_count))
    rng.shuffle(feats)
    cut = max(1, len(feats) // 2)
    upper, lower = feats[:cut], feats[cut:]
    b = _Builder()
    pool = []
    for _ in range(pool_size):
        if lower:
            pool.append(_grow_tree(rng, meta, b, {}, 0, max_depth, lower, 0.3,
                                   lambda: b.leaf(rng.choice(meta.classes))))
        else:
            pool.append(b.leaf(rng.choice(meta.classes)))
    root = _grow_tree(rng, meta, b, {}, 0, max_depth, upper, 0.0, lambda: rng.choice(pool))
    # drop pool members nobody points at
    used = {root}
    stack = [root]
    out = {}
    for e in b.edges:
        out.setdefault(e.source, []).append(e)
    while stack:
        for e in out.get(stack.pop(), []):
            if e.target not in used:
                used.add(e.target)
                stack.append(e.target)
    nodes = [n for n in b.nodes if n.id in used]
    edges = [e for e in b.edges if e.source in used]
    return DecisionGraph(meta, nodes, edges, root)


def _random_ordered(rng, meta: ClassifierMeta, width: int, cls):
    m = meta.feature_count
    nodes: list[Node] = []
    edges: list[Edge] = []
    unique: dict = {}
    terminals = []
    for c in meta.classes:
        nodes.append(Node(len(nodes), label=c))
        terminals.append(len(nodes) - 1)
    below = list(terminals)   # candidate children, deeper levels
    level_pool: dict = {}

    def make(i: int, kids: tuple) -> int:
        if len(set(kids)) == 1:
            return kids[0]
        key = (i, kids)
        if key not in unique:
            nid = len(nodes)
            nodes.append(Node(nid, feature=i))
            groups: dict = {}
            for val, k in zip(meta.domains[i], kids):
                groups.setdefault(k, set()).add(val)
            for k, vals in groups.items():
                edges.append(Edge(nid, k, frozenset(vals)))
            unique[key] = nid
        return unique[key]

    for i in range(m - 1, -1, -1):
        made = []
        near = level_pool.get(i + 1, [])
        for _ in range(width):
            kids = tuple(rng.choice(near) if near and rng.random() < 0.6 else rng.choice(below)
                         for _ in meta.domains[i])
            nid = make(i, kids)
            if nid not in below and nid not in made:
                made.append(nid)
        level_pool[i] = made
        below.extend(made)
    roots = [n for n in below if not nodes[n].is_leaf]
    root = min(roots, key=lambda n: nodes[n].feature) if roots else terminals[0]
    reach, stack = {root}, [root]
    out: dict = {}
    for e in edges:
        out.setdefault(e.source, []).append(e)
    while stack:
        for e in out.get(stack.pop(), []):
            if e.target not in reach:
                reach.add(e.target)
                stack.append(e.target)
    return cls(meta, [n for n in nodes if n.id in reach],
               [e for e in edges if e.source in reach], root)


def random_omdd(rng: random.Random, meta: ClassifierMeta, width: int = 3) -> Omdd:
    """Reduced OMDD built bottom-up with a unique table."""
    return _random_ordered(rng, meta, width, Omdd)


def random_obdd(rng: random.Random, n: int, width: int = 3) -> Obdd:
    meta = ClassifierMeta(tuple((0, 1) for _ in range(n)), (0, 1))
    return _random_ordered(rng, meta, width, Obdd)


def random_nbc(rng: random.Random, meta: ClassifierMeta, decimals: int = 3) -> NbcBackend:
    """Binary NBC with two-decimal log-probabilities (exact after quantizing)."""
    def lp():
        return Fraction(-rng.randint(5, 300), 100)

    prior = {c: lp() for c in meta.classes}
    cond = [{val: {c: lp() for c in meta.classes} for val in dom} for dom in meta.domains]
    return NbcBackend(NbcModel(meta, prior, cond), decimals)


def random_circuit(rng: random.Random, n: int, leaf_bias: float = 0.25) -> NnfCircuit:
    """Random d-DNNF over variables ``1..n``.

    Built top-down from three moves: a Shannon split on one variable
    (deterministic or-node), a decomposable and over a split of the
    variables, or a leaf (literal or constant).
    """
    nodes: list[NnfNode] = []

    def add(node: NnfNode) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def lit(x: int) -> int:
        return add(NnfNode("lit", lit=x))

    def build(vars_: list[int]) -> int:
        r = rng.random()
        if not vars_ or r < leaf_bias:
            pick = rng.random()
            if vars_ and pick < 0.6:
                return lit(rng.choice(vars_) * rng.choice((1, -1)))
            return add(NnfNode("and")) if pick < 0.8 else add(NnfNode("or"))
        if len(vars_) >= 2 and r < leaf_bias + 0.25:
            cut = rng.randint(1, len(vars_) - 1)
            shuffled = vars_[:]
            rng.shuffle(shuffled)
            a = build(sorted(shuffled[:cut]))
            b = build(sorted(shuffled[cut:]))
            return add(NnfNode("and", children=(a, b)))
        x = rng.choice(vars_)
        rest = [y for y in vars_ if y != x]
        hi = build(rest)
        lo = build(rest)
        pos = add(NnfNode("and", children=(lit(x), hi)))
        neg = add(NnfNode("and", children=(lit(-x), lo)))
        return add(NnfNode("or", children=(pos, neg), decision=x))

    root = build(list(range(1, n + 1)))
    if root != len(nodes) - 1:
        add(NnfNode("and", children=(root,)))
    return NnfCircuit(n, nodes)


def random_ddnnf(rng: random.Random, n: int) -> DdnnfBackend:
    return DdnnfBackend(random_circuit(rng, n))


FAMILIES = ("dt", "dg", "omdd", "obdd", "nbc", "ddnnf")


def random_model(rng: random.Random, family: str, cfg: SpaceConfig = SpaceConfig()):
    if family == "dt":
        return random_tree(rng, random_meta(rng, cfg))
    if family == "dg":
        return random_graph(rng, random_meta(rng, cfg))
    if family == "omdd":
        return random_omdd(rng, random_meta(rng, cfg))
    if family == "obdd":
        return random_obdd(rng, rng.randint(cfg.min_features, cfg.max_features))
    if family == "nbc":
        return random_nbc(rng, random_meta(rng, SpaceConfig(
            cfg.min_features, cfg.max_features, cfg.min_domain, cfg.max_domain, 2)))
    if family == "ddnnf":
        return random_ddnnf(rng, rng.randint(cfg.min_features, cfg.max_features))
    raise ValueError(f"unknown family {family!r}")
