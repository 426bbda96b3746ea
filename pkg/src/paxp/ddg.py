"""Graph-based classifiers: ordered decision diagrams and general decision graphs."""
from __future__ import annotations

import math
import warnings
from typing import Hashable, Iterable, Sequence

from .dtree import DecisionTree, Edge, GraphPaths, Node, StructureError, path_model_count
from .engine import ClassifierMeta, CountPair


class Omdd:
    """Ordered multi-valued decision diagram.

    Each edge carries one value; parallel edges between the same pair of
    nodes are stored as one :class:`Edge` whose ``values`` has the
    multiplicity as its size.  Features must appear in increasing index
    order along every path.  ``reduced`` violations only warn: counting does
    not depend on reduction.
    """

    family = "omdd"

    def __init__(self, meta: ClassifierMeta, nodes: Iterable[Node], edges: Iterable[Edge], root,
                 *, check_reduced: bool = True):
        self.meta = meta
        self.nodes = {n.id: n for n in nodes}
        self.root = root
        if root not in self.nodes:
            raise StructureError(f"root {root!r} is not a node")
        self.children: dict = {nid: [] for nid in self.nodes}
        for e in edges:
            if e.source not in self.nodes or e.target not in self.nodes:
                raise StructureError(f"edge {e.source}->{e.target} references an unknown node")
            self.children[e.source].append(e)
        self._validate()
        if check_reduced:
            issues = self.reduction_issues()
            if issues:
                warnings.warn(f"diagram is not reduced: {issues[0]}", stacklevel=2)

    def _level(self, nid) -> int:
        n = self.nodes[nid]
        return self.meta.feature_count if n.is_leaf else n.feature

    def _validate(self):
        for nid, n in self.nodes.items():
            outs = self.children[nid]
            if n.is_leaf:
                if n.label not in self.meta.classes:
                    raise StructureError(f"terminal {nid} has unknown class {n.label!r}")
                if outs:
                    raise StructureError(f"terminal {nid} has outgoing edges")
                continue
            if not 0 <= n.feature < self.meta.feature_count:
                raise StructureError(f"node {nid} tests unknown feature {n.feature}")
            seen: set = set()
            for e in outs:
                if seen & e.values:
                    raise StructureError(f"node {nid}: a value labels two edges")
                seen |= e.values
                if self._level(e.target) <= n.feature:
                    raise StructureError(
                        f"edge {nid}->{e.target} violates the variable order")
            if seen != set(self.meta.domains[n.feature]):
                raise StructureError(
                    f"node {nid}: outgoing values do not partition the domain of "
                    f"{self.meta.names[n.feature]}")
        # reachability (the order check above rules out cycles)
        stack, reached = [self.root], {self.root}
        while stack:
            for e in self.children[stack.pop()]:
                if e.target not in reached:
                    reached.add(e.target)
                    stack.append(e.target)
        if reached != set(self.nodes):
            raise StructureError("diagram has unreachable nodes")

    def reduction_issues(self) -> list[str]:
        issues = []
        canon: dict = {}   # structural key -> first node id
        sig: dict = {}     # node id -> canonical id
        for nid in self._topological(reverse=True):
            n = self.nodes[nid]
            if n.is_leaf:
                key = ("leaf", n.label)
            else:
                if len({sig[e.target] for e in self.children[nid]}) == 1:
                    issues.append(f"node {nid} has isomorphic children only")
                key = ("node", n.feature, frozenset(
                    (val, sig[e.target]) for e in self.children[nid] for val in e.values))
            if key in canon:
                issues.append(f"node {nid} duplicates node {canon[key]}")
            sig[nid] = canon.setdefault(key, nid)
        return issues

    def _topological(self, reverse=False) -> list:
        # ordered diagrams: sorting by level is a topological order
        return sorted(self.nodes, key=self._level, reverse=reverse)

    def classify(self, v: Sequence[Hashable]) -> Hashable:
        v = self.meta.check_point(v)
        nid = self.root
        while not self.nodes[nid].is_leaf:
            i = self.nodes[nid].feature
            nid = next(e.target for e in self.children[nid] if v[i] in e.values)
        return self.nodes[nid].label

    def _skip(self, lo: int, hi: int, fixed: frozenset) -> int:
        # features strictly between two tested levels are free unless fixed
        return math.prod(
            1 if l in fixed else self.meta.domain_size(l) for l in range(lo + 1, hi))

    def count_class(self, v: Sequence[Hashable], fixed: frozenset, c) -> int:
        """Points with ``x_fixed = v_fixed`` reaching a terminal labelled ``c``."""
        memo: dict = {}
        for nid in self._topological(reverse=True):
            n = self.nodes[nid]
            if n.is_leaf:
                memo[nid] = 1 if n.label == c else 0
                continue
            i = n.feature
            total = 0
            for e in self.children[nid]:
                if i in fixed:
                    if v[i] not in e.values:
                        continue
                    mult = 1
                else:
                    mult = len(e.values)
                total += memo[e.target] * self._skip(i, self._level(e.target), fixed) * mult
            memo[nid] = total
        return memo[self.root] * self._skip(-1, self._level(self.root), fixed)

    def count(self, v, fixed, c) -> CountPair:
        return CountPair(self.count_class(v, fixed, c), self.meta.universal_size(fixed))


class Obdd(Omdd):
    """OMDD over boolean features with two classes and two-way branching."""

    family = "obdd"

    def __init__(self, meta: ClassifierMeta, nodes, edges, root, *, check_reduced: bool = True):
        if len(meta.classes) != 2:
            raise StructureError("an OBDD has exactly two classes")
        for i, dom in enumerate(meta.domains):
            if len(dom) != 2:
                raise StructureError(f"feature {meta.names[i]} is not boolean")
        super().__init__(meta, nodes, edges, root, check_reduced=check_reduced)
        for nid, outs in self.children.items():
            if any(len(e.values) != 1 for e in outs):
                raise StructureError(f"node {nid}: both branches reach the same child")


def omdd_count(g: Omdd, v, fixed, c) -> int:
    return g.count_class(v, frozenset(fixed), c)


def obdd_count(g: Obdd, v, fixed, c) -> int:
    if not isinstance(g, Obdd):
        raise StructureError("expected an OBDD")
    return g.count_class(v, frozenset(fixed), c)


class DecisionGraph(GraphPaths):
    """Unrestricted decision graph (DAG with value-subset literals).

    Counting enumerates root-to-terminal paths, so it is exponential in the
    worst case; use :class:`Omdd` when the graph is ordered.
    """

    family = "dg"

    def __init__(self, meta: ClassifierMeta, nodes: Iterable[Node], edges: Iterable[Edge], root):
        super().__init__(meta, nodes, edges, root)
        self._check_partitions()
        self.paths = tuple(self.iter_paths())
        reached = {n for p in self.paths for n in p.nodes}
        if reached != set(self.nodes):
            raise StructureError("graph has dead-ends or unreachable nodes")

    @classmethod
    def from_tree(cls, tree: DecisionTree) -> "DecisionGraph":
        return cls(tree.meta, tree.nodes.values(), tree.edges, tree.root)

    def count(self, v, fixed, c) -> CountPair:
        target = total = 0
        for p in self.paths:
            n = path_model_count(p, self.meta, v, fixed)
            total += n
            if p.label == c:
                target += n
        return CountPair(target, total)


def dg_count_by_paths(g: DecisionGraph, v, fixed, c) -> int:
    return g.count(v, frozenset(fixed), c).target
