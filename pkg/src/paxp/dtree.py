"""Decision trees with exact path-model counting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .engine import ClassifierMeta, CountPair, ExplanationError


class StructureError(ExplanationError):
    """The graph does not satisfy the structural invariants of its family."""


@dataclass(frozen=True)
class Node:
    id: Hashable
    feature: int | None = None   # internal node: 0-based feature index
    label: Hashable = None       # leaf: class

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class Edge:
    source: Hashable
    target: Hashable
    values: frozenset


@dataclass(frozen=True)
class TreePath:
    nodes: tuple
    literals: Mapping[int, frozenset]   # feature -> intersected value set
    label: Hashable

    @property
    def tested(self) -> frozenset:
        return frozenset(self.literals)

    def untested(self, m: int) -> frozenset:
        return frozenset(range(m)) - self.tested

    def consistent_with(self, v: Sequence[Hashable]) -> bool:
        return all(v[i] in vals for i, vals in self.literals.items())


def path_model_count(path: TreePath, meta: ClassifierMeta, v: Sequence[Hashable],
                     fixed: frozenset) -> int:
    """Number of points with ``x_fixed = v_fixed`` that follow ``path``."""
    total = 1
    for i in range(meta.feature_count):
        vals = path.literals.get(i)
        if i in fixed:
            if vals is not None and v[i] not in vals:
                return 0
        elif vals is not None:
            total *= len(vals)
        else:
            total *= meta.domain_size(i)
    return total


class GraphPaths:
    """Shared machinery for trees and general decision graphs: node tables,
    literal normalisation along paths, and path enumeration."""

    def __init__(self, meta: ClassifierMeta, nodes: Iterable[Node], edges: Iterable[Edge], root):
        self.meta = meta
        self.nodes = {n.id: n for n in nodes}
        self.root = root
        self.children: dict = {nid: [] for nid in self.nodes}
        for e in edges:
            if e.source not in self.nodes or e.target not in self.nodes:
                raise StructureError(f"edge {e.source}->{e.target} references an unknown node")
            self.children[e.source].append(e)
        if root not in self.nodes:
            raise StructureError(f"root {root!r} is not a node")
        for n in self.nodes.values():
            if n.is_leaf:
                if n.label not in meta.classes:
                    raise StructureError(f"leaf {n.id} has unknown class {n.label!r}")
                if self.children[n.id]:
                    raise StructureError(f"leaf {n.id} has outgoing edges")
            else:
                if not 0 <= n.feature < meta.feature_count:
                    raise StructureError(f"node {n.id} tests unknown feature {n.feature}")
        for nid, outs in self.children.items():
            dom = set(self.meta.domains[self.nodes[nid].feature]) if outs else set()
            for e in outs:
                if not e.values:
                    raise StructureError(f"edge {e.source}->{e.target} has an empty literal")
                if not e.values <= dom:
                    raise StructureError(
                        f"edge {e.source}->{e.target} uses values outside the domain")

    def iter_paths(self):
        """Depth-first enumeration of root-to-leaf paths, children in edge order."""
        def walk(nid, trail, lits, on_stack):
            node = self.nodes[nid]
            if node.is_leaf:
                yield TreePath(tuple(trail), dict(lits), node.label)
                return
            if not self.children[nid]:
                raise StructureError(f"internal node {nid} has no outgoing edges")
            i = node.feature
            for e in self.children[nid]:
                if e.target in on_stack:
                    raise StructureError(f"cycle through node {e.target}")
                prev = lits.get(i)
                cur = e.values if prev is None else prev & e.values
                if not cur:
                    raise StructureError(
                        f"inconsistent path {trail + [e.target]} on feature {self.meta.names[i]}")
                lits[i] = cur
                trail.append(e.target)
                on_stack.add(e.target)
                yield from walk(e.target, trail, lits, on_stack)
                on_stack.discard(e.target)
                trail.pop()
                if prev is None:
                    del lits[i]
                else:
                    lits[i] = prev

        yield from walk(self.root, [self.root], {}, {self.root})

    def _check_partitions(self):
        """Outgoing literals of each node partition the values still possible
        for its feature on every path reaching it."""
        def walk(nid, lits):
            node = self.nodes[nid]
            if node.is_leaf:
                return
            i = node.feature
            ctx = lits.get(i, frozenset(self.meta.domains[i]))
            outs = self.children[nid]
            seen: set = set()
            for e in outs:
                if seen & e.values:
                    raise StructureError(f"node {nid}: outgoing literals overlap")
                seen |= e.values
            if not ctx <= seen:
                raise StructureError(
                    f"node {nid}: values {sorted(map(str, ctx - seen))} of "
                    f"{self.meta.names[i]} have no outgoing edge")
            for e in outs:
                cur = ctx & e.values
                if not cur:
                    # edge unreachable from this context; a path through it
                    # would be inconsistent
                    raise StructureError(
                        f"edge {nid}->{e.target} is inconsistent with the path reaching {nid}")
                nl = dict(lits)
                nl[i] = cur
                walk(e.target, nl)

        walk(self.root, {})

    def trace(self, v: Sequence[Hashable]) -> TreePath:
        """The unique path consistent with ``v``."""
        v = self.meta.check_point(v)
        nid = self.root
        trail = [nid]
        lits: dict = {}
        while not self.nodes[nid].is_leaf:
            i = self.nodes[nid].feature
            nxt = [e for e in self.children[nid] if v[i] in e.values]
            if len(nxt) != 1:
                raise StructureError(f"node {nid}: {len(nxt)} edges consistent with {v[i]!r}")
            e = nxt[0]
            lits[i] = lits.get(i, e.values) & e.values
            nid = e.target
            trail.append(nid)
        return TreePath(tuple(trail), lits, self.nodes[nid].label)

    def classify(self, v: Sequence[Hashable]) -> Hashable:
        return self.trace(v).label


class DecisionTree(GraphPaths):
    """Univariate decision tree whose edges carry value-subset literals.

    Repeated tests of a feature along a path are intersected at load time.
    Paths are enumerated once and kept; counting is a sum over them.
    """

    def __init__(self, meta: ClassifierMeta, nodes: Iterable[Node], edges: Iterable[Edge], root):
        super().__init__(meta, nodes, edges, root)
        indeg = {nid: 0 for nid in self.nodes}
        for outs in self.children.values():
            for e in outs:
                indeg[e.target] += 1
        if indeg[self.root]:
            raise StructureError("root has incoming edges")
        for nid, d in indeg.items():
            if nid != self.root and d != 1:
                raise StructureError(f"node {nid} has {d} incoming edges (not a tree)")
            node = self.nodes[nid]
            if not node.is_leaf and len(self.children[nid]) < 2:
                raise StructureError(f"internal node {nid} has fewer than two children")
        self._check_partitions()
        self.paths: tuple[TreePath, ...] = tuple(self.iter_paths())
        reached = {n for p in self.paths for n in p.nodes}
        if reached != set(self.nodes):
            raise StructureError(f"unreachable nodes {sorted(map(str, set(self.nodes) - reached))}")

    @property
    def edges(self) -> list[Edge]:
        return [e for outs in self.children.values() for e in outs]

    def split_paths(self, c) -> tuple[list[TreePath], list[TreePath]]:
        """Paths predicting ``c`` and the remaining ones."""
        pos = [p for p in self.paths if p.label == c]
        neg = [p for p in self.paths if p.label != c]
        return pos, neg

    def path_universe(self, v: Sequence[Hashable]) -> frozenset:
        """Features tested on the path followed by ``v``."""
        return self.trace(v).tested

    def count(self, v: Sequence[Hashable], fixed: frozenset, c) -> CountPair:
        target = total = 0
        for p in self.paths:
            n = path_model_count(p, self.meta, v, fixed)
            total += n
            if p.label == c:
                target += n
        return CountPair(target, total)

    def path_probability(self, path: TreePath):
        """Fraction of the feature space consistent with ``path``."""
        n = math.prod(len(s) for s in path.literals.values())
        n *= self.meta.space_size(path.untested(self.meta.feature_count))
        return Fraction(n, self.meta.space_size())
