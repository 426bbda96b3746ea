"""d-DNNF circuits: conditioning (CD), model counting (CT) and a counting backend.

Nodes follow the compiled-NNF text format: ``L lit``, ``A k c1..ck`` and
``O j k c1..ck``; node ids are line positions and the root is the last
node.  ``A 0`` is true and ``O 0 0`` is false.  Smoothing is done
arithmetically while counting, the circuit is never rewritten.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import engine
from .engine import ClassifierMeta, CountPair, ExplanationError


class NnfError(ExplanationError):
    """Malformed compiled-NNF input or a non-decomposable circuit."""


@dataclass(frozen=True)
class NnfNode:
    kind: str                    # "lit" | "and" | "or"
    lit: int = 0                 # signed variable for literals
    children: tuple = ()
    decision: int = 0            # decision variable of an or-node (0 = unknown)


@dataclass
class NnfCircuit:
    n_vars: int
    nodes: list
    supports: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.nodes:
            raise NnfError("empty circuit")
        self.supports = []
        for idx, node in enumerate(self.nodes):
            if node.kind == "lit":
                var = abs(node.lit)
                if not 1 <= var <= self.n_vars or node.lit == 0:
                    raise NnfError(f"node {idx}: literal {node.lit} out of range")
                self.supports.append(frozenset({var}))
                continue
            if node.kind not in ("and", "or"):
                raise NnfError(f"node {idx}: unknown kind {node.kind!r}")
            sup: set = set()
            for ch in node.children:
                if not 0 <= ch < idx:
                    raise NnfError(f"node {idx}: child {ch} does not precede it")
                if node.kind == "and" and sup & self.supports[ch]:
                    raise NnfError(f"node {idx}: and-children share variables (not decomposable)")
                sup |= self.supports[ch]
            self.supports.append(frozenset(sup))

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    def is_true(self, idx: int) -> bool:
        n = self.nodes[idx]
        return n.kind == "and" and not n.children

    def is_false(self, idx: int) -> bool:
        n = self.nodes[idx]
        return n.kind == "or" and not n.children

    def evaluate(self, assignment: Mapping[int, bool]) -> bool:
        vals: list[bool] = []
        for n in self.nodes:
            if n.kind == "lit":
                x = assignment[abs(n.lit)]
                vals.append(x if n.lit > 0 else not x)
            elif n.kind == "and":
                vals.append(all(vals[c] for c in n.children))
            else:
                vals.append(any(vals[c] for c in n.children))
        return vals[-1]

    def edge_count(self) -> int:
        return sum(len(n.children) for n in self.nodes)


def parse_nnf(text: str) -> NnfCircuit:
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and ln[0] not in ("c", "%")]
    if not lines:
        raise NnfError("empty file")
    head = lines[0]
    if len(head) != 4 or head[0] != "nnf":
        raise NnfError("line 1: expected header 'nnf N E V'")
    try:
        n_nodes, _, n_vars = (int(t) for t in head[1:])
    except ValueError as exc:
        raise NnfError("line 1: header counts must be integers") from exc
    nodes = []
    for lineno, tok in enumerate(lines[1:], start=2):
        try:
            if tok[0] == "L" and len(tok) == 2:
                nodes.append(NnfNode("lit", lit=int(tok[1])))
            elif tok[0] == "A":
                k = int(tok[1])
                kids = tuple(int(t) for t in tok[2:])
                if len(kids) != k:
                    raise NnfError(f"line {lineno}: expected {k} children")
                nodes.append(NnfNode("and", children=kids))
            elif tok[0] == "O":
                j, k = int(tok[1]), int(tok[2])
                kids = tuple(int(t) for t in tok[3:])
                if len(kids) != k:
                    raise NnfError(f"line {lineno}: expected {k} children")
                nodes.append(NnfNode("or", children=kids, decision=j))
            else:
                raise NnfError(f"line {lineno}: unknown node line {' '.join(tok)!r}")
        except NnfError:
            raise
        except (ValueError, IndexError) as exc:
            raise NnfError(f"line {lineno}: malformed node line") from exc
    if len(nodes) != n_nodes:
        raise NnfError(f"header announces {n_nodes} nodes, found {len(nodes)}")
    return NnfCircuit(n_vars, nodes)


def dump_nnf(circuit: NnfCircuit) -> str:
    out = [f"nnf {len(circuit.nodes)} {circuit.edge_count()} {circuit.n_vars}"]
    for n in circuit.nodes:
        if n.kind == "lit":
            out.append(f"L {n.lit}")
        elif n.kind == "and":
            out.append(" ".join(["A", str(len(n.children)), *map(str, n.children)]))
        else:
            out.append(" ".join(["O", str(n.decision), str(len(n.children)),
                                 *map(str, n.children)]))
    return "\n".join(out) + "\n"


def _node_counts(circuit: NnfCircuit) -> list[int]:
    # counts[i] = models of node i over the variables of its own support
    counts: list[int] = []
    for idx, n in enumerate(circuit.nodes):
        if n.kind == "lit":
            counts.append(1)
        elif n.kind == "and":
            c = 1
            for ch in n.children:
                c *= counts[ch]
            counts.append(c)
        else:
            width = len(circuit.supports[idx])
            counts.append(sum(counts[ch] << (width - len(circuit.supports[ch]))
                              for ch in n.children))
    return counts


def model_count(circuit: NnfCircuit) -> int:
    """Models over all ``n_vars`` variables (determinism of or-nodes is trusted)."""
    counts = _node_counts(circuit)
    return counts[circuit.root] << (circuit.n_vars - len(circuit.supports[circuit.root]))


def condition(circuit: NnfCircuit, rho: Iterable[int]) -> NnfCircuit:
    """``circuit | rho`` for a consistent set of signed literals.

    Conditioned variables disappear; the result keeps ``n_vars`` so its
    count includes a factor 2 for each of them.
    """
    rho = set(rho)
    if any(-lit in rho for lit in rho) or 0 in rho:
        raise ExplanationError("conditioning term is inconsistent")
    for lit in rho:
        if abs(lit) > circuit.n_vars:
            raise ExplanationError(f"literal {lit} out of range")
    new: list[NnfNode] = []
    remap: list[int] = []
    true_id = false_id = None

    def const(value: bool) -> int:
        nonlocal true_id, false_id
        if value:
            if true_id is None:
                new.append(NnfNode("and"))
                true_id = len(new) - 1
            return true_id
        if false_id is None:
            new.append(NnfNode("or"))
            false_id = len(new) - 1
        return false_id

    for n in circuit.nodes:
        if n.kind == "lit":
            if n.lit in rho:
                remap.append(const(True))
            elif -n.lit in rho:
                remap.append(const(False))
            else:
                new.append(n)
                remap.append(len(new) - 1)
            continue
        kids = [remap[c] for c in n.children]
        if n.kind == "and":
            if false_id is not None and false_id in kids:
                remap.append(const(False))
                continue
            kids = [k for k in kids if k != true_id]
            if len(kids) == 1:
                remap.append(kids[0])
                continue
            if not kids:
                remap.append(const(True))
                continue
            new.append(NnfNode("and", children=tuple(kids)))
        else:
            if true_id is not None and true_id in kids:
                remap.append(const(True))
                continue
            kids = [k for k in kids if k != false_id]
            if len(kids) == 1:
                remap.append(kids[0])
                continue
            if not kids:
                remap.append(const(False))
                continue
            decision = 0 if abs(n.decision) in {abs(l) for l in rho} else n.decision
            new.append(NnfNode("or", children=tuple(kids), decision=decision))
        remap.append(len(new) - 1)
    root = remap[circuit.root]
    if root != len(new) - 1:
        new.append(NnfNode("and", children=(root,)))
    return NnfCircuit(circuit.n_vars, _prune(new))


def _prune(nodes: list) -> list:
    """Drop nodes unreachable from the root, renumbering children."""
    keep = [False] * len(nodes)
    keep[-1] = True
    for idx in range(len(nodes) - 1, -1, -1):
        if keep[idx]:
            for ch in nodes[idx].children:
                keep[ch] = True
    index = {}
    out = []
    for idx, n in enumerate(nodes):
        if keep[idx]:
            index[idx] = len(out)
            out.append(NnfNode(n.kind, n.lit, tuple(index[c] for c in n.children), n.decision))
    return out


def conditioned_count(circuit: NnfCircuit, rho: Iterable[int]) -> int:
    """Models of ``circuit`` agreeing with ``rho``, over the remaining variables."""
    rho = set(rho)
    return model_count(condition(circuit, rho)) >> len(rho)


def check_deterministic(circuit: NnfCircuit, max_vars: int = 16) -> bool:
    """Expensive check that or-children are pairwise inconsistent (small inputs)."""
    if circuit.n_vars > max_vars:
        raise ExplanationError("too many variables for the determinism check")
    for n in circuit.nodes:
        if n.kind != "or" or len(n.children) < 2:
            continue
        for a, b in itertools.combinations(n.children, 2):
            sup = sorted(circuit.supports[a] | circuit.supports[b])
            sub_a = _subcircuit(circuit, a)
            sub_b = _subcircuit(circuit, b)
            for bits in itertools.product((False, True), repeat=len(sup)):
                asg = dict(zip(sup, bits))
                full = {v: asg.get(v, False) for v in range(1, circuit.n_vars + 1)}
                if sub_a.evaluate(full) and sub_b.evaluate(full):
                    return False
    return True


def _subcircuit(circuit: NnfCircuit, idx: int) -> NnfCircuit:
    return NnfCircuit(circuit.n_vars, _prune(list(circuit.nodes[: idx + 1])))


class DdnnfBackend:
    """Binary classifier whose class-1 region is a d-DNNF circuit.

    ``variables[i]`` is the circuit variable for feature ``i``; feature
    values are 0/1 (or any two-value domain, the second value meaning true).
    """

    family = "ddnnf"

    def __init__(self, circuit: NnfCircuit, meta: ClassifierMeta | None = None,
                 variables: Sequence[int] | None = None):
        if meta is None:
            meta = ClassifierMeta(tuple((0, 1) for _ in range(circuit.n_vars)), (0, 1))
        if any(len(d) != 2 for d in meta.domains) or len(meta.classes) != 2:
            raise ExplanationError("d-DNNF classifiers need boolean features and two classes")
        if variables is None:
            variables = list(range(1, meta.feature_count + 1))
        variables = list(variables)
        if len(variables) != meta.feature_count or len(set(variables)) != len(variables):
            raise ExplanationError("feature-to-variable map must be one-to-one")
        if any(not 1 <= x <= circuit.n_vars for x in variables):
            raise ExplanationError("feature mapped to a variable outside the circuit")
        if circuit.n_vars != meta.feature_count:
            raise ExplanationError("every circuit variable must correspond to a feature")
        self.circuit = circuit
        self.meta = meta
        self.variables = variables
        self.positive_models = model_count(circuit)

    def _literal(self, i: int, value) -> int:
        var = self.variables[i]
        return var if value == self.meta.domains[i][1] else -var

    def classify(self, v):
        v = self.meta.check_point(v)
        asg = {self.variables[i]: x == self.meta.domains[i][1] for i, x in enumerate(v)}
        return self.meta.classes[1] if self.circuit.evaluate(asg) else self.meta.classes[0]

    def count(self, v, fixed, c) -> CountPair:
        rho = {self._literal(i, v[i]) for i in fixed}
        positive = conditioned_count(self.circuit, rho)
        total = 1 << (self.meta.feature_count - len(fixed))
        target = positive if c == self.meta.classes[1] else total - positive
        return CountPair(target, total)


def min_paxp_binary_search(backend, v, delta=Fraction(1), universe=None) -> frozenset:
    """Smallest weak PAXp by binary search on the size bound ``k``.

    Each probe asks whether a weak PAXp with at most ``k`` features exists
    (the pruned exact search of :mod:`paxp.engine`); the answer is monotone
    in ``k``.  The set found at the smallest feasible ``k`` is returned.
    """
    delta = engine.parse_delta(delta)
    inst = v if isinstance(v, engine.Instance) else engine.Instance.of(backend, v)
    universe = backend.meta.all_features if universe is None else frozenset(universe)
    if not engine.is_weak_paxp(backend, inst, universe, delta):
        raise engine.ContractViolation("universe is not a weak PAXp")
    lo, hi = 0, len(universe)
    best = frozenset(universe)
    while lo < hi:
        mid = (lo + hi) // 2
        found = engine.find_weak_paxp(backend, inst, universe, delta, mid)
        if found is None:
            lo = mid + 1
        else:
            best, hi = found, len(found)
    return best
