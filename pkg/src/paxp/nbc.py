"""Binary naive Bayes classifiers through their extended linear form.

The pipeline is

* :func:`reduce_to_xlc` turns class log-priors and per-value conditional
  log-probabilities into a bias plus per-feature value weights;
* :func:`axp_xlc` extracts a minimum-size AXp greedily;
* :func:`quantize` scales the weights to non-negative integers so that the
  positive class becomes a strict knapsack constraint ``sum w < rhs``;
* :func:`dp_count` counts completions satisfying that constraint with the
  pseudo-polynomial table ``C(k, r)``.

All arithmetic is exact (``Fraction`` for weights, ``int`` for counts).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from . import engine
from .engine import ClassifierMeta, CountPair, ExplanationError, Instance

DEFAULT_DECIMALS = 3


def round_half_away(x: Fraction) -> int:
    """Nearest integer, halves rounded away from zero."""
    n = math.floor(abs(x) + Fraction(1, 2))
    return n if x >= 0 else -n


@dataclass(frozen=True)
class NbcModel:
    """Binary NBC given by exact log-probabilities.

    ``classes[1]`` is the positive class.  ``log_prior[c]`` and
    ``log_cond[i][value][c]`` hold decimal log-probabilities (any common
    offset cancels in the reduction).
    """

    meta: ClassifierMeta
    log_prior: Mapping[Hashable, Fraction]
    log_cond: Sequence[Mapping[Hashable, Mapping[Hashable, Fraction]]]

    def __post_init__(self):
        if len(self.meta.classes) != 2:
            raise ExplanationError("naive Bayes support is limited to two classes")
        for c in self.meta.classes:
            if c not in self.log_prior:
                raise ExplanationError(f"missing log-prior for class {c!r}")
        if len(self.log_cond) != self.meta.feature_count:
            raise ExplanationError("one conditional table per feature is required")
        for i, dom in enumerate(self.meta.domains):
            for val in dom:
                row = self.log_cond[i].get(val)
                if row is None or any(c not in row for c in self.meta.classes):
                    raise ExplanationError(
                        f"missing log-probability for {self.meta.names[i]}={val!r}")

    def classify(self, v) -> Hashable:
        """Argmax over classes; exact ties go to the negative class."""
        neg, pos = self.meta.classes
        score = {c: self.log_prior[c] + sum(self.log_cond[i][x][c] for i, x in enumerate(v))
                 for c in (neg, pos)}
        return pos if score[pos] > score[neg] else neg


@dataclass(frozen=True)
class XlcModel:
    """``nu(x) = bias + sum_i weights[i][x_i]``; positive iff ``nu(x) > 0``."""

    meta: ClassifierMeta
    bias: Fraction
    weights: tuple  # per feature: dict value -> Fraction

    def nu(self, v) -> Fraction:
        return self.bias + sum(self.weights[i][x] for i, x in enumerate(v))

    def classify(self, v) -> Hashable:
        neg, pos = self.meta.classes
        return pos if self.nu(v) > 0 else neg


def reduce_to_xlc(model: NbcModel) -> XlcModel:
    neg, pos = model.meta.classes
    bias = model.log_prior[pos] - model.log_prior[neg]
    weights = tuple(
        {val: model.log_cond[i][val][pos] - model.log_cond[i][val][neg] for val in dom}
        for i, dom in enumerate(model.meta.domains)
    )
    return XlcModel(model.meta, bias, weights)


# ---------------------------------------------------------------------------
# AXp by greedy knapsack


@dataclass(frozen=True)
class XlcGaps:
    slack: Fraction          # value of the (oriented) decision function at v
    worst: Fraction          # its value with every feature adversarial
    deltas: tuple            # per feature protection v_i^{a_i} - v_i^worst
    strict: bool             # positive class needs > 0, negative >= 0


def xlc_gaps(xlc: XlcModel, v) -> XlcGaps:
    """Slack and per-feature worst-case drops, oriented to the predicted class.

    For the negative class the decision function is negated, and the
    requirement ``nu <= 0`` becomes ``-nu >= 0``.
    """
    sign = 1 if xlc.classify(v) == xlc.meta.classes[1] else -1
    ws = [{k: sign * w for k, w in row.items()} for row in xlc.weights]
    bias = sign * xlc.bias
    slack = bias + sum(ws[i][x] for i, x in enumerate(v))
    deltas = tuple(ws[i][x] - min(ws[i].values()) for i, x in enumerate(v))
    return XlcGaps(slack, slack - sum(deltas), deltas, strict=sign == 1)


def _margin_ok(value: Fraction, strict: bool) -> bool:
    return value > 0 if strict else value >= 0


def axp_xlc(xlc: XlcModel, v) -> frozenset:
    """Minimum-cardinality AXp: fix features by decreasing protection until
    the worst case can no longer flip the prediction."""
    g = xlc_gaps(xlc, v)
    order = sorted(range(len(g.deltas)), key=lambda i: (-g.deltas[i], i))
    chosen: list[int] = []
    value = g.worst  # = -Phi
    for i in order:
        if _margin_ok(value, g.strict):
            break
        chosen.append(i)
        value += g.deltas[i]
    return frozenset(chosen)


# ---------------------------------------------------------------------------
# quantisation and counting


@dataclass(frozen=True)
class QuantizedXlc:
    """Positive class iff ``sum_i weights[i][x_i] < rhs`` (all weights >= 1)."""

    meta: ClassifierMeta
    decimals: int
    weights: tuple            # per feature: dict value -> int
    rhs: int
    shifts: tuple             # per-feature offsets added to reach positivity
    collapsed: tuple          # per feature: ((w1, n1), (w2, n2), ...) with w1 < w2 < ...

    def classify(self, v) -> Hashable:
        neg, pos = self.meta.classes
        return pos if sum(self.weights[i][x] for i, x in enumerate(v)) < self.rhs else neg

    def as_xlc(self) -> XlcModel:
        """Integer XLC deciding exactly like this knapsack constraint."""
        return XlcModel(
            self.meta,
            Fraction(self.rhs),
            tuple({k: Fraction(-w) for k, w in row.items()} for row in self.weights),
        )

    @property
    def worst_case_columns(self) -> int:
        """Theoretical column ceiling: sum over features of n^last * w^last."""
        return sum(row[-1][0] * row[-1][1] for row in self.collapsed)

    @property
    def columns(self) -> int:
        return max(self.rhs, 0)


def quantize(xlc: XlcModel, decimals: int = DEFAULT_DECIMALS) -> QuantizedXlc:
    if decimals < 0:
        raise ExplanationError("decimal places must be non-negative")
    scale = 10 ** decimals
    # sum_i v_i > -w0   <=>   sum_i (-v_i) < w0
    neg_w = [{k: -round_half_away(w * scale) for k, w in row.items()} for row in xlc.weights]
    rhs = round_half_away(xlc.bias * scale)
    shifts = []
    weights = []
    for row in neg_w:
        s = 1 - min(row.values())
        shifts.append(s)
        weights.append({k: w + s for k, w in row.items()})
        rhs += s
    collapsed = []
    for row in weights:
        counts: dict[int, int] = {}
        for w in row.values():
            counts[w] = counts.get(w, 0) + 1
        collapsed.append(tuple(sorted(counts.items())))
    return QuantizedXlc(xlc.meta, decimals, tuple(weights), rhs, tuple(shifts), tuple(collapsed))


@dataclass
class DpTable:
    """Rows ``C(k, .)`` for k = 1..m over columns ``0..rhs-1``.

    ``C(k, r)`` counts the weight picks over features 1..k (fixed features
    contribute their one weight) summing to at most ``r``.  Rows are
    recomputed from the first feature whose fixed/free status changed.
    """

    q: QuantizedXlc
    v: tuple
    fixed: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    row_updates: int = 0

    def __post_init__(self):
        m = self.q.meta.feature_count
        if not self.fixed:
            self.fixed = [False] * m
        self.rows = [None] * m
        self._refresh(0)

    def _options(self, k: int):
        if self.fixed[k]:
            return ((self.q.weights[k][self.v[k]], 1),)
        return self.q.collapsed[k]

    def _row(self, k: int) -> list[int]:
        ncols = self.q.columns
        opts = self._options(k)
        if k == 0:
            # cumulative base case: number of first-feature picks with weight <= r
            row = [0] * ncols
            for r in range(ncols):
                row[r] = sum(n for w, n in opts if w <= r)
            return row
        prev = self.rows[k - 1]
        row = [0] * ncols
        for w, n in opts:
            # C(k-1, r-w) is zero for r < w
            for r in range(w, ncols):
                row[r] += n * prev[r - w]
        return row

    def _refresh(self, start: int):
        for k in range(start, self.q.meta.feature_count):
            self.rows[k] = self._row(k)
            self.row_updates += 1

    def set_fixed(self, fixed: frozenset):
        flags = [i in fixed for i in range(self.q.meta.feature_count)]
        changed = [i for i, (a, b) in enumerate(zip(flags, self.fixed)) if a != b]
        self.fixed = flags
        if changed:
            self._refresh(changed[0])

    def value(self) -> int:
        """``C(m, rhs-1)``: completions strictly below the right-hand side."""
        if self.q.columns == 0:
            return 0
        return self.rows[-1][self.q.columns - 1]


def dp_count(q: QuantizedXlc, fixed, v) -> int:
    """Completions of the free features for which the positive class holds."""
    fixed = q.meta.check_features(fixed)
    table = DpTable(q, tuple(v), [i in fixed for i in range(q.meta.feature_count)])
    return table.value()


class NbcBackend:
    """Counting backend for a binary NBC, deciding through its quantized form.

    ``classify`` is the quantized classifier so that counts and the
    enumeration oracle see the same function; ``exact_classify`` is the
    argmax over the unrounded log-probabilities.
    """

    def __init__(self, model: NbcModel, decimals: int = DEFAULT_DECIMALS):
        self.model = model
        self.meta = model.meta
        self.decimals = decimals
        self.xlc = reduce_to_xlc(model)
        self.quantized = quantize(self.xlc, decimals)

    def classify(self, v) -> Hashable:
        return self.quantized.classify(v)

    def exact_classify(self, v) -> Hashable:
        return self.model.classify(v)

    def _pair(self, positive: int, v, fixed, c) -> CountPair:
        total = self.meta.universal_size(fixed)
        target = positive if c == self.meta.classes[1] else total - positive
        return CountPair(target, total)

    def count(self, v, fixed, c) -> CountPair:
        return self._pair(dp_count(self.quantized, fixed, v), v, fixed, c)

    def deltas(self, v) -> tuple:
        return xlc_gaps(self.quantized.as_xlc(), v).deltas

    def axp(self, v) -> frozenset:
        return axp_xlc(self.quantized.as_xlc(), v)


class _IncrementalCounter:
    """Backend view sharing one DpTable across the queries of a deletion run."""

    def __init__(self, backend: NbcBackend, v):
        self.backend = backend
        self.meta = backend.meta
        self.table = DpTable(backend.quantized, tuple(v))

    def classify(self, v):
        return self.backend.classify(v)

    def count(self, v, fixed, c) -> CountPair:
        self.table.set_fixed(fixed)
        return self.backend._pair(self.table.value(), v, fixed, c)


def lm_paxp_nbc(backend: NbcBackend, v, delta, order=None, *, fixpoint: bool = False) -> frozenset:
    """Deletion seeded with the greedy AXp.

    Features outside the AXp start universal; the rest are tried by
    increasing protection (``order`` overrides).  See :func:`engine.lm_paxp`
    for ``fixpoint``.
    """
    inst = Instance.of(backend, v)
    seed = backend.axp(inst.values)
    if order is None:
        d = backend.deltas(inst.values)
        order = sorted(seed, key=lambda i: (d[i], i))
    counter = _IncrementalCounter(backend, inst.values)
    return engine.lm_paxp(counter, inst, seed=seed, order=order, delta=delta,
                          fixpoint=fixpoint)
