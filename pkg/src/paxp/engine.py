"""Explanation predicates and the generic search procedures.

Every classifier family plugs in through :class:`Backend`: it exposes the
feature space (``meta``), a ``classify`` function and an exact conditioned
counter ``count(v, fixed, c)``.  Nothing in this module knows how a backend
counts; all decisions are made on integers, never on floats.

Features are identified by 0-based indices ``0..m-1``; a feature set is a
``frozenset`` of such indices (the fixed features), everything outside it
is universal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Protocol, Sequence, Union

FeatureSet = frozenset  # frozenset[int] of fixed feature indices

__all__ = [
    "ExplanationError",
    "ContractViolation",
    "ClassifierMeta",
    "CountPair",
    "Instance",
    "Backend",
    "FeatureSet",
    "parse_delta",
    "precision",
    "is_weak_paxp",
    "is_weak_axp",
    "lm_paxp",
    "axp",
    "is_subset_minimal",
    "min_paxp",
    "find_weak_paxp",
    "resolve_order",
    "ORDER_POLICIES",
]


class ExplanationError(ValueError):
    """Bad input to an explanation query (index out of range, bad value...)."""


class ContractViolation(ExplanationError):
    """A documented precondition of a search procedure does not hold."""


@dataclass(frozen=True)
class ClassifierMeta:
    domains: tuple[tuple[Hashable, ...], ...]
    classes: tuple[Hashable, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        domains = tuple(tuple(d) for d in self.domains)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "classes", tuple(self.classes))
        if not domains:
            raise ExplanationError("at least one feature is required")
        for i, dom in enumerate(domains):
            if not dom:
                raise ExplanationError(f"feature {i} has an empty domain")
            if len(set(dom)) != len(dom):
                raise ExplanationError(f"feature {i} has duplicate domain values")
        if len(self.classes) < 2 or len(set(self.classes)) != len(self.classes):
            raise ExplanationError("need at least two distinct classes")
        names = tuple(self.names) or tuple(f"x{i + 1}" for i in range(len(domains)))
        if len(names) != len(domains):
            raise ExplanationError("feature names do not match the number of domains")
        object.__setattr__(self, "names", names)

    @property
    def feature_count(self) -> int:
        return len(self.domains)

    @property
    def all_features(self) -> frozenset:
        return frozenset(range(len(self.domains)))

    def domain_size(self, i: int) -> int:
        return len(self.domains[i])

    def space_size(self, free: Iterable[int] | None = None) -> int:
        """Number of points over ``free`` features (all features by default)."""
        idx = range(self.feature_count) if free is None else free
        return math.prod(len(self.domains[i]) for i in idx)

    def universal_size(self, fixed: Iterable[int]) -> int:
        fixed = set(fixed)
        return math.prod(len(d) for i, d in enumerate(self.domains) if i not in fixed)

    def check_point(self, v: Sequence[Hashable]) -> tuple:
        v = tuple(v)
        if len(v) != self.feature_count:
            raise ExplanationError(f"expected {self.feature_count} values, got {len(v)}")
        for i, (x, dom) in enumerate(zip(v, self.domains)):
            if x not in dom:
                raise ExplanationError(f"value {x!r} not in the domain of feature {self.names[i]}")
        return v

    def check_features(self, fixed: Iterable[int]) -> frozenset:
        fixed = frozenset(fixed)
        for i in fixed:
            if not isinstance(i, int) or not 0 <= i < self.feature_count:
                raise ExplanationError(f"invalid feature index {i!r}")
        return fixed


@dataclass(frozen=True)
class CountPair:
    """Points predicting the target class / all points, under fixed features."""

    target: int
    total: int

    def __post_init__(self):
        if not 0 <= self.target <= self.total or self.total <= 0:
            raise ExplanationError(f"inconsistent counts {self.target}/{self.total}")

    @property
    def precision(self) -> Fraction:
        return Fraction(self.target, self.total)

    def __str__(self) -> str:
        return f"{self.target} / {self.total}"


class Backend(Protocol):
    meta: ClassifierMeta

    def classify(self, v: Sequence[Hashable]) -> Hashable: ...

    def count(self, v: Sequence[Hashable], fixed: frozenset, c: Hashable) -> CountPair: ...


@dataclass(frozen=True)
class Instance:
    """A point together with the class the backend predicts for it."""

    values: tuple
    predicted_class: Hashable

    @classmethod
    def of(cls, backend: Backend, values: Sequence[Hashable], predicted_class=None) -> "Instance":
        values = backend.meta.check_point(values)
        c = backend.classify(values)
        if predicted_class is not None and predicted_class != c:
            raise ExplanationError(
                f"declared class {predicted_class!r} but the classifier predicts {c!r}"
            )
        return cls(values, c)


def parse_delta(delta: Union[str, int, Fraction]) -> Fraction:
    """Exact threshold from ``'93/100'``, ``'0.93'``, an int or a Fraction.

    Floats are refused: ``0.93`` as a binary float is not 93/100.
    """
    if isinstance(delta, float):
        raise ExplanationError("pass the threshold as a string or Fraction, not a float")
    try:
        d = Fraction(delta.strip()) if isinstance(delta, str) else Fraction(delta)
    except (ValueError, ZeroDivisionError) as exc:
        raise ExplanationError(f"cannot parse threshold {delta!r}") from exc
    if not 0 <= d <= 1:
        raise ExplanationError(f"threshold {d} outside [0, 1]")
    return d


def _as_instance(backend: Backend, v) -> Instance:
    return v if isinstance(v, Instance) else Instance.of(backend, v)


def _counts(backend: Backend, inst: Instance, fixed) -> CountPair:
    fixed = backend.meta.check_features(fixed)
    return backend.count(inst.values, fixed, inst.predicted_class)


def precision(backend: Backend, v, fixed) -> Fraction:
    inst = _as_instance(backend, v)
    return _counts(backend, inst, fixed).precision


def _holds(cp: CountPair, delta: Fraction) -> bool:
    # target/total >= p/q  <=>  target*q >= p*total
    return cp.target * delta.denominator >= delta.numerator * cp.total


def is_weak_paxp(backend: Backend, v, fixed, delta) -> bool:
    inst = _as_instance(backend, v)
    return _holds(_counts(backend, inst, fixed), parse_delta(delta))


def is_weak_axp(backend: Backend, v, fixed) -> bool:
    return is_weak_paxp(backend, v, fixed, Fraction(1))


# ---------------------------------------------------------------------------
# removal orders


def _order_lexicographic(backend, inst, seed, delta):
    return sorted(seed)


def _order_precision_loss(backend, inst, seed, delta):
    # Least important first: smallest precision drop when the feature is
    # freed. Ties go to the higher index (tests nearer the leaves in trees).
    drops = {j: precision(backend, inst, seed - {j}) for j in seed}
    return sorted(seed, key=lambda j: (-drops[j], -j))


ORDER_POLICIES: dict[str, Callable] = {
    "lex": _order_lexicographic,
    "precision-loss": _order_precision_loss,
}


def resolve_order(backend: Backend, v, seed, order=None, delta=Fraction(1)) -> list[int]:
    """Turn ``order`` (None, a policy name, or a feature sequence) into a list."""
    inst = _as_instance(backend, v)
    seed = frozenset(seed)
    if order is None:
        order = "precision-loss"
    if isinstance(order, str):
        try:
            policy = ORDER_POLICIES[order]
        except KeyError:
            raise ExplanationError(f"unknown order policy {order!r}") from None
        return list(policy(backend, inst, seed, delta))
    seq = [j for j in order if j in seed]
    if len(set(seq)) != len(seq):
        raise ExplanationError("removal order repeats a feature")
    missing = seed - set(seq)
    if missing:
        raise ExplanationError(f"removal order misses features {sorted(missing)}")
    return seq


# ---------------------------------------------------------------------------
# deletion


def lm_paxp(backend: Backend, v, seed=None, order=None, delta=Fraction(1), *,
            check_seed: bool = True, fixpoint: bool = False) -> frozenset:
    """A weak PAXp inside ``seed`` obtained by deletion.

    One pass tries each feature of ``seed`` once, in ``order``, and drops it
    when the rest is still a weak PAXp (|seed| evaluations).  Because the
    predicate is not monotone, a feature kept early in the pass can become
    removable after later deletions; ``fixpoint=True`` repeats the pass over
    the survivors until nothing changes, which guarantees local minimality.
    """
    delta = parse_delta(delta)
    inst = _as_instance(backend, v)
    seed = backend.meta.all_features if seed is None else backend.meta.check_features(seed)
    if check_seed and not is_weak_paxp(backend, inst, seed, delta):
        raise ContractViolation("seed is not a weak PAXp at the requested threshold")
    current = set(seed)
    pending = resolve_order(backend, inst, seed, order, delta)
    while pending:
        removed = False
        for j in pending:
            candidate = frozenset(current - {j})
            if is_weak_paxp(backend, inst, candidate, delta):
                current.discard(j)
                removed = True
        if not (fixpoint and removed):
            break
        pending = [j for j in pending if j in current]
    return frozenset(current)


def axp(backend: Backend, v, order=None, seed=None) -> frozenset:
    """Subset-minimal AXp (deletion at threshold 1; the predicate is monotone)."""
    return lm_paxp(backend, v, seed=seed, order=order, delta=Fraction(1))


# ---------------------------------------------------------------------------
# exact minimum-size search


@dataclass
class _SearchStats:
    evaluations: int = 0
    pruned: int = 0


@dataclass
class _SizedSearch:
    backend: Backend
    inst: Instance
    delta: Fraction
    universe: list[int]
    stats: _SearchStats = field(default_factory=_SearchStats)

    def _bound_fails(self, chosen: frozenset, start: int, remaining: int) -> bool:
        # Sound prune: target models only shrink as features get fixed, while
        # fixing `remaining` more features divides the denominator by at most
        # the product of the largest available domain sizes.
        if remaining == 0:
            return False
        cp = _counts(self.backend, self.inst, chosen)
        sizes = sorted(
            (self.backend.meta.domain_size(j) for j in self.universe[start:]), reverse=True
        )
        shrink = math.prod(sizes[:remaining])
        return cp.target * shrink * self.delta.denominator < self.delta.numerator * cp.total

    def first_of_size(self, k: int) -> frozenset | None:
        """First weak PAXp with exactly ``k`` features, lexicographic order."""
        n = len(self.universe)
        if k > n:
            return None

        def dfs(start: int, chosen: frozenset):
            remaining = k - len(chosen)
            if remaining == 0:
                self.stats.evaluations += 1
                if _holds(_counts(self.backend, self.inst, chosen), self.delta):
                    return chosen
                return None
            if self._bound_fails(chosen, start, remaining):
                self.stats.pruned += 1
                return None
            for pos in range(start, n - remaining + 1):
                found = dfs(pos + 1, chosen | {self.universe[pos]})
                if found is not None:
                    return found
            return None

        return dfs(0, frozenset())

    def first_up_to(self, k: int) -> frozenset | None:
        for size in range(0, min(k, len(self.universe)) + 1):
            found = self.first_of_size(size)
            if found is not None:
                return found
        return None


def find_weak_paxp(backend: Backend, v, universe, delta, max_size: int) -> frozenset | None:
    """A smallest weak PAXp inside ``universe`` with at most ``max_size`` features."""
    inst = _as_instance(backend, v)
    search = _SizedSearch(backend, inst, parse_delta(delta),
                          sorted(backend.meta.check_features(universe)))
    return search.first_up_to(max_size)


def min_paxp(backend: Backend, v, universe=None, delta=Fraction(1)) -> frozenset:
    """Minimum-cardinality weak PAXp inside ``universe`` (hence a PAXp).

    Among equal-size solutions the lexicographically first is returned.
    """
    delta = parse_delta(delta)
    inst = _as_instance(backend, v)
    universe = (backend.meta.all_features if universe is None
                else backend.meta.check_features(universe))
    if not is_weak_paxp(backend, inst, universe, delta):
        raise ContractViolation("universe is not a weak PAXp at the requested threshold")
    search = _SizedSearch(backend, inst, delta, sorted(universe))
    found = search.first_up_to(len(universe))
    assert found is not None  # the universe itself qualifies
    return found


def is_subset_minimal(backend: Backend, v, fixed, delta) -> bool:
    """True iff no proper subset of ``fixed`` is a weak PAXp.

    The predicate is not monotone, so every proper subset is a candidate;
    features already universal stay universal.
    """
    delta = parse_delta(delta)
    inst = _as_instance(backend, v)
    fixed = backend.meta.check_features(fixed)
    if not is_weak_paxp(backend, inst, fixed, delta):
        raise ContractViolation("set is not a weak PAXp at the requested threshold")
    if not fixed:
        return True
    search = _SizedSearch(backend, inst, delta, sorted(fixed))
    return search.first_up_to(len(fixed) - 1) is None


def is_lm_paxp(backend: Backend, v, fixed, delta) -> bool:
    inst = _as_instance(backend, v)
    fixed = frozenset(fixed)
    if not is_weak_paxp(backend, inst, fixed, delta):
        return False
    return not any(is_weak_paxp(backend, inst, fixed - {j}, delta) for j in fixed)
