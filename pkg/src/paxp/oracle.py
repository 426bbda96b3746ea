"""Brute-force ground truth.

Only ``backend.classify`` is ever called here, never ``backend.count``, so
these functions are an independent check of every counting routine.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from .engine import ExplanationError, Instance, parse_delta

DEFAULT_BUDGET = 2 ** 20
MAX_UNIVERSE = 16


class BudgetExceeded(ExplanationError):
    """The requested enumeration is larger than the allowed budget."""


def completions(meta, v, fixed, reverse: bool = False):
    """Every point agreeing with ``v`` on ``fixed``."""
    fixed = frozenset(fixed)
    free = [i for i in range(meta.feature_count) if i not in fixed]
    if reverse:
        free = free[::-1]
    domains = [meta.domains[i][::-1] if reverse else meta.domains[i] for i in free]
    base = list(v)
    for combo in itertools.product(*domains):
        x = base[:]
        for i, val in zip(free, combo):
            x[i] = val
        yield tuple(x)


def brute_counts(backend, v, fixed, c, budget: int = DEFAULT_BUDGET,
                 reverse: bool = False) -> tuple[int, int]:
    meta = backend.meta
    fixed = meta.check_features(fixed)
    size = meta.universal_size(fixed)
    if size > budget:
        raise BudgetExceeded(f"{size} completions exceed the budget of {budget}")
    hits = total = 0
    for x in completions(meta, v, fixed, reverse):
        total += 1
        if backend.classify(x) == c:
            hits += 1
    return hits, total


def brute_precision(backend, v, fixed, c=None, budget: int = DEFAULT_BUDGET,
                    reverse: bool = False) -> Fraction:
    if c is None:
        c = backend.classify(v)
    hits, total = brute_counts(backend, v, fixed, c, budget, reverse)
    return Fraction(hits, total)


def brute_is_weak_paxp(backend, v, fixed, delta, budget: int = DEFAULT_BUDGET) -> bool:
    return brute_precision(backend, v, fixed, budget=budget) >= parse_delta(delta)


def exhaustive_min_paxp(backend, v, universe=None, delta=Fraction(1),
                        budget: int = DEFAULT_BUDGET) -> frozenset:
    """First weak PAXp when scanning subsets by size, then lexicographically."""
    inst = v if isinstance(v, Instance) else Instance.of(backend, v)
    delta = parse_delta(delta)
    items = sorted(backend.meta.all_features if universe is None else universe)
    if len(items) > MAX_UNIVERSE:
        raise BudgetExceeded(f"universe of {len(items)} features is too large")
    for k in range(len(items) + 1):
        for combo in itertools.combinations(items, k):
            if brute_precision(backend, inst.values, combo, inst.predicted_class, budget) >= delta:
                return frozenset(combo)
    raise ExplanationError("no subset of the universe is a weak PAXp")


def is_axp_by_enumeration(backend, v, fixed, budget: int = DEFAULT_BUDGET) -> bool:
    """Every completion of ``fixed`` keeps the prediction, and none of the
    one-smaller sets does."""
    inst = v if isinstance(v, Instance) else Instance.of(backend, v)
    c = inst.predicted_class
    fixed = frozenset(fixed)

    def sufficient(s):
        hits, total = brute_counts(backend, inst.values, s, c, budget)
        return hits == total

    return sufficient(fixed) and not any(sufficient(fixed - {j}) for j in fixed)


def is_subset_minimal_by_enumeration(backend, v, fixed, delta,
                                     budget: int = DEFAULT_BUDGET) -> bool:
    inst = v if isinstance(v, Instance) else Instance.of(backend, v)
    delta = parse_delta(delta)
    items = sorted(fixed)
    for k in range(len(items)):
        for combo in itertools.combinations(items, k):
            if brute_precision(backend, inst.values, combo, inst.predicted_class, budget) >= delta:
                return False
    return True
