import random
from fractions import Fraction

import pytest

from paxp import oracle, synth
from paxp.oracle import BudgetExceeded


def test_re_values(dt_re):
    v = (4, 4, 2)
    assert oracle.brute_precision(dt_re, v, {2}) == Fraction(15, 16)
    assert oracle.brute_precision(dt_re, v, {0, 1, 2}) == 1
    assert oracle.brute_precision(dt_re, v, {0, 1, 2}, c="-") == 0
    assert oracle.exhaustive_min_paxp(dt_re, v, delta="93/100") == frozenset({2})
    assert oracle.exhaustive_min_paxp(dt_re, v, delta=0) == frozenset()


def test_two_enumeration_orders_agree():
    rng = random.Random(5)
    for fam in synth.FAMILIES:
        for _ in range(20):
            m = synth.random_model(rng, fam)
            v = synth.random_point(rng, m.meta)
            fixed = synth.random_subset(rng, m.meta)
            assert oracle.brute_precision(m, v, fixed) == oracle.brute_precision(
                m, v, fixed, reverse=True)


def test_oracle_never_counts(dt_re):
    class NoCount:
        meta = dt_re.meta
        classify = staticmethod(dt_re.classify)

        def count(self, *a):
            raise AssertionError("count called")

    assert oracle.brute_precision(NoCount(), (4, 4, 2), {2}) == Fraction(15, 16)
    assert oracle.is_axp_by_enumeration(NoCount(), (4, 4, 2), {0, 2})
    assert not oracle.is_axp_by_enumeration(NoCount(), (4, 4, 2), {0, 1, 2})


def test_budget(dt_re):
    with pytest.raises(BudgetExceeded):
        oracle.brute_precision(dt_re, (4, 4, 2), set(), budget=1)
    assert oracle.brute_precision(dt_re, (4, 4, 2), {0, 1, 2}, budget=1) == 1


def test_universe_limit():
    meta_model = synth.random_obdd(random.Random(0), 17)
    with pytest.raises(BudgetExceeded):
        oracle.exhaustive_min_paxp(meta_model, (0,) * 17)
