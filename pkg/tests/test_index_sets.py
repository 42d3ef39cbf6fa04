from __future__ import annotations

import random
from collections import Counter, defaultdict
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbbm_kam import oracles
from gbbm_kam.index_sets import (
    IndexTuple,
    ResourceLimitError,
    TangentialSet,
    classify,
    enumerate_admissible,
    is_normal_pairing,
    multiplicity,
    non_s_count,
)

BIG = TangentialSet(50, 2500)
SMALL = TangentialSet(2, 5)
ORDER6 = ("D0", "D1", "D2", "D3")
ORDER10 = ("D0'", "D1'", "D2'")


def test_normal_pairing_examples():
    assert is_normal_pairing((7, -7, 3, -3, 12, -12))
    assert not is_normal_pairing((1, 1, -1, -1, 2, -3))
    assert is_normal_pairing((5, -5, 5, -5, 2, -2, 9, -9, 1, -1))


def test_classify_examples():
    c = classify((50, -50, 2500, -2500, 7, -7), BIG)
    assert (c.label, c.normal, c.non_s_count) == ("D2", True, 2)
    c = classify((50, 50, 50, 50, -2500, 2300), BIG)
    assert (c.label, c.normal) == ("D1", False)
    c = classify((1, -2, -2, 3, 7, -7), BIG)
    assert (c.label, c.normal, c.non_s_count) == ("D3", False, 6)


def test_higher_order_labels():
    assert classify((50, -50) * 5, BIG).label == "D0'"
    assert classify((50, -50) * 4 + (3, -3), BIG).label == "D2'"
    assert classify((2500, -2500) * 7, BIG).label == "D0''"
    assert classify((2500, -2500) * 6 + (50, -50), BIG).label == "D0''"
    assert classify((2500, -2500) * 6 + (1, -1), BIG).label == "D1''"


def test_index_tuple_validation():
    with pytest.raises(ValueError):
        IndexTuple((1, 2, 3))
    with pytest.raises(ValueError):
        IndexTuple((1, 0, -1, 2, -2, 0))
    assert IndexTuple((3, -1, -2, 5, -5, 1)).momentum == 1
    with pytest.raises(ValueError):
        TangentialSet(5, 5)


def test_small_n1_warns():
    with pytest.warns(UserWarning):
        TangentialSet(5, 13).warn_if_small()


signed = st.integers(min_value=-30, max_value=30).filter(lambda j: j != 0)


@given(st.lists(signed, min_size=6, max_size=6), st.randoms())
def test_classification_permutation_invariant(entries, rnd):
    S = TangentialSet(3, 7)
    shuffled = list(entries)
    rnd.shuffle(shuffled)
    assert classify(entries, S) == classify(shuffled, S)
    assert is_normal_pairing(entries) == is_normal_pairing(shuffled)


@given(st.lists(signed, min_size=1, max_size=7))
def test_paired_tuples_are_normal(half):
    assert is_normal_pairing(tuple(half) + tuple(-j for j in half))


def test_delta0_small_example():
    tuples = list(enumerate_admissible(6, ("D0",), SMALL, 5))
    ordered = [multiplicity(t) for t in tuples]
    assert sum(ordered) == 400
    assert sorted(ordered) == sorted([20, 180, 180, 20])
    assert all(is_normal_pairing(t) for t in tuples)
    assert list(enumerate_admissible(6, ("D0",), SMALL, 5, normal=False)) == []


def test_delta0_prime_all_normal_at_big_s():
    tuples = list(enumerate_admissible(10, ("D0'",), BIG, 2500))
    assert tuples and all(is_normal_pairing(t) for t in tuples)


def test_delta1_contains_example():
    target = tuple(sorted((50, 50, 50, 50, -2500, 2300)))
    assert any(t == target for t in enumerate_admissible(6, ("D1",), BIG, 12500))


@pytest.mark.parametrize("jmax", [5, 6, 8])
def test_order6_matches_cartesian_product(jmax):
    ref = oracles.ordered_counts_order6(SMALL.n1, SMALL.n2, jmax)
    got = {t: multiplicity(t) for t in enumerate_admissible(6, ORDER6, SMALL, jmax)}
    assert got == dict(ref)


@pytest.mark.parametrize("jmax", [5, 6])
def test_order10_matches_multiset_and_dp_oracles(jmax):
    got = Counter({t: multiplicity(t) for t in enumerate_admissible(10, ORDER10, SMALL, jmax)})
    assert got == oracles.multiset_counts(10, jmax)
    by_k: dict = defaultdict(int)
    for t, m in got.items():
        by_k[non_s_count(t, SMALL)] += m
    assert dict(by_k) == oracles.ordered_count_by_nonS(10, SMALL.n1, SMALL.n2, jmax)


def test_order14_all_s_matches_dp():
    got = sum(multiplicity(t) for t in enumerate_admissible(14, ("D0''",), SMALL, 5))
    assert got == oracles.ordered_count_by_nonS(14, SMALL.n1, SMALL.n2, 5)[0]


@pytest.mark.parametrize("labels,order", [(("D1", "D2"), 6), (("D1'",), 10)])
def test_emitted_tuples_are_consistent(labels, order):
    S = TangentialSet(3, 7)
    allowed = {"D1": 1, "D2": 2, "D1'": 1}
    for t in enumerate_admissible(order, labels, S, 20):
        assert sum(t) == 0
        assert list(t) == sorted(t)
        assert max(abs(j) for j in t) <= 20
        assert classify(t, S).label in labels
        assert non_s_count(t, S) in {allowed[l] for l in labels}


def test_non_s_jmax_restricts_free_entries():
    for t in enumerate_admissible(6, ("D3",), BIG, 2500, non_s_jmax=4):
        assert all(abs(j) <= 4 for j in t if j not in BIG)


def test_enumeration_guards():
    with pytest.raises(ValueError):
        list(enumerate_admissible(6, ("D0",), BIG, 100))
    with pytest.raises(ValueError):
        list(enumerate_admissible(14, ("D1''",), SMALL, 10))
    with pytest.raises(ValueError):
        list(enumerate_admissible(8, ("D0",), SMALL, 10))
    with pytest.raises(ResourceLimitError):
        list(enumerate_admissible(6, ORDER6, BIG, 12500, ceiling=10**6))


def test_multiplicity_counts_orderings():
    rnd = random.Random(0)
    for _ in range(50):
        t = [rnd.choice([-2, -1, 1, 2]) for _ in range(6)]
        assert multiplicity(t) == len(set(permutations(t)))
