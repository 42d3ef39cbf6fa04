from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbbm_kam.divisor_analysis import (
    ADMISSIBLE,
    case_i1_bound,
    check_case_i1,
    discriminant_first,
    discriminant_square_checks,
    divisor,
    survey_min_divisor,
    tail_certificate,
)
from gbbm_kam.index_sets import TangentialSet, enumerate_admissible

BIG = TangentialSet(50, 2500)

signed = st.integers(min_value=-10**6, max_value=10**6).filter(lambda j: j != 0)


def test_divisor_examples():
    assert divisor((1, -2, -2, 3, 7, -7)) == 0
    assert divisor((4, -4, 9, -9, 13, -13)) == 0
    assert divisor((1, 1, 1, -3, 5, -5)) == Fraction(6, 5)
    with pytest.raises(ValueError):
        divisor((1, 0, -1, 2, -2, 3))


@pytest.mark.parametrize("n", [4, 7, 50, 100])
def test_resonant_family(n):
    assert divisor((1, -2, -2, 3, n, -n)) == 0


@given(st.lists(signed, min_size=3, max_size=7))
def test_paired_divisor_is_zero(half):
    assert divisor(tuple(half) + tuple(-j for j in half)) == 0


@given(st.lists(signed, min_size=6, max_size=6), st.lists(signed, min_size=4, max_size=4))
def test_divisor_additive(a, b):
    assert divisor(a + b) == divisor(a) + sum(Fraction(j, 1 + j * j) for j in b)


# ---------------------------------------------------------------------------
# frozen survey values


@pytest.mark.parametrize(
    "n1,n2,count,minimum,witness",
    [
        (3, 7, 848, Fraction(63, 12025), (-7, -7, -7, 6, 7, 8)),
        (5, 13, 1648, Fraction(429, 485605), (-13, -13, -13, 12, 13, 14)),
    ],
)
def test_order6_survey_small(n1, n2, count, minimum, witness):
    rep = survey_min_divisor(6, None, TangentialSet(n1, n2), 5 * n2)
    assert rep.tuples_checked == count
    assert rep.min_abs_divisor == minimum
    assert rep.witness == witness
    assert abs(divisor(rep.witness)) == rep.min_abs_divisor
    assert rep.positive and rep.zero_divisor_tuples == []
    assert rep.tail.patterns == rep.tail.certified == 32


def test_order6_survey_big():
    rep = survey_min_divisor(6, None, BIG, 12500)
    assert rep.tuples_checked == 339524
    assert rep.zero_divisor_tuples == []
    assert rep.min_abs_divisor == Fraction(7812495000, 61035166015631250001)
    assert rep.witness == (-2500, -2500, -2500, 2499, 2500, 2501)
    assert rep.tail.certified == rep.tail.patterns == 32 and rep.tail.uncovered == []
    assert rep.tail.lower_bound > 0


def test_order10_and_14_surveys_big():
    r10 = survey_min_divisor(10, None, BIG, 12500)
    assert r10.tuples_checked == 168 and r10.zero_divisor_tuples == []
    assert r10.min_abs_divisor == Fraction(375000000000, 351562562500001)
    r14 = survey_min_divisor(14, None, BIG, 12500)
    assert r14.zero_divisor_tuples == [] and r14.tuples_checked == 0


def test_widened_to_delta3_finds_resonant_family():
    labels = ADMISSIBLE[6] + ("D3",)
    rep = survey_min_divisor(6, labels, BIG, 2500, non_s_jmax=10)
    assert rep.min_abs_divisor == 0 and not rep.positive
    assert (-7, -2, -2, 1, 3, 7) in rep.zero_divisor_tuples
    assert all(divisor(z) == 0 for z in rep.zero_divisor_tuples)


def test_report_json_round_trip():
    rep = survey_min_divisor(6, None, TangentialSet(3, 7), 35)
    d = json.loads(json.dumps(rep.to_json()))
    assert Fraction(int(d["min_divisor"]["num"]), int(d["min_divisor"]["den"])) == rep.min_abs_divisor
    assert d["zeros"] == [] and d["tuples_checked"] == 848


def test_tail_bound_covers_small_configuration():
    S = TangentialSet(3, 7)
    cert = tail_certificate(S, 35)
    assert cert.certified == cert.patterns and not cert.uncovered


def test_case_i1_bound_holds_big():
    matched, bad = check_case_i1(BIG, 12500)
    assert matched == 124288
    assert bad == []
    assert case_i1_bound(BIG) == Fraction(5000, 6250001)


def test_admissible_minimum_is_exactly_positive_for_each_label():
    for label in ADMISSIBLE[6]:
        for t in enumerate_admissible(6, (label,), TangentialSet(5, 13), 65, normal=False):
            assert divisor(t) != 0


# ---------------------------------------------------------------------------
# discriminants


def test_discriminant_examples():
    assert discriminant_first(50) == 2473**2 - 720 == 6115009
    assert discriminant_square_checks(50) is False
    assert discriminant_square_checks(20) is False


def test_discriminant_sweep():
    assert not any(discriminant_square_checks(n) for n in range(20, 10001))
    assert not any(discriminant_square_checks(n, r) for n in range(20, 10001) for r in (2, 3))


def test_discriminant_preconditions():
    with pytest.raises(ValueError):
        discriminant_square_checks(19)
    with pytest.raises(ValueError):
        discriminant_square_checks(30, 4)
