"""Exact small divisors ``sum_k lambda_{j_k}`` and exhaustive positivity surveys."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from .index_sets import (
    DEFAULT_CEILING,
    IndexTuple,
    TangentialSet,
    enumerate_admissible,
    is_normal_pairing,
)

ADMISSIBLE = {
    6: ("D0", "D1", "D2"),
    10: ("D0'", "D1'"),
    14: ("D0''",),
}


@lru_cache(maxsize=1 << 16)
def _lam(j: int) -> Fraction:
    return Fraction(j, 1 + j * j)


def divisor(t: IndexTuple | Sequence[int]) -> Fraction:
    entries = t.entries if isinstance(t, IndexTuple) else tuple(t)
    if any(j == 0 for j in entries):
        raise ValueError("divisor undefined for the zero mode")
    return sum((_lam(j) for j in entries), Fraction(0))


@dataclass(frozen=True)
class TailCertificate:
    """Extension of a Delta_2 survey to non-S entries beyond ``jmax``.

    For an S-pattern with momentum ``s`` the remaining pair satisfies
    ``j5 + j6 = -s``; once one of them leaves ``[-jmax, jmax]`` both exceed
    ``jtail = jmax + 1 - |s|`` in modulus, have opposite signs, and contribute
    at most ``1/jtail`` to the divisor.
    """

    patterns: int
    certified: int
    uncovered: list
    lower_bound: Fraction | None


@dataclass(frozen=True)
class DivisorReport:
    order: int
    labels: tuple
    n1: int
    n2: int
    jmax: int
    min_abs_divisor: Fraction | None
    witness: tuple | None
    tuples_checked: int
    zero_divisor_tuples: list = field(default_factory=list)
    tail: TailCertificate | None = None

    @property
    def positive(self) -> bool:
        return not self.zero_divisor_tuples and self.min_abs_divisor is not None and self.min_abs_divisor > 0

    def to_json(self) -> dict:
        out = {
            "order": self.order,
            "labels": list(self.labels),
            "n1": self.n1,
            "n2": self.n2,
            "jmax": self.jmax,
            "min_divisor": _rat(self.min_abs_divisor),
            "witness": list(self.witness) if self.witness else None,
            "zeros": [list(z) for z in self.zero_divisor_tuples],
            "tuples_checked": self.tuples_checked,
        }
        if self.tail is not None:
            out["tail"] = {
                "patterns": self.tail.patterns,
                "certified": self.tail.certified,
                "uncovered": [list(p) for p in self.tail.uncovered],
                "lower_bound": _rat(self.tail.lower_bound),
            }
        return out


def _rat(q: Fraction | None):
    if q is None:
        return None
    return {"num": str(q.numerator), "den": str(q.denominator)}


def survey_min_divisor(
    order: int,
    labels: Iterable[str] | None,
    S: TangentialSet,
    jmax: int,
    *,
    non_s_jmax: int | None = None,
    ceiling: int = DEFAULT_CEILING,
    max_zeros: int = 1000,
) -> DivisorReport:
    """Exact minimum of ``|divisor|`` over the non-normal tuples of the given classes."""
    labels = tuple(ADMISSIBLE[order] if labels is None else labels)
    best: Fraction | None = None
    witness = None
    zeros: list = []
    count = 0
    for t in enumerate_admissible(
        order, labels, S, jmax, normal=False, non_s_jmax=non_s_jmax, ceiling=ceiling
    ):
        count += 1
        d = divisor(t)
        if d == 0:
            if len(zeros) < max_zeros:
                zeros.append(t)
            continue
        a = abs(d)
        if best is None or a < best:
            best, witness = a, t
    if zeros:
        best, witness = Fraction(0), zeros[0]
    nb = jmax if non_s_jmax is None else min(jmax, non_s_jmax)
    tail = tail_certificate(S, nb, best) if order == 6 and "D2" in labels and best else None
    return DivisorReport(order, labels, S.n1, S.n2, nb, best, witness, count, zeros, tail)


def tail_certificate(S: TangentialSet, jmax: int, found_min: Fraction | None = None) -> TailCertificate:
    """Check every Delta_2 S-pattern against the ``1/jtail`` tail bound."""
    patterns = certified = 0
    uncovered = []
    lower: Fraction | None = None
    for sp in combinations_with_replacement(S.values, 4):
        if is_normal_pairing(sp):
            # j5 = -j6 then, so the whole tuple pairs up
            continue
        patterns += 1
        s = sum(sp)
        jtail = jmax + 1 - abs(s)
        d = abs(divisor(sp))
        if jtail > 0 and d > Fraction(1, jtail):
            certified += 1
            b = d - Fraction(1, jtail)
            lower = b if lower is None or b < lower else lower
        else:
            uncovered.append(sp)
    if found_min is not None and lower is not None:
        lower = min(lower, found_min)
    return TailCertificate(patterns, certified, uncovered, lower)


def case_i1_pattern(t: Sequence[int], S: TangentialSet) -> bool:
    """Cancelling S-pair plus four remaining entries split one/three in sign."""
    c = Counter(t)
    for a in (S.n1, S.n2):
        if c[a] and c[-a]:
            rest = list(t)
            rest.remove(a)
            rest.remove(-a)
            pos = sum(1 for j in rest if j > 0)
            if pos in (1, 3):
                return True
    return False


def case_i1_bound(S: TangentialSet) -> Fraction:
    return Fraction(2 * S.n2, 1 + S.n2 * S.n2)


def check_case_i1(S: TangentialSet, jmax: int) -> tuple[int, list]:
    """Count matching admissible order-6 tuples and list any that violate the bound."""
    bound = case_i1_bound(S)
    matched = 0
    bad = []
    for t in enumerate_admissible(6, ADMISSIBLE[6], S, jmax, normal=False):
        if case_i1_pattern(t, S):
            matched += 1
            if abs(divisor(t)) < bound:
                bad.append(t)
    return matched, bad


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def discriminant_first(n1: int) -> int:
    return (n1 * n1 - 27) ** 2 - 720


def discriminant_second(n1: int, r: int) -> int:
    c = 2 * r * r - 1
    return (n1 * n1 - c) ** 2 - c * c + 1


def discriminant_square_checks(n1: int, r: int | None = None) -> bool:
    """True iff the relevant discriminant is a perfect square.

    ``r is None`` selects ``(n1^2 - 27)^2 - 720``; otherwise
    ``(n1^2 - (2r^2 - 1))^2 - (2r^2 - 1)^2 + 1`` with ``r`` in {2, 3}.
    """
    if r is None:
        if n1 < 20:
            raise ValueError("first discriminant form requires n1 >= 20")
        return is_square(discriminant_first(n1))
    if r not in (2, 3):
        raise ValueError("second discriminant form requires r in {2, 3}")
    return is_square(discriminant_second(n1, r))
