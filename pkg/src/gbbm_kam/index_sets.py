"""Index tuples of orders 6, 10 and 14 and their classification relative to
the tangential set ``S = {+-n1, +-n2}``.

Tuples are handled through their canonical (non-decreasing) representative;
sums over ordered tuples carry the multinomial multiplicity explicitly.
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Sequence

ORDERS = (6, 10, 14)

# label -> (order, allowed non-S counts); ``None`` upper bound means "or more"
LABELS = {
    "D0": (6, 0, 0),
    "D1": (6, 1, 1),
    "D2": (6, 2, 2),
    "D3": (6, 3, None),
    "D0'": (10, 0, 0),
    "D1'": (10, 1, 1),
    "D2'": (10, 2, None),
    "D0''": (14, 0, 0),
    "D1''": (14, 1, None),
}

DEFAULT_CEILING = 10**9


class ResourceLimitError(RuntimeError):
    """Projected enumeration exceeds the configured ceiling."""


@dataclass(frozen=True)
class TangentialSet:
    n1: int
    n2: int

    def __post_init__(self):
        if not (1 <= self.n1 < self.n2):
            raise ValueError(f"need 1 <= n1 < n2, got ({self.n1}, {self.n2})")

    @property
    def values(self) -> tuple[int, int, int, int]:
        return (-self.n2, -self.n1, self.n1, self.n2)

    def __contains__(self, j: int) -> bool:
        return abs(j) == self.n1 or abs(j) == self.n2

    def warn_if_small(self) -> None:
        if self.n1 < 20:
            warnings.warn(
                f"n1={self.n1} < 20: positivity of order-6 divisors is only established for n1 >= 20",
                stacklevel=2,
            )


@dataclass(frozen=True)
class IndexTuple:
    entries: tuple[int, ...]

    def __post_init__(self):
        ent = tuple(int(j) for j in self.entries)
        if len(ent) not in ORDERS:
            raise ValueError(f"tuple length {len(ent)} not in {ORDERS}")
        if any(j == 0 for j in ent):
            raise ValueError("index tuples may not contain the zero mode")
        object.__setattr__(self, "entries", ent)

    @property
    def order(self) -> int:
        return len(self.entries)

    @property
    def momentum(self) -> int:
        return sum(self.entries)

    def canonical(self) -> "IndexTuple":
        return IndexTuple(tuple(sorted(self.entries)))


@dataclass(frozen=True)
class TupleClass:
    order: int
    non_s_count: int
    normal: bool
    label: str


def is_normal_pairing(entries: Sequence[int] | IndexTuple) -> bool:
    if isinstance(entries, IndexTuple):
        entries = entries.entries
    c = Counter(entries)
    return all(c[a] == c.get(-a, 0) for a in c)


def non_s_count(entries: Iterable[int], S: TangentialSet) -> int:
    return sum(1 for j in entries if j not in S)


def label_for(order: int, k: int) -> str:
    for name, (o, lo, hi) in LABELS.items():
        if o == order and k >= lo and (hi is None or k <= hi):
            return name
    raise ValueError(f"no label for order {order}")


def classify(t: IndexTuple | Sequence[int], S: TangentialSet) -> TupleClass:
    if not isinstance(t, IndexTuple):
        t = IndexTuple(tuple(t))
    k = non_s_count(t.entries, S)
    return TupleClass(t.order, k, is_normal_pairing(t.entries), label_for(t.order, k))


def multiplicity(entries: Sequence[int]) -> int:
    """Number of ordered tuples with the same multiset of entries."""
    out = math.factorial(len(entries))
    for c in Counter(entries).values():
        out //= math.factorial(c)
    return out


def _label_counts(order: int, labels: Iterable[str]) -> list[int]:
    ks: set[int] = set()
    for name in labels:
        if name not in LABELS:
            raise ValueError(f"unknown label {name!r}")
        o, lo, hi = LABELS[name]
        if o != order:
            raise ValueError(f"label {name!r} belongs to order {o}, not {order}")
        ks.update(range(lo, (order if hi is None else hi) + 1))
    return sorted(ks)


def projected_count(order: int, labels: Iterable[str], S: TangentialSet, jmax: int) -> int:
    """Upper estimate of the candidate space visited by ``enumerate_admissible``."""
    total = 0
    width = 2 * jmax
    for k in _label_counts(order, labels):
        n_s = math.comb(4 + order - k - 1, order - k)
        free = math.comb(width + k - 2, k - 1) if k >= 1 else 1
        total += n_s * free
    return total


def _nondecreasing_with_sum(k: int, target: int, lo: int, jmax: int, S: TangentialSet) -> Iterator[tuple]:
    """Non-decreasing non-S ``k``-tuples, entries in ``[lo, jmax]``, summing to ``target``."""
    if k == 1:
        j = target
        if lo <= j <= jmax and j != 0 and j not in S:
            yield (j,)
        return
    # first entry a: a >= lo, and k*a <= target (non-decreasing), rest must fit under jmax
    a_min = max(lo, target - (k - 1) * jmax)
    a_max = math.floor(target / k)
    for a in range(a_min, a_max + 1):
        if a == 0 or a in S:
            continue
        for rest in _nondecreasing_with_sum(k - 1, target - a, a, jmax, S):
            yield (a,) + rest


def enumerate_admissible(
    order: int,
    labels: Iterable[str],
    S: TangentialSet,
    jmax: int,
    *,
    normal: bool | None = None,
    non_s_jmax: int | None = None,
    ceiling: int = DEFAULT_CEILING,
) -> Iterator[tuple[int, ...]]:
    """Canonical zero-momentum tuples with ``|j| <= jmax`` in the given classes.

    ``normal`` filters on the pairing property (``None`` keeps both).
    ``non_s_jmax`` tightens the bound on non-S entries only, which keeps
    classes with many free entries searchable at large ``n2``.
    Order-14 enumeration is restricted to the all-S class.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    if jmax < S.n2:
        raise ValueError(f"jmax={jmax} must be >= n2={S.n2}")
    labels = list(labels)
    ks = _label_counts(order, labels)
    if order == 14 and any(k > 0 for k in ks):
        raise ValueError("order-14 enumeration is only provided for the all-S class D0''")
    nb = jmax if non_s_jmax is None else min(jmax, non_s_jmax)
    est = projected_count(order, labels, S, nb)
    if est > ceiling:
        raise ResourceLimitError(f"projected enumeration {est} exceeds ceiling {ceiling}")
    for k in ks:
        for s_part in combinations_with_replacement(S.values, order - k):
            s = sum(s_part)
            for ns_part in ([()] if k == 0 else _nondecreasing_with_sum(k, -s, -nb, nb, S)):
                if k == 0 and s != 0:
                    continue
                t = tuple(sorted(s_part + ns_part))
                if normal is not None and is_normal_pairing(t) != normal:
                    continue
                yield t
