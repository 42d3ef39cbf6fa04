"""Independent reference computations used to cross-check the main engines.

Nothing here shares code paths with the production modules beyond the
definition of ``lambda_j`` and ``delta_j``: sums run over ordered tuples,
classification is re-derived locally, and bracket contractions are carried
out through the chain rule on polynomials in the four tangential variables.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Mapping

import numpy as np


def _lam(j: int) -> Fraction:
    return Fraction(j, 1 + j * j)


def _dsq(j: int) -> Fraction:
    return Fraction(abs(j), 1 + j * j)


def _paired(t) -> bool:
    return sorted(t) == sorted(-x for x in t)


# ---------------------------------------------------------------------------
# sextic gradient by direct quintuple sums


def gradient_direct(z: Mapping[int, complex], jmax: int) -> dict[int, complex]:
    """``dG/dz_{-j} = delta_j / (20 pi^2) * sum_{j1+..+j5=j} prod delta z``."""
    v = {k: math.sqrt(abs(k) / (1 + k * k)) * complex(z.get(k, 0)) for k in range(-jmax, jmax + 1) if k}
    keys = [k for k in v if v[k] != 0]
    out = {}
    for j in list(range(-jmax, 0)) + list(range(1, jmax + 1)):
        total = 0j
        for j1, j2, j3, j4 in product(keys, repeat=4):
            j5 = j - j1 - j2 - j3 - j4
            if j5 in v and v[j5] != 0:
                total += v[j1] * v[j2] * v[j3] * v[j4] * v[j5]
        out[j] = math.sqrt(abs(j) / (1 + j * j)) / (20 * math.pi**2) * total
    return out


# ---------------------------------------------------------------------------
# enumeration by direct filtering


def ordered_counts_order6(n1: int, n2: int, jmax: int) -> Counter:
    """canonical tuple -> number of ordered zero-momentum 6-tuples (full product, last entry solved)."""
    vals = [j for j in range(-jmax, jmax + 1) if j]
    inrange = set(vals)
    out: Counter = Counter()
    for head in product(vals, repeat=5):
        last = -sum(head)
        if last in inrange:
            out[tuple(sorted(head + (last,)))] += 1
    return out


def multiset_counts(order: int, jmax: int) -> Counter:
    """canonical tuple -> ordered count, via multisets and multinomials."""
    vals = [j for j in range(-jmax, jmax + 1) if j]
    out: Counter = Counter()
    for t in combinations_with_replacement(vals, order):
        if sum(t) == 0:
            m = math.factorial(order)
            for c in Counter(t).values():
                m //= math.factorial(c)
            out[t] = m
    return out


def ordered_count_by_nonS(order: int, n1: int, n2: int, jmax: int) -> dict[int, int]:
    """Number of ordered zero-momentum tuples with exactly k non-S entries, by dynamic programming."""
    S = {n1, -n1, n2, -n2}
    vals = [j for j in range(-jmax, jmax + 1) if j]
    table = {(0, 0): 1}
    for _ in range(order):
        nxt: dict = defaultdict(int)
        for (s, k), c in table.items():
            for j in vals:
                nxt[(s + j, k + (j not in S))] += c
        table = nxt
    return {k: c for (s, k), c in table.items() if s == 0}


def classify_local(t, n1: int, n2: int) -> tuple[int, bool]:
    S = {n1, -n1, n2, -n2}
    return sum(1 for j in t if j not in S), _paired(t)


# ---------------------------------------------------------------------------
# normal-form coefficients by chain-rule contraction
#
# Polynomials in (z_{-n2}, z_{-n1}, z_{n1}, z_{n2}) are dicts exponent-4-tuple -> Fraction.
# For a monomial m the factor prod_{k in m} delta_k is left implicit throughout
# and restored at the end; likewise each sextic factor carries 1/pi^2 and each
# generating-function factor a -i, both restored from the bracket structure.


def _pmul(a: dict, b: dict) -> dict:
    out: dict = defaultdict(Fraction)
    for ea, ca in a.items():
        for eb, cb in b.items():
            out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    return out


def _padd(acc: dict, p: dict, scale) -> None:
    for e, c in p.items():
        acc[e] += c * scale


class _Contractor:
    def __init__(self, n1: int, n2: int, jmax: int):
        self.n1, self.n2, self.jmax = n1, n2, jmax
        self.Svals = (-n2, -n1, n1, n2)
        self.pos = {v: i for i, v in enumerate(self.Svals)}
        self.sums5 = sorted({sum(t) for t in product(self.Svals, repeat=5)})
        self._cache: dict = {}

    def _weight(self, t, kind: str):
        """Per-ordered-tuple weight (over 1/120) of each piece of the sextic part."""
        k, paired = classify_local(t, self.n1, self.n2)
        if any(abs(j) > self.jmax for j in t):
            return Fraction(0)
        if kind == "F":
            if paired or k > 2:
                return Fraction(0)
            return 1 / sum((_lam(j) for j in t), Fraction(0))
        # weights of Gbar, Gtilde, Ghat inside the combination
        wbar, wtil, what = kind_weights[kind]
        if k > 2:
            return what
        return wbar if paired else wtil

    def d1(self, j: int, kind: str) -> dict:
        """``d/dz_j`` restricted to tangential variables (6 positions)."""
        key = ("d1", j, kind)
        if key in self._cache:
            return self._cache[key]
        out: dict = defaultdict(Fraction)
        for rest in product(self.Svals, repeat=5):
            if sum(rest) != -j:
                continue
            w = self._weight((j,) + rest, kind)
            if w:
                e = [0, 0, 0, 0]
                for x in rest:
                    e[self.pos[x]] += 1
                out[tuple(e)] += 6 * w / 120
        self._cache[key] = out
        return out

    def d2(self, j: int, k: int, kind: str) -> dict:
        """``d^2/dz_j dz_k`` restricted to tangential variables (30 ordered position pairs)."""
        key = ("d2", j, k, kind)
        if key in self._cache:
            return self._cache[key]
        out: dict = defaultdict(Fraction)
        for rest in product(self.Svals, repeat=4):
            if sum(rest) != -j - k:
                continue
            w = self._weight((j, k) + rest, kind)
            if w:
                e = [0, 0, 0, 0]
                for x in rest:
                    e[self.pos[x]] += 1
                out[tuple(e)] += 30 * w / 120
        self._cache[key] = out
        return out

    def modes(self):
        return [j for j in self.sums5 if j != 0 and abs(j) <= self.jmax]


kind_weights = {
    "R": (Fraction(1), Fraction(1, 2), Fraction(1)),
    "T": (Fraction(1, 2), Fraction(1, 3), Fraction(1, 2)),
}


def _sgn(j: int) -> int:
    return 1 if j > 0 else -1


def _action_readout(poly: dict, n1: int, n2: int, k: int) -> tuple[list[Fraction], dict]:
    """Coefficients of ``|z_{n1}|^{2(k-m)}|z_{n2}|^{2m}`` with the implicit delta product restored."""
    d1, d2 = _dsq(n1), _dsq(n2)
    coeffs = []
    for m in range(k + 1):
        e = (m, k - m, k - m, m)
        coeffs.append(poly.get(e, Fraction(0)) * d1 ** (k - m) * d2**m)
    leftover = {e: c for e, c in poly.items() if c != 0 and not (e[0] == e[3] and e[1] == e[2])}
    return coeffs, leftover


def rbar_oracle(n1: int, n2: int, jmax: int) -> tuple[list[Fraction], dict]:
    """``R_m`` (as rationals multiplying ``pi^-4``) and any non-normal all-S leftovers.

    ``Rbar = i sum_j sgn(j) dX/dz_j dF/dz_{-j}`` on tangential states with
    ``X = Gbar + Gtilde/2 + Ghat``; the ``i`` cancels against the ``-i`` of
    ``F`` and the two implicit ``delta_j`` give ``delta_j^2``.
    """
    C = _Contractor(n1, n2, jmax)
    acc: dict = defaultdict(Fraction)
    for j in C.modes():
        _padd(acc, _pmul(C.d1(j, "R"), C.d1(-j, "F")), _sgn(j) * _dsq(j))
    return _action_readout(acc, n1, n2, 5)


def tbar_oracle(n1: int, n2: int, jmax: int) -> tuple[list[Fraction], dict]:
    """``T_m`` (multiplying ``pi^-6``) from ``{{X, F}, F}`` with ``X = (Gbar + Ghat)/2 + Gtilde/3``.

    ``d_j {X, F} = i sum_k sgn(k) [d_j d_k X d_{-k} F + d_k X d_j d_{-k} F]``,
    then ``T = i sum_j sgn(j) d_j{X,F} d_{-j} F``; the phases multiply to
    ``i * i * (-i) * (-i) = 1``.
    """
    C = _Contractor(n1, n2, jmax)
    modes = C.modes()
    acc: dict = defaultdict(Fraction)
    for j in modes:
        fj = C.d1(-j, "F")
        if not fj:
            continue
        dY: dict = defaultdict(Fraction)
        for k in modes:
            w = _sgn(k) * _dsq(k)
            _padd(dY, _pmul(C.d2(j, k, "T"), C.d1(-k, "F")), w)
            _padd(dY, _pmul(C.d1(k, "T"), C.d2(j, -k, "F")), w)
        _padd(acc, _pmul(dY, fj), _sgn(j) * _dsq(j))
    return _action_readout(acc, n1, n2, 7)


def gbar_oracle(n1: int, n2: int, j: int) -> dict[str, Fraction]:
    """Closed-form sextic normal-form coefficients (rational part, multiply by ``pi^-2``)."""
    l1, l2, lj = _lam(n1), _lam(n2), _lam(abs(j))
    return {
        "n1^6": l1**3 / 6,
        "n1^4 n2^2": Fraction(3, 2) * l1**2 * l2,
        "n1^4 j^2": Fraction(3, 2) * l1**2 * lj,
        "n1^2 n2^2 j^2": 6 * l1 * l2 * lj,
    }


def lin_flow(z0: np.ndarray, lam: np.ndarray, t: float) -> np.ndarray:
    return z0 * np.exp(-1j * lam * t)
