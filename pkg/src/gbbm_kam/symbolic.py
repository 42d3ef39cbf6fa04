"""Exact coefficients of the form  sum  rat * pi^p * i^e * prod delta_j.

Every ``delta_j`` with an even exponent is folded into the rational part via
``delta_j^2 = |j| / (1 + j^2)``, and ``i^2 = -1`` is folded into the sign, so an
atom is keyed by ``(pi_pow, i_pow in {0, 1}, dkey)`` where ``dkey`` is the
sorted tuple of distinct ``|j|`` that still carry an odd ``delta`` power.
Two coefficients are equal iff their atom tables are equal.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

Key = tuple  # (pi_pow, i_pow, dkey)


def _dsq(a: int) -> Fraction:
    return Fraction(a, 1 + a * a)


def merge_delta(d1: tuple, d2: tuple) -> tuple[tuple, Fraction]:
    """Multiply two odd-delta products; shared factors become rationals."""
    if not d1:
        return d2, Fraction(1)
    if not d2:
        return d1, Fraction(1)
    s1, s2 = set(d1), set(d2)
    common = s1 & s2
    factor = Fraction(1)
    for a in common:
        factor *= _dsq(a)
    return tuple(sorted(s1 ^ s2)), factor


def delta_product(entries: Iterable[int]) -> tuple[tuple, Fraction]:
    """Canonical ``(dkey, rational)`` for ``prod_k delta_{j_k}``."""
    counts: dict[int, int] = {}
    for j in entries:
        a = abs(j)
        counts[a] = counts.get(a, 0) + 1
    rat = Fraction(1)
    odd = []
    for a, c in counts.items():
        if c >= 2:
            rat *= _dsq(a) ** (c // 2)
        if c % 2:
            odd.append(a)
    return tuple(sorted(odd)), rat


class SymbolicCoefficient:
    """Immutable exact coefficient; see module docstring for the canonical form."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: dict | None = None):
        self.atoms = {k: v for k, v in (atoms or {}).items() if v != 0}

    @classmethod
    def atom(cls, rat, pi_pow: int = 0, i_pow: int = 0, dkey: tuple = ()) -> "SymbolicCoefficient":
        rat = Fraction(rat)
        i_pow %= 4
        if i_pow >= 2:
            rat = -rat
            i_pow -= 2
        return cls({(pi_pow, i_pow, tuple(dkey)): rat})

    @classmethod
    def zero(cls) -> "SymbolicCoefficient":
        return cls()

    # algebra
    def __add__(self, other: "SymbolicCoefficient") -> "SymbolicCoefficient":
        out = dict(self.atoms)
        for k, v in other.atoms.items():
            out[k] = out.get(k, 0) + v
        return SymbolicCoefficient(out)

    def __neg__(self) -> "SymbolicCoefficient":
        return SymbolicCoefficient({k: -v for k, v in self.atoms.items()})

    def __sub__(self, other: "SymbolicCoefficient") -> "SymbolicCoefficient":
        return self + (-other)

    def __mul__(self, other) -> "SymbolicCoefficient":
        if not isinstance(other, SymbolicCoefficient):
            r = Fraction(other)
            return SymbolicCoefficient({k: v * r for k, v in self.atoms.items()})
        out: dict = {}
        for (p1, e1, d1), r1 in self.atoms.items():
            for (p2, e2, d2), r2 in other.atoms.items():
                dkey, f = merge_delta(d1, d2)
                rat = r1 * r2 * f
                e = e1 + e2
                if e == 2:
                    rat, e = -rat, 0
                k = (p1 + p2, e, dkey)
                out[k] = out.get(k, 0) + rat
        return SymbolicCoefficient(out)

    __rmul__ = __mul__

    def times_i(self, power: int = 1) -> "SymbolicCoefficient":
        power %= 4
        out = {}
        for (p, e, d), r in self.atoms.items():
            e2 = e + power
            sign = 1
            while e2 >= 2:
                e2 -= 2
                sign = -sign
            out[(p, e2, d)] = sign * r
        return SymbolicCoefficient(out)

    def conj(self) -> "SymbolicCoefficient":
        return SymbolicCoefficient({k: (-v if k[1] else v) for k, v in self.atoms.items()})

    # predicates / readout
    def is_zero(self) -> bool:
        return not self.atoms

    def is_real(self) -> bool:
        return all(k[1] == 0 for k in self.atoms)

    def is_delta_free(self) -> bool:
        return all(not k[2] for k in self.atoms)

    def as_rational_pi(self) -> tuple[Fraction, int]:
        """``(rat, pi_pow)`` for a single real, delta-free atom (or zero)."""
        if not self.atoms:
            return Fraction(0), 0
        if len(self.atoms) != 1:
            raise ValueError(f"coefficient has {len(self.atoms)} atoms, expected one")
        (p, e, d), r = next(iter(self.atoms.items()))
        if e or d:
            raise ValueError("coefficient is not a real rational multiple of a power of pi")
        return r, p

    def to_complex(self) -> complex:
        total = 0j
        for (p, e, d), r in self.atoms.items():
            val = float(r) * math.pi**p
            for a in d:
                val *= math.sqrt(a / (1.0 + a * a))
            total += val * (1j if e else 1.0)
        return total

    def __eq__(self, other) -> bool:
        if isinstance(other, SymbolicCoefficient):
            return self.atoms == other.atoms
        if other == 0:
            return not self.atoms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.atoms.items()))

    def __repr__(self) -> str:
        if not self.atoms:
            return "0"
        parts = []
        for (p, e, d), r in sorted(self.atoms.items()):
            s = str(r)
            if p:
                s += f"*pi^{p}"
            if e:
                s += "*i"
            if d:
                s += "*" + "*".join(f"delta_{a}" for a in d)
            parts.append(s)
        return " + ".join(parts)
