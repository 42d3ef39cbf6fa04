"""Sparse exact polynomials in the amplitudes ``z_j`` and their Poisson bracket.

A monomial is the sorted tuple of its factors' mode indices, so
``z_3 z_3 z_{-6}`` is ``(-6, 3, 3)``.  The bracket is

    {A, B} = i * sum_{j != 0} sgn(j) * dA/dz_j * dB/dz_{-j},

which gives ``{Lambda, m} = -i * (lambda_{j1} + ... + lambda_{jn}) * m`` and
hence ``Gtilde + {Lambda, F} = 0`` for ``F = Gtilde / (i * divisor)``.
Only projections onto the index classes that matter are ever accumulated;
``max_non_s`` and ``keep`` steer that projection.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping

from .divisor_analysis import ADMISSIBLE, divisor
from .index_sets import (
    DEFAULT_CEILING,
    TangentialSet,
    enumerate_admissible,
    is_normal_pairing,
    multiplicity,
)
from .symbolic import SymbolicCoefficient, delta_product, merge_delta

Mono = tuple


class ZeroDivisorError(ArithmeticError):
    def __init__(self, witnesses):
        self.witnesses = list(witnesses)
        super().__init__(f"zero small divisor on {len(self.witnesses)} monomial(s), e.g. {self.witnesses[:3]}")


class ConsistencyError(RuntimeError):
    """An exact structural invariant (reality, degree) failed."""


@dataclass
class HamiltonianPoly:
    S: TangentialSet
    jmax: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {m: c for m, c in self.terms.items() if not c.is_zero()}

    def __len__(self) -> int:
        return len(self.terms)

    def _check(self, other: "HamiltonianPoly") -> None:
        if other.S != self.S or other.jmax != self.jmax:
            raise ValueError("polynomials carry different (S, jmax) metadata")

    def __add__(self, other: "HamiltonianPoly") -> "HamiltonianPoly":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return HamiltonianPoly(self.S, self.jmax, out)

    def __neg__(self) -> "HamiltonianPoly":
        return self.scaled(-1)

    def __sub__(self, other: "HamiltonianPoly") -> "HamiltonianPoly":
        return self + (-other)

    def scaled(self, r) -> "HamiltonianPoly":
        return HamiltonianPoly(self.S, self.jmax, {m: c * Fraction(r) for m, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mono) -> SymbolicCoefficient:
        return self.terms.get(tuple(sorted(mono)), SymbolicCoefficient.zero())

    def degrees(self) -> set[int]:
        return {len(m) for m in self.terms}

    def filtered(self, pred: Callable[[Mono], bool]) -> "HamiltonianPoly":
        return HamiltonianPoly(self.S, self.jmax, {m: c for m, c in self.terms.items() if pred(m)})

    def momentum_ok(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def reality_ok(self) -> bool:
        for m, c in self.terms.items():
            flip = tuple(sorted(-j for j in m))
            if self.coefficient(flip) != c.conj():
                return False
        return True

    def evaluate(self, z: Mapping[int, complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            v = c.to_complex()
            for j in m:
                v *= z.get(j, 0j)
            total += v
        return total


# ---------------------------------------------------------------------------
# construction


def build_Lambda(S: TangentialSet, jmax: int) -> HamiltonianPoly:
    terms = {(-a, a): SymbolicCoefficient.atom(Fraction(a, 1 + a * a)) for a in range(1, jmax + 1)}
    return HamiltonianPoly(S, jmax, terms)


def sextic_coefficient(t) -> SymbolicCoefficient:
    """Coefficient of the monomial ``t`` in ``1/(120 pi^2) sum prod delta z``."""
    dkey, drat = delta_product(t)
    return SymbolicCoefficient.atom(Fraction(multiplicity(t), 120) * drat, -2, 0, dkey)


@dataclass
class SexticSplit:
    bar: HamiltonianPoly
    tilde: HamiltonianPoly
    hat: HamiltonianPoly | None

    @property
    def full(self) -> HamiltonianPoly:
        out = self.bar + self.tilde
        return out + self.hat if self.hat is not None else out


def build_G(
    S: TangentialSet,
    jmax: int,
    *,
    include_hat: bool = True,
    ceiling: int = DEFAULT_CEILING,
) -> SexticSplit:
    """The sextic part split into normal, removable and ``>= 3`` non-S pieces.

    ``include_hat=False`` skips the ``D3`` piece, whose size grows like
    ``jmax^4`` and which cannot reach the projections computed here.
    """
    bar, tilde = {}, {}
    for t in enumerate_admissible(6, ADMISSIBLE[6], S, jmax, ceiling=ceiling):
        (bar if is_normal_pairing(t) else tilde)[t] = sextic_coefficient(t)
    hat = None
    if include_hat:
        hat = HamiltonianPoly(
            S, jmax, {t: sextic_coefficient(t) for t in enumerate_admissible(6, ("D3",), S, jmax, ceiling=ceiling)}
        )
    return SexticSplit(HamiltonianPoly(S, jmax, bar), HamiltonianPoly(S, jmax, tilde), hat)


def _non_s(m, S: TangentialSet) -> int:
    return sum(1 for j in m if j not in S)


def build_F6(Gtilde: HamiltonianPoly) -> HamiltonianPoly:
    """Generating function solving ``Gtilde + {Lambda, F} = 0``.

    Normal and ``D3`` monomials get coefficient zero.
    """
    S = Gtilde.S
    out = {}
    zeros = []
    for m, c in Gtilde.terms.items():
        if is_normal_pairing(m) or _non_s(m, S) > 2:
            continue
        d = divisor(m)
        if d == 0:
            zeros.append(m)
            continue
        # 1 / (i d) = -i / d
        out[m] = c.times_i(-1) * (1 / d)
    if zeros:
        raise ZeroDivisorError(zeros)
    return HamiltonianPoly(S, Gtilde.jmax, out)


# ---------------------------------------------------------------------------
# bracket


def _remove_one(m: Mono, j: int) -> Mono:
    k = m.index(j)
    return m[:k] + m[k + 1:]


def _merge(a: Mono, b: Mono) -> Mono:
    return tuple(sorted(a + b))


def _index_by_mode(B: HamiltonianPoly, max_rest: int | None) -> dict:
    """mode -> {non-S count of the remainder -> [(remainder, coeff, exponent)]}."""
    S = B.S
    idx: dict = {}
    for m, c in B.terms.items():
        n = _non_s(m, S)
        for j, e in Counter(m).items():
            nr = n - (j not in S)
            if max_rest is not None and nr > max_rest:
                continue
            idx.setdefault(j, {}).setdefault(nr, []).append((_remove_one(m, j), c, e))
    return idx


def _accumulate(acc: dict, mono: Mono, c1: SymbolicCoefficient, c2: SymbolicCoefficient, factor: int) -> None:
    slot = acc.get(mono)
    if slot is None:
        slot = acc[mono] = {}
    for (p1, e1, d1), r1 in c1.atoms.items():
        for (p2, e2, d2), r2 in c2.atoms.items():
            dkey, f = merge_delta(d1, d2)
            rat = r1 * r2 * f * factor
            e = e1 + e2
            if e == 2:
                rat, e = -rat, 0
            k = (p1 + p2, e, dkey)
            slot[k] = slot.get(k, 0) + rat


def poisson_bracket(
    A: HamiltonianPoly,
    B: HamiltonianPoly,
    *,
    max_non_s: int | None = None,
    keep: Callable[[Mono], bool] | None = None,
) -> HamiltonianPoly:
    """``{A, B}``, optionally projected.

    ``max_non_s`` keeps only output monomials with at most that many non-S
    factors; the limit is applied before any product is formed, so pieces of
    ``A`` or ``B`` that cannot contribute cost nothing.  ``keep`` is a further
    predicate on output monomials.
    """
    A._check(B)
    S = A.S
    idx = _index_by_mode(B, max_non_s)
    acc: dict = {}
    for a, ca in A.terms.items():
        na = _non_s(a, S)
        for j, e in Counter(a).items():
            na_rest = na - (j not in S)
            if max_non_s is not None and na_rest > max_non_s:
                continue
            by_count = idx.get(-j)
            if not by_count:
                continue
            ca_i = ca.times_i(1)
            sgn = 1 if j > 0 else -1
            for nb_rest, lst in by_count.items():
                if max_non_s is not None and na_rest + nb_rest > max_non_s:
                    continue
                a_rest = _remove_one(a, j)
                for b_rest, cb, eb in lst:
                    m = _merge(a_rest, b_rest)
                    if keep is not None and not keep(m):
                        continue
                    _accumulate(acc, m, ca_i, cb, sgn * e * eb)
    terms = {m: SymbolicCoefficient(slot) for m, slot in acc.items()}
    return HamiltonianPoly(S, A.jmax, terms)


# ---------------------------------------------------------------------------
# homological equation


def homological_residual(Lam: HamiltonianPoly, Gtilde: HamiltonianPoly, F: HamiltonianPoly) -> HamiltonianPoly:
    return Gtilde + poisson_bracket(Lam, F)


@dataclass(frozen=True)
class HomologicalCheck:
    zero: bool
    terms_checked: int
    chunks: int
    nonzero_examples: list


def _chunks(it: Iterable, size: int) -> Iterator[list]:
    buf = []
    for x in it:
        buf.append(x)
        if len(buf) >= size:
            yield buf
            buf = []
    if buf:
        yield buf


def verify_homological(S: TangentialSet, jmax: int, *, chunk: int = 20000) -> HomologicalCheck:
    """Exact check of ``Gtilde + {Lambda, F} = 0`` streamed over chunks of ``Gtilde``.

    The residual is linear in ``(Gtilde, F)`` and ``F`` is built chunk by chunk
    from the same monomials, so the total residual vanishes iff every chunk's
    residual vanishes.
    """
    Lam = build_Lambda(S, jmax)
    count = chunks = 0
    bad: list = []
    source = enumerate_admissible(6, ADMISSIBLE[6], S, jmax, normal=False)
    for block in _chunks(source, chunk):
        Gt = HamiltonianPoly(S, jmax, {t: sextic_coefficient(t) for t in block})
        res = homological_residual(Lam, Gt, build_F6(Gt))
        count += len(Gt)
        chunks += 1
        if not res.is_zero() and len(bad) < 10:
            bad.extend(list(res.terms)[: 10 - len(bad)])
    return HomologicalCheck(not bad, count, chunks, bad)


# ---------------------------------------------------------------------------
# normal-form coefficients


def action_monomial(S: TangentialSet, a: int, b: int) -> Mono:
    """``|z_{n1}|^{2a} |z_{n2}|^{2b}`` as a monomial key."""
    return tuple(sorted((-S.n1, S.n1) * a + (-S.n2, S.n2) * b))


def _all_s_normal(S: TangentialSet) -> Callable[[Mono], bool]:
    def keep(m):
        return all(j in S for j in m) and is_normal_pairing(m)

    return keep


def read_action_coefficients(P: HamiltonianPoly, degree: int) -> list[tuple[Fraction, int]]:
    """``[(rat_m, pi_pow_m)]`` for ``|z_{n1}|^{2(k-m)} |z_{n2}|^{2m}``, ``k = degree/2``."""
    S = P.S
    k = degree // 2
    wanted = {action_monomial(S, k - m, m) for m in range(k + 1)}
    extra = [m for m in P.terms if m not in wanted]
    if extra:
        raise ConsistencyError(f"unexpected monomials in action projection: {extra[:3]}")
    out = []
    for m in range(k + 1):
        c = P.coefficient(action_monomial(S, k - m, m))
        if not c.is_real() or not c.is_delta_free():
            raise ConsistencyError(f"action coefficient {m} is not real: {c!r}")
        if len(c.atoms) > 1:
            raise ConsistencyError(f"action coefficient {m} mixes powers of pi: {c!r}")
        out.append(c.as_rational_pi())
    return out


def Rbar_poly(
    Gbar: HamiltonianPoly, Gtilde: HamiltonianPoly, Ghat: HamiltonianPoly | None, F: HamiltonianPoly
) -> HamiltonianPoly:
    X = Gbar + Gtilde.scaled(Fraction(1, 2))
    if Ghat is not None:
        X = X + Ghat
    return poisson_bracket(X, F, max_non_s=0, keep=_all_s_normal(Gbar.S))


def compute_Rbar(Gbar, Gtilde, Ghat, F) -> list[tuple[Fraction, int]]:
    """``R_0..R_5`` as ``(rational, pi_pow)``; coefficient of ``|z_{n1}|^{2(5-m)}|z_{n2}|^{2m}``."""
    return read_action_coefficients(Rbar_poly(Gbar, Gtilde, Ghat, F), 10)


def Tbar_poly(
    Gbar: HamiltonianPoly, Gtilde: HamiltonianPoly, Ghat: HamiltonianPoly | None, F: HamiltonianPoly
) -> HamiltonianPoly:
    """All-S normal projection of ``{{(Gbar + Ghat)/2 + Gtilde/3, F}, F}``.

    The inner bracket is kept only where it has at most one non-S factor,
    since the outer bracket removes at most one.  ``Ghat`` is accepted but its
    terms are discarded by that same count before any product is formed.
    """
    X = Gbar.scaled(Fraction(1, 2)) + Gtilde.scaled(Fraction(1, 3))
    if Ghat is not None:
        X = X + Ghat.scaled(Fraction(1, 2))
    Y = poisson_bracket(X, F, max_non_s=1)
    return poisson_bracket(Y, F, max_non_s=0, keep=_all_s_normal(Gbar.S))


def compute_Tbar(Gbar, Gtilde, Ghat, F) -> list[tuple[Fraction, int]]:
    """``T_0..T_7``; coefficient of ``|z_{n1}|^{2(7-m)}|z_{n2}|^{2m}``."""
    return read_action_coefficients(Tbar_poly(Gbar, Gtilde, Ghat, F), 14)


def Gbar_action_coefficients(Gbar: HamiltonianPoly) -> list[tuple[Fraction, int]]:
    """Coefficients of ``|z_{n1}|^{2(3-m)}|z_{n2}|^{2m}``, ``m = 0..3``."""
    return read_action_coefficients(Gbar.filtered(_all_s_normal(Gbar.S)), 6)


@dataclass
class NormalForm:
    S: TangentialSet
    jmax: int
    Gbar_S: list
    R: list
    T: list
    homological_zero: bool
    gtilde_terms: int
    Gbar: HamiltonianPoly = field(repr=False, default=None)


def normal_form(S: TangentialSet, jmax: int | None = None) -> NormalForm:
    """Sextic split, generating function and the all-S normal-form coefficients."""
    jmax = 5 * S.n2 if jmax is None else jmax
    parts = build_G(S, jmax, include_hat=False)
    F = build_F6(parts.tilde)
    Lam = build_Lambda(S, jmax)
    residual = homological_residual(Lam, parts.tilde, F)
    R = compute_Rbar(parts.bar, parts.tilde, None, F)
    T = compute_Tbar(parts.bar, parts.tilde, None, F)
    return NormalForm(
        S, jmax, Gbar_action_coefficients(parts.bar), R, T, residual.is_zero(), len(parts.tilde), parts.bar
    )
