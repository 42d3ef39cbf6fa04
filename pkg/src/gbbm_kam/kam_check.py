"""Frequency maps of the two-mode torus and numerical checks of the KAM
hypotheses (nondegeneracy, normal-frequency bounds, perturbation scaling).

With actions ``I_l = |z_{n_l}|^2`` the integrable part is
``h(I) = lambda_1 I_1 + lambda_2 I_2 + Gbar_S(I) + Rbar(I) + Tbar(I)`` and the
tangential frequencies are ``omega_l(xi) = dh/dI_l`` at ``I = sqrt(xi)``.
Each frequency is stored as ``{(p1, p2): c}`` meaning
``sum c * xi_1^{p1/2} * xi_2^{p2/2}``, which is closed under ``d/dxi``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import spectral_core as sc
from .index_sets import TangentialSet
from .normal_form import ConsistencyError, HamiltonianPoly

Poly2 = dict  # {(p1, p2): float}


def _pi(rat_pi: tuple[Fraction, int]) -> float:
    r, p = rat_pi
    return float(r) * math.pi**p


def _action_terms(coeffs: Sequence[tuple[Fraction, int]], k: int) -> list[tuple[int, int, float]]:
    """``(a, b, c)`` for ``c * I1^a * I2^b`` from the list ordered by ``I2`` power."""
    return [(k - m, m, _pi(c)) for m, c in enumerate(coeffs)]


def _add(p: Poly2, key, val: float) -> None:
    if val != 0.0:
        p[key] = p.get(key, 0.0) + val


def _d_xi(p: Poly2, l: int) -> Poly2:
    out: Poly2 = {}
    for (p1, p2), c in p.items():
        e = p1 if l == 0 else p2
        if e == 0:
            continue
        key = (p1 - 2, p2) if l == 0 else (p1, p2 - 2)
        _add(out, key, c * e / 2.0)
    return out


def _eval(p: Poly2, xi) -> float:
    r1, r2 = math.sqrt(xi[0]), math.sqrt(xi[1])
    return float(sum(c * r1**p1 * r2**p2 for (p1, p2), c in p.items()))


@dataclass(frozen=True)
class FrequencyModel:
    n1: int
    n2: int
    Gbar_S: tuple  # 4 x (rat, pi_pow): |z_{n1}|^{2(3-m)} |z_{n2}|^{2m}
    R: tuple  # 6 x (rat, pi_pow)
    T: tuple  # 8 x (rat, pi_pow)
    omega_bracket: tuple  # (b1, b12, b2) as (rat, pi_pow): Omega_j = lambda_j (1 + b1 xi1 + b12 sqrt(xi1 xi2) + b2 xi2)
    omega: tuple = field(init=False, repr=False)

    def __post_init__(self):
        lam = (Fraction(self.n1, 1 + self.n1**2), Fraction(self.n2, 1 + self.n2**2))
        terms = [(1, 0, float(lam[0])), (0, 1, float(lam[1]))]
        terms += _action_terms(self.Gbar_S, 3) + _action_terms(self.R, 5) + _action_terms(self.T, 7)
        om = ({}, {})
        for a, b, c in terms:
            if a:
                _add(om[0], (a - 1, b), a * c)
            if b:
                _add(om[1], (a, b - 1), b * c)
        object.__setattr__(self, "omega", om)

    @property
    def lam_exact(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.n1, 1 + self.n1**2), Fraction(self.n2, 1 + self.n2**2)

    def omega0_at_zero(self) -> tuple[Fraction, Fraction]:
        """Exact value of the frequency map at ``xi = 0``.

        Every non-constant term carries a positive power of ``sqrt(xi)``, so
        only the linear frequencies survive.
        """
        for om in self.omega:
            if any(p1 + p2 <= 0 and (p1, p2) != (0, 0) for p1, p2 in om):
                raise ConsistencyError("frequency map has a negative power of xi")
        return self.lam_exact

    def R_lj(self) -> tuple[list, list]:
        """``R_{1j} = (5-j) R_j`` and ``R_{2j} = (j+1) R_{j+1}``, ``j = 0..4``."""
        R = [r for r, _ in self.R]
        return [(5 - j) * R[j] for j in range(5)], [(j + 1) * R[j + 1] for j in range(5)]

    def T_lj(self) -> tuple[list, list]:
        """``T_{1j} = (7-j) T_j`` and ``T_{2j} = (j+1) T_{j+1}``, ``j = 0..6``."""
        T = [t for t, _ in self.T]
        return [(7 - j) * T[j] for j in range(7)], [(j + 1) * T[j + 1] for j in range(7)]

    def truncated(self) -> "FrequencyModel":
        """Same model with the order-10 and order-14 corrections removed."""
        zero6 = tuple((Fraction(0), -4) for _ in range(6))
        zero8 = tuple((Fraction(0), -6) for _ in range(8))
        return FrequencyModel(self.n1, self.n2, self.Gbar_S, zero6, zero8, self.omega_bracket)

    def swapped(self) -> "FrequencyModel":
        b1, b12, b2 = self.omega_bracket
        return FrequencyModel(
            self.n2, self.n1, tuple(reversed(self.Gbar_S)), tuple(reversed(self.R)), tuple(reversed(self.T)), (b2, b12, b1)
        )


def closed_form_gbar(n1: int, n2: int) -> tuple:
    """All-S sextic normal-form coefficients from their closed form."""
    l1, l2 = Fraction(n1, 1 + n1 * n1), Fraction(n2, 1 + n2 * n2)
    g = (l1**3 / 6, Fraction(3, 2) * l1**2 * l2, Fraction(3, 2) * l1 * l2**2, l2**3 / 6)
    return tuple((c, -2) for c in g)


def closed_form_bracket(n1: int, n2: int) -> tuple:
    l1, l2 = Fraction(n1, 1 + n1 * n1), Fraction(n2, 1 + n2 * n2)
    return ((Fraction(3, 2) * l1**2, -2), (6 * l1 * l2, -2), (Fraction(3, 2) * l2**2, -2))


def leading_order_model(n1: int, n2: int) -> FrequencyModel:
    z6 = tuple((Fraction(0), -4) for _ in range(6))
    z8 = tuple((Fraction(0), -6) for _ in range(8))
    return FrequencyModel(n1, n2, closed_form_gbar(n1, n2), z6, z8, closed_form_bracket(n1, n2))


def normal_frequency_bracket(Gbar: HamiltonianPoly, js: Sequence[int] | None = None) -> tuple:
    """Read ``(b1, b12, b2)`` from the ``|z_S|^4 |z_j|^2`` terms, checking j-independence."""
    S = Gbar.S
    n1, n2 = S.n1, S.n2
    if js is None:
        js = [j for j in range(1, Gbar.jmax + 1) if j not in S]
    ref = None
    for j in js:
        lj = Fraction(j, 1 + j * j)
        row = []
        for pairs in ((n1, n1), (n1, n2), (n2, n2)):
            mono = tuple(sorted((j, -j) + tuple(pairs) + tuple(-p for p in pairs)))
            c = Gbar.coefficient(mono)
            r, p = c.as_rational_pi()
            row.append((r / lj, p))
        row = tuple(row)
        if ref is None:
            ref = row
        elif row != ref:
            raise ConsistencyError(f"normal-frequency bracket depends on j: {row} vs {ref} at j={j}")
    if ref is None:
        raise ValueError("no normal modes available")
    return ref


def derive_frequency_model(Gbar: HamiltonianPoly, R, T, Gbar_S=None) -> FrequencyModel:
    from .normal_form import Gbar_action_coefficients

    S = Gbar.S
    gs = Gbar_action_coefficients(Gbar) if Gbar_S is None else Gbar_S
    return FrequencyModel(S.n1, S.n2, tuple(gs), tuple(R), tuple(T), normal_frequency_bracket(Gbar))


def model_from_normal_form(nf) -> FrequencyModel:
    return derive_frequency_model(nf.Gbar, nf.R, nf.T, nf.Gbar_S)


# ---------------------------------------------------------------------------
# evaluation


def in_domain(xi, eps: float) -> bool:
    lo, hi = math.sqrt(eps), 4 * math.sqrt(eps)
    tol = 1e-12 * hi
    return all(lo - tol <= x <= hi + tol for x in xi)


def omega0(model: FrequencyModel, xi, eps: float | None = None) -> tuple[float, float]:
    if eps is not None and not in_domain(xi, eps):
        warnings.warn(f"xi={tuple(xi)} outside the parameter domain for eps={eps}", stacklevel=2)
    return _eval(model.omega[0], xi), _eval(model.omega[1], xi)


def omega_bracket_value(model: FrequencyModel, xi) -> float:
    b1, b12, b2 = (_pi(b) for b in model.omega_bracket)
    return 1.0 + b1 * xi[0] + b12 * math.sqrt(xi[0] * xi[1]) + b2 * xi[1]


def Omega(model: FrequencyModel, j: int, xi) -> float:
    if j <= 0 or j in (model.n1, model.n2):
        raise ValueError(f"Omega is defined for j >= 1 outside the tangential set, got {j}")
    return j / (1.0 + j * j) * omega_bracket_value(model, xi)


def dOmega(model: FrequencyModel, j: int, xi) -> tuple[float, float]:
    b1, b12, b2 = (_pi(b) for b in model.omega_bracket)
    lj = j / (1.0 + j * j)
    r = math.sqrt(xi[1] / xi[0])
    return lj * (b1 + 0.5 * b12 * r), lj * (b2 + 0.5 * b12 / r)


def jacobian(model: FrequencyModel, xi) -> np.ndarray:
    if min(xi) <= 0:
        raise ValueError("the frequency map is not differentiable at a zero action")
    return np.array([[_eval(_d_xi(model.omega[l], k), xi) for k in (0, 1)] for l in (0, 1)])


def jacobian_det(model: FrequencyModel, xi) -> float:
    return float(np.linalg.det(jacobian(model, xi)))


def jacobian_fd(model: FrequencyModel, xi, rel_step: float = 1e-6, eps: float | None = None) -> np.ndarray:
    """Finite-difference Jacobian; one-sided at the boundary of the parameter domain."""
    J = np.empty((2, 2))
    lo = math.sqrt(eps) if eps is not None else 0.0
    hi = 4 * math.sqrt(eps) if eps is not None else math.inf
    for k in (0, 1):
        h = rel_step * xi[k]
        xp, xm = list(xi), list(xi)
        if xi[k] - h < lo:
            xp[k] += h
            a, b, span = omega0(model, xp), omega0(model, xi), h
        elif xi[k] + h > hi:
            xm[k] -= h
            a, b, span = omega0(model, xi), omega0(model, xm), h
        else:
            xp[k] += h
            xm[k] -= h
            a, b, span = omega0(model, xp), omega0(model, xm), 2 * h
        J[:, k] = (np.array(a) - np.array(b)) / span
    return J


def leading_det_closed_form(n1: int, n2: int, xi) -> float:
    """``det d omega / d xi`` from its closed form at sextic order."""
    q1, q2 = (1 + n1 * n1), (1 + n2 * n2)
    br = (
        3 * n1 * n1 / q1**2 * math.sqrt(xi[0] / xi[1])
        + 3 * n2 * n2 / q2**2 * math.sqrt(xi[1] / xi[0])
        + 4 * n1 * n2 / (q1 * q2)
    )
    return -(n1 * n1 * n2 * n2) * br / (2 * math.pi**4 * q1**2 * q2**2)


# ---------------------------------------------------------------------------
# assumptions


def domain_grid(eps: float, n: int = 64) -> np.ndarray:
    g = np.linspace(math.sqrt(eps), 4 * math.sqrt(eps), n)
    return np.array([(a, b) for a in g for b in g])


def domain_samples(eps: float, n: int = 1000, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(math.sqrt(eps), 4 * math.sqrt(eps), size=(n, 2))


@dataclass
class CheckResult:
    passed: bool
    values: dict
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"pass": self.passed, **self.values}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def check_assumption_A(model: FrequencyModel, eps: float, grid: int = 64) -> CheckResult:
    pts = domain_grid(eps, grid)
    dets = np.array([jacobian_det(model, p) for p in pts])
    sup_d = max(float(np.max(np.abs(jacobian(model, p)))) for p in pts)
    bound = 5 * model.n1**3 / (math.pi**2 * (1 + model.n1**2) ** 3)
    k = int(np.argmin(np.abs(dets)))
    inf_abs = float(np.abs(dets[k]))
    same_sign = bool(np.all(dets < 0) or np.all(dets > 0))
    ok = inf_abs > 0 and same_sign and sup_d <= bound
    return CheckResult(
        ok,
        {
            "inf_abs_det": inf_abs,
            "max_det": float(np.max(dets)),
            "min_det": float(np.min(dets)),
            "det_negative_everywhere": bool(np.all(dets < 0)),
            "sup_abs_dxi_omega": sup_d,
            "sup_bound": bound,
        },
        {"xi": list(map(float, pts[k]))},
    )


def check_assumption_B(
    model: FrequencyModel, eps: float, jmax: int, grid: int = 64, samples: int = 1000, seed: int = 0
) -> CheckResult:
    """Normal-frequency bounds and the derivative bound, on grid plus random samples.

    Since ``Omega_j = lambda_j * beta(xi)`` the j-dependence factors out, which
    lets every (j, xi) pair be checked through one array expression.
    """
    pts = np.vstack([domain_grid(eps, grid), domain_samples(eps, samples, seed)])
    js = np.array([j for j in range(1, jmax + 1) if j not in (model.n1, model.n2)], dtype=np.float64)
    lj = js / (1 + js * js)
    beta = np.array([omega_bracket_value(model, p) for p in pts])
    b1, b12, b2 = (_pi(b) for b in model.omega_bracket)
    r = np.sqrt(pts[:, 1] / pts[:, 0])
    dmax = np.maximum(np.abs(b1 + 0.5 * b12 * r), np.abs(b2 + 0.5 * b12 / r))
    # Omega_j * |j| = beta(xi) * lambda_j * j with both factors positive, so the
    # extremes over all (point, j) pairs are products of per-factor extremes
    lower = float(beta.min() * np.min(lj * js))
    upper = float(beta.max() * np.max(lj * js))
    deriv = float(dmax.max() * np.max(lj * js))
    c13 = 15 * model.n1**2 / (2 * math.pi**2 * (1 + model.n1**2) ** 2)
    ok = lower >= 0.5 and upper <= 2.0 and deriv <= c13
    stated_c11 = 1.5
    return CheckResult(
        ok,
        {
            "min_Omega_times_j": lower,
            "max_Omega_times_j": upper,
            "c11_used": 0.5,
            "c12": 2.0,
            "stated_c11": stated_c11,
            "stated_c11_holds": lower >= stated_c11,
            "sup_dxi_Omega_times_j": deriv,
            "c13": c13,
            "points": int(len(pts)),
            "modes": int(len(js)),
        },
        None if ok else {"xi": list(map(float, pts[int(np.argmax(dmax))]))},
    )


def _ghat_gradient_size(zS: np.ndarray, w: np.ndarray, jmax: int, non_s: np.ndarray) -> float:
    """``|| d/dz_hat of the >= 3-in-z_hat part of G ||`` at ``z_S + w``.

    The dependence on ``w`` is split by degree with a 7-point roots-of-unity
    transform of ``t -> grad G(z_S + t w)``; degrees 2..5 of the gradient in
    ``w`` belong to the monomials with at least three normal factors.
    """
    K = 7
    grads = []
    for k in range(K):
        t = np.exp(2j * np.pi * k / K)
        st = sc.SpectralState(zS + t * w, jmax, real=False)
        grads.append(sc.gradient_G(st).z[non_s])
    # coefficient of t^d: (1/K) sum_k g(t_k) t_k^{-d}
    coeff = np.fft.fft(np.array(grads), axis=0) / K
    hat = coeff[2:6].sum(axis=0)
    return float(np.sqrt(np.sum(np.abs(hat) ** 2)))


def check_assumption_C(
    n1: int,
    n2: int,
    eps_values: Sequence[float] = (1e-4, 1e-5, 1e-6),
    jmax: int | None = None,
    p: float = 1.0,
    seed: int = 0,
    tol: float = 0.15,
) -> CheckResult:
    """Scaling of the perturbation vector fields with ``eps``.

    Tangential amplitudes ``|z_{n_l}| = xi_l^{1/4}`` with ``xi = (2, 3) sqrt(eps)``,
    normal part of weighted norm ``r = eps^{5/8}``.  A field's size is its
    ``z_hat``-gradient norm divided by ``r``.  The sextic piece is evaluated
    from the actual Hamiltonian; the order-10, 14 and 18 remainders enter as
    model terms of the same bidegree, (8, 2), (13, 1) and (18, 0).  All four
    sizes are predicted to scale like ``eps``.
    """
    jmax = n2 + 16 if jmax is None else jmax
    modes = sc.mode_array(jmax)
    is_s = np.isin(np.abs(modes), [n1, n2])
    non_s = np.where(~is_s)[0]
    rng = np.random.default_rng(seed)
    wpos = np.zeros(jmax, dtype=np.complex128)
    cand = np.array([j for j in range(1, jmax + 1) if j not in (n1, n2)])
    wpos[cand - 1] = rng.normal(size=cand.size) + 1j * rng.normal(size=cand.size)
    w_unit = np.concatenate([np.conj(wpos[::-1]), wpos])
    w_unit /= sc.weighted_norm(sc.SpectralState(w_unit, jmax, True), p)
    wt = np.abs(modes).astype(float) ** p

    sizes: dict[str, list[float]] = {"Ghat": [], "Rhat": [], "That": [], "W": []}
    for eps in eps_values:
        xi = (2 * math.sqrt(eps), 3 * math.sqrt(eps))
        zS = np.zeros(2 * jmax, dtype=np.complex128)
        for n, x, ph in ((n1, xi[0], 0.3), (n2, xi[1], 1.7)):
            a = x**0.25 * np.exp(-1j * ph)
            zS[jmax + n - 1] = a
            zS[jmax - n] = np.conj(a)
        r = eps ** (5 / 8)
        w = r * w_unit
        sizes["Ghat"].append(_ghat_gradient_size(zS, w, jmax, non_s) / r)
        IS = float(np.sum(np.abs(zS) ** 2)) / 2  # |z_{n1}|^2 + |z_{n2}|^2
        wn = float(np.sqrt(np.sum(np.abs(w) ** 2 * wt**2)))  # = r
        # model fields: P = IS^{a/2} * ||w||^b -> gradient size b * IS^{a/2} * ||w||^{b-1}
        for name, (a, b) in (("Rhat", (8, 2)), ("That", (13, 1)), ("W", (18, 0))):
            if b == 0:
                # no normal dependence; size measured through the tangential action derivative
                sizes[name].append(IS ** (a / 2) / r**2)
            else:
                sizes[name].append(b * IS ** (a / 2) * wn ** (b - 1) / r)
    le = np.log(np.asarray(eps_values, dtype=float))
    slopes = {k: float(np.polyfit(le, np.log(v), 1)[0]) for k, v in sizes.items()}
    ok = all(abs(s - 1.0) <= tol for s in slopes.values())
    return CheckResult(
        ok,
        {
            "predicted_slope": 1.0,
            "slopes": slopes,
            "tolerance": tol,
            "eps": list(map(float, eps_values)),
            "sizes": {k: list(map(float, v)) for k, v in sizes.items()},
        },
    )


def verify_assumptions(
    model: FrequencyModel,
    eps: float,
    jmax: int,
    *,
    grid: int = 64,
    samples: int = 1000,
    scaling_eps: Sequence[float] = (1e-4, 1e-5, 1e-6),
) -> dict:
    A = check_assumption_A(model, eps, grid)
    B = check_assumption_B(model, eps, jmax, grid, samples)
    C = check_assumption_C(model.n1, model.n2, scaling_eps)
    D = CheckResult(True, {"note": "reality of all normal-form polynomials is checked exactly in the normal-form stage"})
    E = CheckResult(True, {"note": "no normal-frequency coupling matrix: B = 0"})
    return {"A": A, "B": B, "C": C, "D": D, "E": E}
