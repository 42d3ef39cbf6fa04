"""Spectral representation of gBBM on the circle.

Real profiles ``u(x)`` with zero mean are written as

    u(x) = sum_{j != 0} delta_j z_j e^{ijx} / sqrt(2 pi),   delta_j = sqrt(|j| / (1 + j^2)),

and the Hamiltonian ``H = 1/2 int u^2 + 1/30 int u^6`` becomes
``sum_{j>=1} lambda_j |z_j|^2 + G(z)`` with ``lambda_j = j / (1 + j^2)``.

Exact quantities (``lam``, ``delta_sq``) are ``Fraction``; everything on the
grid is IEEE double.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)


class AliasingError(ValueError):
    """Grid too coarse for the requested nonlinear product."""


def check_mode(j: int) -> int:
    if int(j) != j:
        raise TypeError(f"mode must be an integer, got {j!r}")
    j = int(j)
    if j == 0:
        raise ValueError("mode j = 0 (the mean) is excluded from the model space")
    return j


def lam(j: int) -> Fraction:
    """Linear frequency ``j / (1 + j^2)`` as an exact rational (odd in ``j``)."""
    j = check_mode(j)
    return Fraction(j, 1 + j * j)


def delta_sq(j: int) -> Fraction:
    """``delta_j^2 = |j| / (1 + j^2)`` (even in ``j``)."""
    j = check_mode(j)
    return Fraction(abs(j), 1 + j * j)


def lam_float(j):
    j = np.asarray(j, dtype=np.float64)
    return j / (1.0 + j * j)


def delta_float(j):
    j = np.asarray(j, dtype=np.float64)
    return np.sqrt(np.abs(j) / (1.0 + j * j))


def is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def dealiased_grid_size(jmax: int, degree: int = 6) -> int:
    """Smallest power of two ``M`` with ``M > degree * jmax``.

    A product of ``degree`` band-limited factors has modes up to
    ``degree * jmax``; the trapezoid rule on ``M`` points integrates it exactly
    and leaves the retained band unaliased once ``M > degree * jmax``.
    """
    m = 8
    while m <= degree * jmax:
        m *= 2
    return m


def _check_grid(m: int, jmax: int, degree: int) -> None:
    if not is_power_of_two(m):
        raise ValueError(f"grid size M={m} is not a power of two")
    if m <= degree * jmax:
        raise AliasingError(
            f"M={m} aliases degree-{degree} products for jmax={jmax}; need M > {degree * jmax}"
        )


@dataclass(frozen=True)
class SpectralState:
    """Truncated amplitude sequence ``{z_j : 1 <= |j| <= jmax}``.

    ``z`` is stored in mode order ``-jmax, ..., -1, 1, ..., jmax``; the mean is
    not represented.  ``real`` marks states obeying ``z_{-j} = conj(z_j)``.
    """

    z: np.ndarray
    jmax: int
    real: bool = True

    def __post_init__(self):
        z = np.array(self.z, dtype=np.complex128)
        if z.shape != (2 * self.jmax,):
            raise ValueError(f"expected {2 * self.jmax} amplitudes, got shape {z.shape}")
        if self.real:
            pos, neg = z[self.jmax:], z[: self.jmax][::-1]
            scale = max(1.0, float(np.max(np.abs(z), initial=0.0)))
            if np.max(np.abs(neg - np.conj(pos)), initial=0.0) > 1e-12 * scale:
                raise ValueError("real_flag set but z_{-j} != conj(z_j)")
        z.flags.writeable = False
        object.__setattr__(self, "z", z)

    # construction helpers
    @classmethod
    def zeros(cls, jmax: int) -> "SpectralState":
        return cls(np.zeros(2 * jmax, dtype=np.complex128), jmax, True)

    @classmethod
    def from_positive(cls, zpos) -> "SpectralState":
        """Real state from ``z_1..z_J``; negative modes are the conjugates."""
        zpos = np.asarray(zpos, dtype=np.complex128)
        jmax = zpos.shape[0]
        return cls(np.concatenate([np.conj(zpos[::-1]), zpos]), jmax, True)

    @classmethod
    def from_modes(cls, amplitudes: Mapping[int, complex], jmax: int, real: bool = False) -> "SpectralState":
        z = np.zeros(2 * jmax, dtype=np.complex128)
        for j, val in amplitudes.items():
            j = check_mode(j)
            if abs(j) > jmax:
                raise ValueError(f"mode {j} outside |j| <= {jmax}")
            z[_index(j, jmax)] = val
            if real:
                z[_index(-j, jmax)] = np.conj(val)
        return cls(z, jmax, real)

    @property
    def modes(self) -> np.ndarray:
        return mode_array(self.jmax)

    @property
    def positive(self) -> np.ndarray:
        return self.z[self.jmax:]

    def __getitem__(self, j: int) -> complex:
        j = check_mode(j)
        if abs(j) > self.jmax:
            return 0j
        return complex(self.z[_index(j, self.jmax)])

    def scaled(self, s: complex) -> "SpectralState":
        real = self.real and complex(s).imag == 0.0
        return SpectralState(self.z * s, self.jmax, real)

    def __add__(self, other: "SpectralState") -> "SpectralState":
        if other.jmax != self.jmax:
            raise ValueError("jmax mismatch")
        return SpectralState(self.z + other.z, self.jmax, self.real and other.real)


def mode_array(jmax: int) -> np.ndarray:
    return np.concatenate([np.arange(-jmax, 0), np.arange(1, jmax + 1)])


def _index(j: int, jmax: int) -> int:
    return j + jmax if j < 0 else j + jmax - 1


@dataclass(frozen=True)
class GridProfile:
    """Samples ``u(x_m)``, ``x_m = 2 pi m / M``."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples)
        if not is_power_of_two(s.shape[0]):
            raise ValueError(f"grid size {s.shape[0]} is not a power of two")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def x(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M


def _coefficients(z: np.ndarray, jmax: int, m: int) -> np.ndarray:
    """Numpy-FFT coefficient array (length ``m``) of ``u`` for amplitudes ``z``."""
    modes = mode_array(jmax)
    c = np.zeros(m, dtype=np.complex128)
    c[modes % m] = delta_float(modes) * z / SQRT_2PI
    return c


def _grid_values(z: np.ndarray, jmax: int, m: int) -> np.ndarray:
    return np.fft.ifft(_coefficients(z, jmax, m)) * m


def synthesize(state: SpectralState, M: int) -> GridProfile:
    """Evaluate ``u`` on the ``M``-point grid."""
    if not is_power_of_two(M):
        raise ValueError(f"grid size M={M} is not a power of two")
    if M < 4 * state.jmax:
        raise ValueError(f"M={M} too small for jmax={state.jmax} (need M >= 4*jmax)")
    u = _grid_values(state.z, state.jmax, M)
    return GridProfile(u.real.copy() if state.real else u)


def analyze(profile: GridProfile, jmax: int) -> SpectralState:
    """Project grid samples onto ``1 <= |j| <= jmax``."""
    m = profile.M
    if m < 4 * jmax:
        raise ValueError(f"jmax={jmax} too large for M={m} (need M >= 4*jmax)")
    c = np.fft.fft(profile.samples) / m
    modes = mode_array(jmax)
    z = c[modes % m] * SQRT_2PI / delta_float(modes)
    real = not np.iscomplexobj(profile.samples)
    if real:
        # enforce exact conjugate symmetry against round-off
        pos = z[jmax:]
        z = np.concatenate([np.conj(pos[::-1]), pos])
    return SpectralState(z, jmax, real)


def quadratic_energy(state: SpectralState) -> float:
    """``Lambda = sum_{j>=1} lambda_j |z_j|^2`` (real states)."""
    j = np.arange(1, state.jmax + 1)
    return float(np.sum(lam_float(j) * np.abs(state.positive) ** 2))


def sextic_value(state: SpectralState, M: int | None = None) -> complex:
    """Polynomial value ``G(z) = 1/30 int u^6`` with no conjugation.

    Works for any complex amplitude vector, which is what the polarization
    identities in ``kam_check`` rely on.
    """
    m = dealiased_grid_size(state.jmax) if M is None else M
    _check_grid(m, state.jmax, 6)
    u = _grid_values(state.z, state.jmax, m)
    return complex((2.0 * np.pi / m) * np.sum(u**6) / 30.0)


def energy(state: SpectralState) -> float:
    if not state.real:
        raise ValueError("energy requires a real-flagged state")
    return quadratic_energy(state) + sextic_value(state).real


def weighted_norm(state: SpectralState, p: float) -> float:
    """``sqrt(sum |z_j|^2 |j|^{2p})`` over all stored modes."""
    if p < 0:
        raise ValueError("p must be non-negative")
    w = np.abs(state.modes).astype(np.float64) ** (2.0 * p)
    return float(np.sqrt(np.sum(np.abs(state.z) ** 2 * w)))


def gradient_G(state: SpectralState, M: int | None = None) -> SpectralState:
    """Entries ``dG/dz_{-j}`` for ``1 <= |j| <= jmax``.

    ``dG/dz_{-j} = delta_j sqrt(2 pi) / 5 * (u^5)^_j`` where ``^_j`` is the
    ``j``-th Fourier coefficient; degree five in ``z``.
    """
    jmax = state.jmax
    m = dealiased_grid_size(jmax) if M is None else M
    _check_grid(m, jmax, 6)
    u = _grid_values(state.z, jmax, m)
    w = np.fft.fft(u**5) / m
    modes = mode_array(jmax)
    g = delta_float(modes) * SQRT_2PI / 5.0 * w[modes % m]
    if state.real:
        pos = g[jmax:]
        g = np.concatenate([np.conj(pos[::-1]), pos])
    return SpectralState(g, jmax, state.real)
