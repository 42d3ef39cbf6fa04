"""Frequency extraction from uniformly sampled complex signals.

Convention: a tone ``a * exp(-i w t)`` is reported with frequency ``w``,
matching the linear flow ``z_j(t) = exp(-i lambda_j t) z_j(0)``.

The coarse estimate is the peak of a Hann-windowed FFT; it is refined by
solving ``d/dw |P(w)|^2 = 0`` for the windowed transform
``P(w) = sum_n h_n x_n exp(i w t_n)``, i.e. ``Re(conj(P) P') = 0``, which is a
phase-stationarity condition on the demodulated signal.  Several tones are
separated by subtracting each fitted tone and re-refining the others.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

MIN_SAMPLES = 2**14


class FrequencyError(ValueError):
    """Signal too short or without enough resolvable peaks."""


@dataclass(frozen=True)
class Tone:
    frequency: float
    amplitude: complex


def _window(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def _transform(x, t, h, w):
    e = np.exp(1j * w * t)
    hx = h * x
    P = np.sum(hx * e)
    dP = np.sum(hx * (1j * t) * e)
    return P, dP


def _refine(x, t, h, w0, half_width):
    def g(w):
        P, dP = _transform(x, t, h, w)
        return float(np.real(np.conj(P) * dP))

    lo, hi = w0 - half_width, w0 + half_width
    glo, ghi = g(lo), g(hi)
    if glo > 0 > ghi:
        return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    res = minimize_scalar(
        lambda w: -abs(_transform(x, t, h, w)[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}
    )
    return float(res.x)


def _amplitude(x, t, h, w):
    """Least-squares amplitude of ``exp(-i w t)`` under the window weights."""
    e = np.exp(-1j * w * t)
    return complex(np.sum(h * x * np.conj(e)) / np.sum(h))


def extract_frequencies(signal, dt: float, count: int = 1, sweeps: int = 3) -> list[Tone]:
    x = np.asarray(signal, dtype=np.complex128)
    n = x.shape[0]
    if n < MIN_SAMPLES:
        raise FrequencyError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if count < 1:
        raise ValueError("count must be positive")
    t = np.arange(n) * dt
    h = _window(n)
    bin_w = 2 * np.pi / (n * dt)

    tones: list[Tone] = []
    residual = x.copy()
    for _ in range(count):
        # P(w_k) on the FFT grid: sum h x exp(+i w_k t) = n * ifft(h x)
        spec = np.abs(np.fft.ifft(h * residual)) * n
        k = int(np.argmax(spec))
        if spec[k] <= 1e-12 * max(1.0, float(np.max(np.abs(x))) * n):
            raise FrequencyError(f"only {len(tones)} resolvable peak(s), asked for {count}")
        w0 = (k if k <= n // 2 else k - n) * bin_w
        w = _refine(residual, t, h, w0, bin_w)
        a = _amplitude(residual, t, h, w)
        tones.append(Tone(w, a))
        residual = residual - a * np.exp(-1j * w * t)

    # re-refine each tone with all the others removed
    for _ in range(sweeps if count > 1 else 0):
        for i in range(count):
            others = sum((tn.amplitude * np.exp(-1j * tn.frequency * t) for j, tn in enumerate(tones) if j != i), 0)
            xi = x - others
            w = _refine(xi, t, h, tones[i].frequency, 0.5 * bin_w)
            tones[i] = Tone(w, _amplitude(xi, t, h, w))
    return tones
