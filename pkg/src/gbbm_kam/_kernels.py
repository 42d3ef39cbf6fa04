"""Time-stepping kernels for the Galerkin-truncated gBBM flow.

Amplitudes are the positive modes ``z_1..z_J``; the negative modes are their
conjugates.  Two steppers are provided:

* ``splitting``: Strang composition of the exact linear rotation
  ``z_j -> exp(-i lambda_j h) z_j`` (half steps) with one implicit-midpoint
  step of the purely nonlinear flow.  Symmetric, symplectic, conserves
  ``E1 = sum |j| |z_j|^2`` up to the inner solver tolerance and reproduces the
  linear flow exactly.
* ``midpoint``: implicit midpoint on the full vector field.

The numba path compiles the whole loop including a radix-2 FFT; set
``GBBM_KAM_NUMBA=0`` (or run without numba installed) to get the numpy path.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

SPLITTING, MIDPOINT = 0, 1
INTEGRATORS = {"splitting": SPLITTING, "implicit-midpoint": MIDPOINT}


def numba_enabled() -> bool:
    flag = os.environ.get("GBBM_KAM_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "no", "off")


def backend_name(backend: str | None = None) -> str:
    if backend is None:
        return "numba" if numba_enabled() else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def _coeff_tables(jmax: int):
    j = np.arange(1, jmax + 1, dtype=np.float64)
    lam = j / (1.0 + j * j)
    delta = np.sqrt(j / (1.0 + j * j))
    return lam, delta


# ---------------------------------------------------------------------------
# numpy reference path


def _nonlinear_np(z, delta, lam_sign_fac, M, on):
    """``-i delta_j sqrt(2 pi)/5 (u^5)^_j`` for j = 1..J (zero if ``on`` is False)."""
    if not on:
        return np.zeros_like(z)
    J = z.shape[0]
    c = np.zeros(M // 2 + 1, dtype=np.complex128)
    c[1 : J + 1] = delta * z / math.sqrt(2 * math.pi)
    u = np.fft.irfft(c, n=M) * M
    w = np.fft.rfft(u**5)[1 : J + 1] / M
    return lam_sign_fac * w


def _energies_np(z, lam, delta, jidx, M):
    c = np.zeros(M // 2 + 1, dtype=np.complex128)
    c[1 : z.shape[0] + 1] = delta * z / math.sqrt(2 * math.pi)
    u = np.fft.irfft(c, n=M) * M
    a2 = np.abs(z) ** 2
    H = float(np.sum(lam * a2) + 2 * math.pi / M * np.sum(u**6) / 30.0)
    E1 = float(2.0 * np.sum(jidx * a2))
    return H, E1


def run_numpy(z0, dt, nsteps, stride, M, method, nonlinear, tol, maxit):
    J = z0.shape[0]
    lam, delta = _coeff_tables(J)
    jidx = np.arange(1, J + 1, dtype=np.float64)
    fac = -1j * delta * math.sqrt(2 * math.pi) / 5.0
    nsamp = nsteps // stride + 1
    out = np.empty((nsamp, J), dtype=np.complex128)
    H = np.empty(nsamp)
    E1 = np.empty(nsamp)
    z = z0.astype(np.complex128).copy()
    half = np.exp(-0.5j * lam * dt)
    cay_a = 1.0 + 0.5j * lam * dt
    cay_b = 1.0 - 0.5j * lam * dt
    out[0] = z
    H[0], E1[0] = _energies_np(z, lam, delta, jidx, M)
    worst = 0
    k = 1
    for step in range(1, nsteps + 1):
        if method == SPLITTING:
            z = half * z
            z1 = z + dt * _nonlinear_np(z, delta, fac, M, nonlinear)
            for it in range(maxit):
                z_new = z + dt * _nonlinear_np(0.5 * (z + z1), delta, fac, M, nonlinear)
                err = np.max(np.abs(z_new - z1))
                z1 = z_new
                if err <= tol * max(1.0, np.max(np.abs(z1))):
                    break
            else:
                return out[:k], H[:k], E1[:k], -step
            worst = max(worst, it + 1)
            z = half * z1
        else:
            z1 = z.copy()
            for it in range(maxit):
                z_new = (cay_b * z + dt * _nonlinear_np(0.5 * (z + z1), delta, fac, M, nonlinear)) / cay_a
                err = np.max(np.abs(z_new - z1))
                z1 = z_new
                if err <= tol * max(1.0, np.max(np.abs(z1))):
                    break
            else:
                return out[:k], H[:k], E1[:k], -step
            worst = max(worst, it + 1)
            z = z1
        if step % stride == 0:
            out[k] = z
            H[k], E1[k] = _energies_np(z, lam, delta, jidx, M)
            k += 1
    return out, H, E1, worst


# ---------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _bitrev(M):
        bits = 0
        while (1 << bits) < M:
            bits += 1
        rev = np.empty(M, dtype=np.int64)
        for i in range(M):
            r = 0
            x = i
            for _ in range(bits):
                r = (r << 1) | (x & 1)
                x >>= 1
            rev[i] = r
        return rev

    @numba.njit(cache=True)
    def _fft_inplace(a, rev, tw, sign):
        """Iterative radix-2 FFT; ``sign = -1`` forward, ``+1`` unnormalized inverse."""
        M = a.shape[0]
        for i in range(M):
            r = rev[i]
            if r > i:
                t = a[i]
                a[i] = a[r]
                a[r] = t
        size = 2
        while size <= M:
            halfsize = size // 2
            step = M // size
            for start in range(0, M, size):
                for k in range(halfsize):
                    w = tw[k * step]
                    if sign > 0:
                        w = w.conjugate()
                    x = a[start + k]
                    y = a[start + k + halfsize] * w
                    a[start + k] = x + y
                    a[start + k + halfsize] = x - y
            size *= 2

    @numba.njit(cache=True)
    def _grid(z, delta, M, rev, tw, buf):
        J = z.shape[0]
        s = 1.0 / math.sqrt(2.0 * math.pi)
        for i in range(M):
            buf[i] = 0.0
        for j in range(1, J + 1):
            c = delta[j - 1] * z[j - 1] * s
            buf[j] = c
            buf[M - j] = c.conjugate()
        _fft_inplace(buf, rev, tw, 1)
        for i in range(M):
            buf[i] = buf[i].real

    @numba.njit(cache=True)
    def _nonlinear_nb(z, delta, fac, M, rev, tw, buf, out):
        J = z.shape[0]
        _grid(z, delta, M, rev, tw, buf)
        for i in range(M):
            u = buf[i].real
            u2 = u * u
            buf[i] = u2 * u2 * u
        _fft_inplace(buf, rev, tw, -1)
        for j in range(1, J + 1):
            out[j - 1] = fac[j - 1] * buf[j] / M

    @numba.njit(cache=True)
    def _energies_nb(z, lam, delta, M, rev, tw, buf):
        J = z.shape[0]
        H = 0.0
        E1 = 0.0
        for j in range(1, J + 1):
            a2 = z[j - 1].real ** 2 + z[j - 1].imag ** 2
            H += lam[j - 1] * a2
            E1 += 2.0 * j * a2
        _grid(z, delta, M, rev, tw, buf)
        s6 = 0.0
        for i in range(M):
            u = buf[i].real
            u2 = u * u
            s6 += u2 * u2 * u2
        H += 2.0 * math.pi / M * s6 / 30.0
        return H, E1

    @numba.njit(cache=True)
    def run_numba(z0, dt, nsteps, stride, M, method, nonlinear, tol, maxit):
        J = z0.shape[0]
        lam = np.empty(J)
        delta = np.empty(J)
        fac = np.empty(J, dtype=np.complex128)
        for j in range(1, J + 1):
            lam[j - 1] = j / (1.0 + j * j)
            delta[j - 1] = math.sqrt(j / (1.0 + j * j))
            fac[j - 1] = -1j * delta[j - 1] * math.sqrt(2.0 * math.pi) / 5.0
        rev = _bitrev(M)
        tw = np.empty(M // 2, dtype=np.complex128)
        for k in range(M // 2):
            tw[k] = complex(math.cos(2.0 * math.pi * k / M), -math.sin(2.0 * math.pi * k / M))
        buf = np.empty(M, dtype=np.complex128)
        nl = np.zeros(J, dtype=np.complex128)
        half = np.empty(J, dtype=np.complex128)
        cay_a = np.empty(J, dtype=np.complex128)
        cay_b = np.empty(J, dtype=np.complex128)
        for j in range(J):
            half[j] = complex(math.cos(0.5 * lam[j] * dt), -math.sin(0.5 * lam[j] * dt))
            cay_a[j] = complex(1.0, 0.5 * lam[j] * dt)
            cay_b[j] = complex(1.0, -0.5 * lam[j] * dt)

        nsamp = nsteps // stride + 1
        out = np.empty((nsamp, J), dtype=np.complex128)
        Hs = np.empty(nsamp)
        Es = np.empty(nsamp)
        z = z0.copy()
        z1 = np.empty(J, dtype=np.complex128)
        mid = np.empty(J, dtype=np.complex128)
        out[0, :] = z
        h, e = _energies_nb(z, lam, delta, M, rev, tw, buf)
        Hs[0] = h
        Es[0] = e
        worst = 0
        k = 1
        for step in range(1, nsteps + 1):
            if method == 0:
                for j in range(J):
                    z[j] = half[j] * z[j]
            for j in range(J):
                z1[j] = z[j]
            converged = False
            for it in range(maxit):
                for j in range(J):
                    mid[j] = 0.5 * (z[j] + z1[j])
                if nonlinear:
                    _nonlinear_nb(mid, delta, fac, M, rev, tw, buf, nl)
                err = 0.0
                zmax = 1.0
                for j in range(J):
                    if method == 0:
                        znew = z[j] + dt * nl[j]
                    else:
                        znew = (cay_b[j] * z[j] + dt * nl[j]) / cay_a[j]
                    d = abs(znew - z1[j])
                    if d > err:
                        err = d
                    z1[j] = znew
                    if abs(znew) > zmax:
                        zmax = abs(znew)
                if err <= tol * zmax:
                    converged = True
                    if it + 1 > worst:
                        worst = it + 1
                    break
            if not converged:
                return out[:k], Hs[:k], Es[:k], -step
            if method == 0:
                for j in range(J):
                    z[j] = half[j] * z1[j]
            else:
                for j in range(J):
                    z[j] = z1[j]
            if step % stride == 0:
                out[k, :] = z
                h, e = _energies_nb(z, lam, delta, M, rev, tw, buf)
                Hs[k] = h
                Es[k] = e
                k += 1
        return out, Hs, Es, worst


def run(z0, dt, nsteps, stride, M, method=SPLITTING, nonlinear=True, tol=1e-13, maxit=50, backend=None):
    """Integrate and return ``(samples, H, E1, status)``.

    ``status`` is the largest inner iteration count used, or ``-step`` if the
    inner solve failed to converge at that step.
    """
    z0 = np.ascontiguousarray(z0, dtype=np.complex128)
    if backend_name(backend) == "numba":
        return run_numba(z0, float(dt), int(nsteps), int(stride), int(M), int(method), bool(nonlinear), float(tol), int(maxit))
    return run_numpy(z0, float(dt), int(nsteps), int(stride), int(M), int(method), bool(nonlinear), float(tol), int(maxit))
