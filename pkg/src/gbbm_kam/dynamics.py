"""Galerkin-truncated gBBM dynamics and the frequency-shift experiment.

In amplitudes the flow reads ``dz_j/dt = -i lambda_j (z_j + sqrt(2 pi)/(5 delta_j) (u^5)^_j)``,
the spectral form of ``u_t = -(1 - d_xx)^{-1} d_x (u + u^5/5)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from . import spectral_core as sc
from .frequency import Tone, extract_frequencies
from .kam_check import FrequencyModel, leading_order_model, omega0


class ConfigError(ValueError):
    """Simulation parameters violate a precondition."""


class NonConvergenceError(RuntimeError):
    """The implicit inner solve did not converge."""


class DriftError(RuntimeError):
    """A conserved quantity drifted beyond the configured tolerance."""


@dataclass(frozen=True)
class SimConfig:
    n1: int = 5
    n2: int = 13
    xi: tuple = (0.05, 0.05)
    phases: tuple = (0.0, 0.0)
    jmax: int = 32
    M: int = 256
    dt: float = 0.05
    T: float = 1e5
    stride: int = 10
    integrator: str = "splitting"
    nonlinear: bool = True
    tol: float = 1e-13
    maxit: int = 50
    drift_tol_H: float | None = None
    drift_tol_E1: float | None = None
    backend: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(float(x) for x in self.xi))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        self.validate()

    def validate(self) -> None:
        if not (1 <= self.n1 < self.n2):
            raise ConfigError(f"need 1 <= n1 < n2, got ({self.n1}, {self.n2})")
        if self.n2 > self.jmax:
            raise ConfigError(f"n2={self.n2} exceeds jmax={self.jmax}")
        if len(self.xi) != 2 or min(self.xi) < 0:
            raise ConfigError("xi must be two non-negative numbers")
        if self.dt == 0 or abs(self.dt) * 0.5 > 0.1:
            raise ConfigError(f"|dt| * max lambda = {abs(self.dt) * 0.5:g} must be in (0, 0.1]")
        if not sc.is_power_of_two(self.M) or self.M < 4 * self.jmax:
            raise ConfigError(f"M={self.M} must be a power of two with M >= 4*jmax")
        if self.M <= 6 * self.jmax:
            raise ConfigError(f"M={self.M} aliases the quintic product; need M > 6*jmax = {6 * self.jmax}")
        if self.T <= 0 or self.stride < 1:
            raise ConfigError("T must be positive and stride >= 1")
        if self.integrator not in _kernels.INTEGRATORS:
            raise ConfigError(f"integrator must be one of {sorted(_kernels.INTEGRATORS)}")

    @property
    def nsteps(self) -> int:
        return int(round(self.T / abs(self.dt)))

    def to_json(self) -> dict:
        d = asdict(self)
        d["xi"] = list(self.xi)
        d["phases"] = list(self.phases)
        return d


@dataclass
class Trajectory:
    times: np.ndarray
    z: np.ndarray  # (samples, jmax), positive modes
    H: np.ndarray
    E1: np.ndarray
    jmax: int
    inner_iterations: int = 0

    def state(self, k: int) -> sc.SpectralState:
        return sc.SpectralState.from_positive(self.z[k])

    def mode(self, j: int) -> np.ndarray:
        if j == 0 or abs(j) > self.jmax:
            raise ValueError(f"mode {j} not stored")
        s = self.z[:, abs(j) - 1]
        return s if j > 0 else np.conj(s)

    def drift_H(self) -> float:
        return float(np.max(np.abs(self.H - self.H[0])) / abs(self.H[0])) if self.H[0] else 0.0

    def drift_E1(self) -> float:
        return float(np.max(np.abs(self.E1 - self.E1[0])) / self.E1[0]) if self.E1[0] else 0.0

    def normal_energy_ratio(self, n1: int, n2: int) -> float:
        """max over time of ``sum_{j not in S} |j||z_j|^2 / sum_{j in S} |j||z_j|^2``."""
        j = np.arange(1, self.jmax + 1)
        w = j * np.abs(self.z) ** 2
        s = np.isin(j, [n1, n2])
        return float(np.max(w[:, ~s].sum(axis=1) / w[:, s].sum(axis=1)))


def initial_torus_state(xi, phases, n1: int, n2: int, jmax: int) -> sc.SpectralState:
    """``z_{n_l} = xi_l^{1/4} exp(-i x_l)``; every other mode zero."""
    if n2 > jmax:
        raise ConfigError(f"n2={n2} exceeds jmax={jmax}")
    zpos = np.zeros(jmax, dtype=np.complex128)
    for n, x, ph in ((n1, xi[0], phases[0]), (n2, xi[1], phases[1])):
        zpos[n - 1] = x**0.25 * complex(math.cos(ph), -math.sin(ph))
    return sc.SpectralState.from_positive(zpos)


def integrate(cfg: SimConfig, z0: sc.SpectralState | None = None) -> Trajectory:
    if z0 is None:
        z0 = initial_torus_state(cfg.xi, cfg.phases, cfg.n1, cfg.n2, cfg.jmax)
    if z0.jmax != cfg.jmax or not z0.real:
        raise ConfigError("initial state must be real and match jmax")
    samples, H, E1, status = _kernels.run(
        z0.positive,
        cfg.dt,
        cfg.nsteps,
        cfg.stride,
        cfg.M,
        _kernels.INTEGRATORS[cfg.integrator],
        cfg.nonlinear,
        cfg.tol,
        cfg.maxit,
        cfg.backend,
    )
    if status < 0:
        raise NonConvergenceError(f"inner iteration failed to reach tol={cfg.tol} at step {-status}")
    times = np.arange(samples.shape[0]) * cfg.stride * cfg.dt
    traj = Trajectory(times, samples, H, E1, cfg.jmax, int(status))
    if cfg.drift_tol_H is not None and traj.drift_H() > cfg.drift_tol_H:
        raise DriftError(f"relative H drift {traj.drift_H():.3e} exceeds {cfg.drift_tol_H:g}")
    if cfg.drift_tol_E1 is not None and traj.drift_E1() > cfg.drift_tol_E1:
        raise DriftError(f"relative E1 drift {traj.drift_E1():.3e} exceeds {cfg.drift_tol_E1:g}")
    return traj


def measure_frequencies(traj: Trajectory, n1: int, n2: int, sample_dt: float) -> tuple[Tone, Tone]:
    t1 = extract_frequencies(traj.mode(n1), sample_dt, 1)[0]
    t2 = extract_frequencies(traj.mode(n2), sample_dt, 1)[0]
    return t1, t2


@dataclass
class ExperimentPoint:
    xi: tuple
    measured: tuple
    linear: tuple
    predicted_quadratic: tuple
    predicted_full: tuple | None
    rel_shift_error: tuple
    drift_H: float
    drift_E1: float
    normal_energy_ratio: float

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


@dataclass
class ExperimentReport:
    n1: int
    n2: int
    points: list = field(default_factory=list)
    slopes: tuple | None = None

    def to_json(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "points": [p.to_json() for p in self.points],
            "shift_slopes": list(self.slopes) if self.slopes is not None else None,
        }


def compare_point(
    xi, measured: Sequence[float], n1: int, n2: int, full_model: FrequencyModel | None = None, traj: Trajectory | None = None
) -> ExperimentPoint:
    lin = (n1 / (1 + n1 * n1), n2 / (1 + n2 * n2))
    quad = omega0(leading_order_model(n1, n2), xi)
    full = omega0(full_model, xi) if full_model is not None else None
    err = tuple(abs((m - l) - (q - l)) / abs(q - l) for m, l, q in zip(measured, lin, quad))
    return ExperimentPoint(
        tuple(xi),
        tuple(measured),
        lin,
        tuple(quad),
        None if full is None else tuple(full),
        err,
        traj.drift_H() if traj is not None else float("nan"),
        traj.drift_E1() if traj is not None else float("nan"),
        traj.normal_energy_ratio(n1, n2) if traj is not None else float("nan"),
    )


def shift_slopes(points: Sequence[ExperimentPoint]) -> tuple[float, float]:
    """log-log slope of ``|measured - lambda|`` against ``xi`` (diagonal sweeps)."""
    x = np.log([p.xi[0] for p in points])
    out = []
    for l in (0, 1):
        y = np.log([abs(p.measured[l] - p.linear[l]) for p in points])
        out.append(float(np.polyfit(x, y, 1)[0]))
    return out[0], out[1]


def _run_point(cfg: SimConfig, full_model: FrequencyModel | None) -> ExperimentPoint:
    traj = integrate(cfg)
    t1, t2 = measure_frequencies(traj, cfg.n1, cfg.n2, cfg.stride * abs(cfg.dt))
    return compare_point(cfg.xi, (t1.frequency, t2.frequency), cfg.n1, cfg.n2, full_model, traj)


def frequency_experiment(
    cfg: SimConfig,
    sweep: Sequence[float] | None = None,
    full_model: FrequencyModel | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Simulate from the unperturbed torus data and compare measured frequencies.

    ``sweep`` lists diagonal values ``xi1 = xi2`` to run in addition to
    ``cfg.xi``; the slope fit uses the sweep points.  Points are independent
    and run in a process pool when ``workers > 1``.
    """
    report = ExperimentReport(cfg.n1, cfg.n2)
    xis = [cfg.xi] + [(s, s) for s in (sweep or []) if (s, s) != cfg.xi]
    cfgs = [replace(cfg, xi=xi) for xi in xis]
    if workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cfgs))) as pool:
            report.points = list(pool.map(_run_point, cfgs, [full_model] * len(cfgs)))
    else:
        report.points = [_run_point(c, full_model) for c in cfgs]
    if sweep:
        pts = [p for p in report.points if p.xi[0] == p.xi[1] and p.xi[0] in set(sweep)]
        if len(pts) >= 2:
            report.slopes = shift_slopes(pts)
    return report
