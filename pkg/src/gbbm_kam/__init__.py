"""Exact small-divisor, normal-form and frequency-map computations for
two-frequency quasi-periodic solutions of the generalized BBM equation,
together with a spectral simulator that measures the frequency shifts."""
from __future__ import annotations

from .divisor_analysis import DivisorReport, divisor, survey_min_divisor
from .dynamics import SimConfig, Trajectory, frequency_experiment, initial_torus_state, integrate
from .frequency import Tone, extract_frequencies
from .index_sets import IndexTuple, TangentialSet, classify, enumerate_admissible
from .kam_check import FrequencyModel, leading_order_model, model_from_normal_form, omega0, verify_assumptions
from .normal_form import NormalForm, normal_form
from .spectral_core import SpectralState, energy, gradient_G

__version__ = "0.1.0"

__all__ = [
    "DivisorReport",
    "FrequencyModel",
    "IndexTuple",
    "NormalForm",
    "SimConfig",
    "SpectralState",
    "TangentialSet",
    "Tone",
    "Trajectory",
    "classify",
    "divisor",
    "energy",
    "enumerate_admissible",
    "extract_frequencies",
    "frequency_experiment",
    "gradient_G",
    "initial_torus_state",
    "integrate",
    "leading_order_model",
    "model_from_normal_form",
    "normal_form",
    "omega0",
    "survey_min_divisor",
    "verify_assumptions",
]
