"""Factorized diffusion sampling.

Images and noise are float64 numpy arrays shaped (C, H, W). A predictor is
either an ``OraclePredictor`` or a callable ``fn(x_t, t, conditions)`` that
returns one noise estimate per condition, where each condition is an
``(id, payload, guidance)`` tuple.
"""

import json as _json

from ._fdiff import (
    ArgumentError,
    BackendError,
    Decomposition,
    OraclePredictor,
    Schedule,
    ScheduleError,
    ShapeError,
    blur_sweep,
    composite_noise,
    ddim_step,
    gaussian_blur,
    gray_color,
    hybrid,
    identity,
    motion,
    sample,
    sample_inverse,
    scaling,
    spatial,
    sweep_factors,
    triple,
)
from ._fdiff import from_json as _from_json


def decomposition(spec, shape, sigma_base_width=64.0):
    """Build a decomposition from a config-style dict, e.g. {"kind": "hybrid", "sigma": 2}."""
    return _from_json(_json.dumps(spec), tuple(shape), sigma_base_width)


__all__ = [
    "ArgumentError",
    "BackendError",
    "Decomposition",
    "OraclePredictor",
    "Schedule",
    "ScheduleError",
    "ShapeError",
    "blur_sweep",
    "composite_noise",
    "ddim_step",
    "decomposition",
    "gaussian_blur",
    "gray_color",
    "hybrid",
    "identity",
    "motion",
    "sample",
    "sample_inverse",
    "scaling",
    "spatial",
    "sweep_factors",
    "triple",
]
