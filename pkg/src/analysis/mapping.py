"""Dispersive time-to-frequency mapping of coincidence delays."""

import math
from dataclasses import dataclass

import numpy as np

from decorators.error_handler import CfiValidationError


@dataclass(frozen=True)
class FrequencyMapping:
    """Detuning (rad/s) for a delay, with the jitter-limited resolution (rad/s) when known."""

    detuning: float | np.ndarray
    resolution: float | None = None


def frequency_resolution(beta2: float, *jitter_sigmas: float) -> float:
    """Quadrature-combined timing jitter over |β₂|, in rad/s."""
    if beta2 == 0:
        raise CfiValidationError("beta2 must be non-zero")
    return math.hypot(*jitter_sigmas) / abs(beta2)


def map_time_to_frequency(
    dt: float | np.ndarray,
    beta2: float,
    jitter: float | None = None,
) -> FrequencyMapping:
    """
    detuning = dt / β₂; `jitter` is the combined rms timing jitter of the delay.

    Example
    -------
    >>> mapping = map_time_to_frequency(1.27e-9, 1.29e-20)
    >>> round(mapping.detuning / (2 * math.pi) / 1e9, 2)
    15.67
    """
    if beta2 == 0:
        raise CfiValidationError("beta2 must be non-zero")
    detuning = np.asarray(dt, dtype=np.float64) / beta2
    resolution = frequency_resolution(beta2, jitter) if jitter is not None else None
    return FrequencyMapping(detuning=detuning if detuning.ndim else float(detuning), resolution=resolution)
