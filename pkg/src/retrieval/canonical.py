"""Quotient of retrieved phases by the trivial ambiguities of the (|Ψ|, |ψ|) pair."""

from dataclasses import replace

import numpy as np

from retrieval.phase_retrieval import RetrievalResult

SYMMETRY_TOLERANCE = 1e-6


def _wrap(phase: np.ndarray) -> np.ndarray:
    return np.angle(np.exp(1j * phase))


def _step_differences(phase: np.ndarray, magnitude: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Wrapped phase steps between neighbouring support samples, their weights and left indices."""
    left = np.flatnonzero(~np.isnan(phase[:-1]) & ~np.isnan(phase[1:]))
    steps = _wrap(phase[left + 1] - phase[left])
    return steps, magnitude[left] * magnitude[left + 1], left


def _mirror(values: np.ndarray) -> np.ndarray:
    """values[(n − k) mod n], i.e. ω → −ω on a zero-centered grid."""
    return np.roll(values[::-1], 1)


def _remove_ramp(result: RetrievalResult) -> np.ndarray:
    """Subtract the mean group delay Σw·Δθ / (Σw·dω), which recenters the JTI centroid."""
    steps, weights, _ = _step_differences(result.phase, result.magnitude)
    if not weights.sum():
        return result.phase
    delay = float(np.dot(weights, steps) / weights.sum()) / result.grid.d_omega
    return _wrap(result.phase - delay * result.grid.points)


def _reference_index(result: RetrievalResult, phase: np.ndarray) -> int:
    index = result.grid.nearest_index(0.0)
    if 0 <= index < result.grid.n and not np.isnan(phase[index]):
        return index
    return int(np.argmax(np.where(np.isnan(phase), -np.inf, result.magnitude)))


def _should_reflect(result: RetrievalResult, phase: np.ndarray) -> bool:
    """Reflect when the first band-edge slope is below the last; only for mirror-symmetric |Ψ|."""
    magnitude = result.magnitude
    if result.grid.center != 0.0:
        return False
    if np.max(np.abs(_mirror(magnitude) - magnitude)) > SYMMETRY_TOLERANCE * magnitude.max():
        return False
    steps, _, _ = _step_differences(phase, magnitude)
    if steps.size < 2:
        return False
    return bool(steps[0] < steps[-1])


def canonicalize(result: RetrievalResult) -> RetrievalResult:
    """
    Canonical representative of a retrieved phase.

    Removes the linear ramp (JTI centroid moved to zero), then the global phase
    (θ = 0 at ω = 0, or at the strongest support sample when ω = 0 is off support),
    then picks between Ψ(ω) and Ψ*(−ω) so that the first band-edge slope is not
    below the last one. Idempotent.
    """
    phase = _remove_ramp(result)
    phase = _wrap(phase - phase[_reference_index(result, phase)])
    if _should_reflect(result, phase):
        phase = -_mirror(phase)
    return replace(result, phase=phase)
