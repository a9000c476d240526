"""
Conjugate-Franson coincidence probability and visibility.

Time domain:       P = (η²/8)·[1 + ∫dt JTI(t) cos(ΔΩt + φ_T)]
Frequency domain:  P = (η²/8)·[1 + Re(e^{iφ_T} ∫dω Ψ*(ω)Ψ(ω+ΔΩ))]

The two agree exactly on dual grids when ΔΩ is a multiple of the frequency step.
"""

import math
from dataclasses import dataclass

import numpy as np

from decorators.error_handler import CfiValidationError, GridError, NormalizationError
from numerics.amplitudes import (
    JointSpectralAmplitude2D,
    SpectralAmplitude1D,
    TemporalAmplitude1D,
    TemporalIntensity1D,
    TemporalIntensity2D,
    JointTemporalAmplitude2D,
)
from numerics.grids import FrequencyGrid
from utils.log_utils import log

CLASSICAL_THRESHOLD = 1.0 / math.sqrt(2.0)
STATE_NORM_TOLERANCE = 1e-6
GUARD_MASS_LIMIT = 1e-12


@dataclass(frozen=True)
class CfiConfig:
    """
    Interferometer parameters.

    delta_omega: frequency shift ΔΩ (rad/s); 0 is the degenerate unshifted case.
    phi_s, phi_i: MZI phase differences (rad).
    eta: single-arm detection efficiency in [0, 1].
    beta2: dispersion coefficient of the (+) module (s²); the (−) module mirrors it.
    """

    delta_omega: float
    phi_s: float = 0.0
    phi_i: float = 0.0
    eta: float = 1.0
    beta2: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.delta_omega) or self.delta_omega < 0:
            raise CfiValidationError(f"delta_omega must be >= 0, got {self.delta_omega}")
        if not 0.0 <= self.eta <= 1.0:
            raise CfiValidationError(f"eta must lie in [0, 1], got {self.eta}")
        if not all(map(math.isfinite, (self.phi_s, self.phi_i, self.beta2))):
            raise CfiValidationError("phases and beta2 must be finite")

    @property
    def phi_t(self) -> float:
        return self.phi_s + self.phi_i

    @property
    def side_peak_delay(self) -> float:
        """t_S − t_I displacement β₂·ΔΩ of the side peaks (s)."""
        return self.beta2 * self.delta_omega


def _as_intensity(jti: TemporalIntensity1D | TemporalAmplitude1D) -> TemporalIntensity1D:
    if isinstance(jti, TemporalAmplitude1D):
        jti = TemporalIntensity1D.from_amplitude(jti)
    norm = jti.norm()
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise NormalizationError(f"JTI norm {norm:.9g} deviates from 1 by more than 1e-6")
    return jti


def cfi_fringe_term(
    jti: TemporalIntensity1D | TemporalAmplitude1D, delta_omega: float, phi_t: float = 0.0
) -> float:
    """∫dt JTI(t)·cos(ΔΩt + φ_T), midpoint rule."""
    jti = _as_intensity(jti)
    phase = delta_omega * jti.grid.points + phi_t
    return float(np.sum(jti.values * np.cos(phase)) * jti.grid.d_t)


def cfi_probability_cw(jti: TemporalIntensity1D | TemporalAmplitude1D, cfg: CfiConfig) -> float:
    """
    Central-peak coincidence probability per pair, time-domain form.

    Raises:
        NormalizationError: If the JTI norm deviates from 1 by more than 1e-6.
    """
    scale = cfg.eta**2 / 8.0
    fringe = cfi_fringe_term(jti, cfg.delta_omega, cfg.phi_t)
    return float(np.clip(scale * (1.0 + fringe), 0.0, 2.0 * scale))


def cfi_visibility_cw(jti: TemporalIntensity1D | TemporalAmplitude1D, delta_omega: float) -> float:
    """V = ∫dt JTI(t) cos(ΔΩt); arbitrary ΔΩ."""
    return cfi_fringe_term(jti, delta_omega, 0.0)


def snap_shift(grid: FrequencyGrid, delta_omega: float) -> tuple[int, float]:
    """Nearest whole number of grid steps to ΔΩ and the snap error (rad/s)."""
    if delta_omega < 0:
        raise CfiValidationError(f"delta_omega must be >= 0, got {delta_omega}")
    steps = int(round(delta_omega / grid.d_omega))
    return steps, steps * grid.d_omega - delta_omega


def _snapped(grid: FrequencyGrid, delta_omega: float, axis: str) -> int:
    steps, error = snap_shift(grid, delta_omega)
    if steps >= grid.n:
        raise GridError(f"Shift of {steps} steps exceeds the {axis} grid ({grid.n} points)")
    if abs(error) > 1e-12 * max(delta_omega, grid.d_omega):
        log(
            message=f"ΔΩ snapped to {steps} {axis} grid steps, snap error {error:.6g} rad/s",
            level="WARNING",
        )
    return steps


def _spectral_overlap(jsa: SpectralAmplitude1D, delta_omega: float) -> complex:
    """∫dω Ψ*(ω)Ψ(ω+ΔΩ) with ΔΩ snapped to the grid."""
    norm = jsa.norm()
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise NormalizationError(f"JSA norm {norm:.9g} deviates from 1 by more than 1e-6")
    steps = _snapped(jsa.grid, delta_omega, "frequency")
    values = jsa.values
    n = values.size
    if steps and np.sum(np.abs(values[n - steps :]) ** 2) * jsa.cell > GUARD_MASS_LIMIT:
        raise GridError("Guard band too small: shifted spectrum leaves the frequency grid")
    return complex(np.sum(np.conj(values[: n - steps]) * values[steps:]) * jsa.cell)


def cfi_visibility_freq(jsa: SpectralAmplitude1D, delta_omega: float) -> float:
    """
    V = Re ∫dω Ψ*(ω)Ψ(ω+ΔΩ).

    ΔΩ is rounded to the nearest multiple of d_omega; a non-zero rounding is
    logged as a warning.

    Raises:
        GridError: If the grid lacks a guard band of ΔΩ above the spectrum.
    """
    return _spectral_overlap(jsa, delta_omega).real


def cfi_probability_freq(jsa: SpectralAmplitude1D, cfg: CfiConfig) -> float:
    """Frequency-domain counterpart of `cfi_probability_cw`."""
    scale = cfg.eta**2 / 8.0
    fringe = (np.exp(1j * cfg.phi_t) * _spectral_overlap(jsa, cfg.delta_omega)).real
    return float(np.clip(scale * (1.0 + fringe), 0.0, 2.0 * scale))


def cfi_probability_2d(jti: TemporalIntensity2D | JointTemporalAmplitude2D, cfg: CfiConfig) -> float:
    """P = (η²/8)·[1 + ∫∫ JTI(t_S,t_I) cos(ΔΩ(t_S − t_I) + φ_T)] for a pulsed state."""
    if isinstance(jti, JointTemporalAmplitude2D):
        jti = TemporalIntensity2D.from_amplitude(jti)
    norm = jti.norm()
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise NormalizationError(f"JTI norm {norm:.9g} deviates from 1 by more than 1e-6")
    difference = np.subtract.outer(jti.grid_s.points, jti.grid_i.points)
    fringe = np.sum(jti.values * np.cos(cfg.delta_omega * difference + cfg.phi_t))
    fringe *= jti.grid_s.d_t * jti.grid_i.d_t
    scale = cfg.eta**2 / 8.0
    return float(np.clip(scale * (1.0 + fringe), 0.0, 2.0 * scale))


def cfi_probability_freq_2d(jsa: JointSpectralAmplitude2D, cfg: CfiConfig) -> float:
    """
    Experimental: P = (η²/8)·[1 + Re(e^{iφ_T} ∫∫ Ψ*(ω_S,ω_I) Ψ(ω_S+ΔΩ, ω_I+ΔΩ))].

    Both detunings shift by +ΔΩ because the idler enters the state at −ω_I.
    """
    log(message="cfi_probability_freq_2d is experimental", level="WARNING")
    norm = jsa.norm()
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise NormalizationError(f"JSA norm {norm:.9g} deviates from 1 by more than 1e-6")
    m_s = _snapped(jsa.grid_s, cfg.delta_omega, "signal")
    m_i = _snapped(jsa.grid_i, cfg.delta_omega, "idler")
    n_s, n_i = jsa.values.shape
    overlap = np.sum(np.conj(jsa.values[: n_s - m_s, : n_i - m_i]) * jsa.values[m_s:, m_i:])
    fringe = (np.exp(1j * cfg.phi_t) * overlap * jsa.cell).real
    scale = cfg.eta**2 / 8.0
    return float(np.clip(scale * (1.0 + fringe), 0.0, 2.0 * scale))


def gaussian_visibility_closed_form(sigma_cor: float, delta_omega: float) -> float:
    """V = exp(−ΔΩ²σ_cor²/2) for a Gaussian JTI of rms width σ_cor in t_−."""
    if sigma_cor <= 0:
        raise CfiValidationError(f"sigma_cor must be positive, got {sigma_cor}")
    return math.exp(-((delta_omega * sigma_cor) ** 2) / 2.0)


def visibility_from_probabilities(probabilities: np.ndarray) -> float:
    """(max − min)/(max + min) of a fringe sampled over φ_T."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    high, low = probabilities.max(), probabilities.min()
    if high + low <= 0:
        raise CfiValidationError("Fringe is identically zero")
    return float((high - low) / (high + low))


def no_dispersion_visibility(visibility: float) -> float:
    """
    Fringe visibility when the three coincidence peaks cannot be separated.

    The two side peaks add an unmodulated η²/8 to the central (η²/8)(1 + V cos φ_T),
    so the observed visibility is V/2 (at most 50%).
    """
    return visibility / 2.0
