import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import erfc

from decorators.error_handler import CfiValidationError, GridError
from numerics.amplitudes import JointSpectralAmplitude2D, JointTemporalAmplitude2D, SpectralAmplitude1D
from numerics.grids import FrequencyGrid, TimeGrid, check_grid_size
from schemas.state_schema import AbstractBiphotonState
from utils.log_utils import log
from utils.unit_utils import hz_to_rad_s

TAIL_MASS_LIMIT = 1e-6
TAIL_SIGMAS = 7.0


@dataclass(frozen=True)
class GaussianBiphotonParams:
    """
    sigma_coh: rms coherence time (s), set by the pump linewidth.
    sigma_cor: rms signal-idler correlation time (s), set by phase matching.
    omega_s0, omega_i0: carrier frequencies (rad/s), metadata only.
    """

    sigma_coh: float
    sigma_cor: float
    omega_s0: float = 0.0
    omega_i0: float = 0.0

    def __post_init__(self) -> None:
        if not (self.sigma_coh > 0 and self.sigma_cor > 0):
            raise CfiValidationError(
                f"sigma_coh and sigma_cor must be positive, got {self.sigma_coh}, {self.sigma_cor}"
            )
        if self.sigma_coh < self.sigma_cor:
            log(
                message=(
                    f"sigma_coh ({self.sigma_coh:.3g} s) < sigma_cor ({self.sigma_cor:.3g} s): "
                    "unusual for SPDC"
                ),
                level="WARNING",
            )


def _usable_half_width(*grids: FrequencyGrid | TimeGrid) -> float:
    """Largest half-width centered on zero that every grid covers."""
    widths = []
    for grid in grids:
        spacing = grid.d_omega if isinstance(grid, FrequencyGrid) else grid.d_t
        widths.append(grid.n // 2 * spacing - abs(grid.center) - spacing)
    return min(widths)


def _check_tail(half_width: float, rms: float, direction: str) -> None:
    tail = float(erfc(half_width / (math.sqrt(2.0) * rms)))
    if tail > TAIL_MASS_LIMIT:
        raise GridError(
            f"Grid too narrow along {direction}: tail mass {tail:.2e} exceeds {TAIL_MASS_LIMIT:g}"
        )


def gaussian_jsa(
    params: GaussianBiphotonParams, grid_s: FrequencyGrid, grid_i: FrequencyGrid
) -> JointSpectralAmplitude2D:
    """
    Ψ(ω_S, ω_I) ∝ exp(−(ω_S − ω_I)²σ_coh²)·exp(−(ω_S + ω_I)²σ_cor²/4), normalized.

    Raises:
        GridError: If more than 1e-6 of |Ψ|² falls off the grids along the difference
            (ω_S − ω_I) or sum (ω_S + ω_I) direction.
    """
    half_width = _usable_half_width(grid_s, grid_i)
    _check_tail(half_width, 1.0 / (2.0 * params.sigma_coh), "the difference direction (omega_s - omega_i)")
    _check_tail(half_width, 1.0 / params.sigma_cor, "the sum direction (omega_s + omega_i)")
    difference = np.subtract.outer(grid_s.points, grid_i.points)
    total = np.add.outer(grid_s.points, grid_i.points)
    values = np.exp(-(difference**2) * params.sigma_coh**2 - total**2 * params.sigma_cor**2 / 4.0)
    return JointSpectralAmplitude2D(
        grid_s=grid_s,
        grid_i=grid_i,
        values=values,
        omega_s0=params.omega_s0,
        omega_i0=params.omega_i0,
    ).normalize()


def gaussian_jta(
    params: GaussianBiphotonParams, grid_s: TimeGrid, grid_i: TimeGrid
) -> JointTemporalAmplitude2D:
    """
    Closed-form ψ(t_S, t_I) = exp(−(t_S+t_I)²/16σ_coh²)·exp(−(t_S−t_I)²/4σ_cor²)/√(2πσ_coh σ_cor),
    carrier phase not applied.

    Raises:
        GridError: If more than 1e-6 of the JTI falls off the time grids.
    """
    half_width = _usable_half_width(grid_s, grid_i)
    _check_tail(half_width, 2.0 * params.sigma_coh, "the t_S + t_I direction")
    _check_tail(half_width, params.sigma_cor, "the t_S - t_I direction")
    total = np.add.outer(grid_s.points, grid_i.points)
    difference = np.subtract.outer(grid_s.points, grid_i.points)
    values = np.exp(
        -(total**2) / (16.0 * params.sigma_coh**2) - difference**2 / (4.0 * params.sigma_cor**2)
    ) / math.sqrt(2.0 * math.pi * params.sigma_coh * params.sigma_cor)
    return JointTemporalAmplitude2D(
        grid_s=grid_s,
        grid_i=grid_i,
        values=values,
        omega_s0=params.omega_s0,
        omega_i0=params.omega_i0,
    ).normalize()


def gaussian_cw_jsa(sigma_cor: float, grid: FrequencyGrid) -> SpectralAmplitude1D:
    """
    cw ridge of the Gaussian biphoton, Ψ(ω) ∝ exp(−ω²σ_cor²): its JTI is a Gaussian
    of rms width σ_cor in t_−.
    """
    if sigma_cor <= 0:
        raise CfiValidationError(f"sigma_cor must be positive, got {sigma_cor}")
    _check_tail(_usable_half_width(grid), 1.0 / (2.0 * sigma_cor), "the frequency axis")
    values = np.exp(-((grid.points * sigma_cor) ** 2))
    return SpectralAmplitude1D(grid=grid, values=values).normalize()


def gaussian_joint_grids(
    params: GaussianBiphotonParams, max_n: int = 1024
) -> tuple[FrequencyGrid, FrequencyGrid]:
    """
    Smallest square grid (power of two, <= max_n) that holds the Gaussian JSA and,
    through duality, its JTA.

    Raises:
        GridError: If the σ_coh/σ_cor ratio needs more than `max_n` points per axis.
    """
    check_grid_size(max_n)
    half_width = TAIL_SIGMAS / params.sigma_cor
    d_omega = math.pi / (TAIL_SIGMAS * 2.0 * max(params.sigma_coh, params.sigma_cor))
    n = 8
    while n * d_omega / 2.0 < half_width + d_omega:
        n *= 2
        if n > max_n:
            raise GridError(
                f"Gaussian state needs more than {max_n} points per axis "
                f"(sigma_coh/sigma_cor = {params.sigma_coh / params.sigma_cor:.3g})"
            )
    grid = FrequencyGrid(n=n, d_omega=d_omega)
    return grid, grid


@dataclass
class GaussianState(AbstractBiphotonState):
    """Gaussian biphoton; cw ridge on `grid`, joint 2-D amplitude on demand."""

    params: GaussianBiphotonParams | None = None

    def __post_init__(self) -> None:
        self.config_dir = self.config_dir or Path(__file__).parent
        self.config_file = self.config_file or "gaussian_config.yaml"
        self.config = self._load_config()
        self.build()
        log(message=f"{self} initialized.", level="INFO")

    def build(self) -> None:
        self.params = GaussianBiphotonParams(
            sigma_coh=float(self.config["sigma_coh_s"]),
            sigma_cor=float(self.config["sigma_cor_s"]),
            omega_s0=hz_to_rad_s(float(self.config["signal_center_hz"])),
            omega_i0=hz_to_rad_s(float(self.config["idler_center_hz"])),
        )
        if self.grid is not None:
            self.jsa = gaussian_cw_jsa(self.params.sigma_cor, self.grid)

    def joint(self, max_n: int = 1024) -> JointSpectralAmplitude2D:
        if self.joint_jsa is None:
            grid_s, grid_i = gaussian_joint_grids(self.params, max_n)
            self.joint_jsa = gaussian_jsa(self.params, grid_s, grid_i)
        return self.joint_jsa
