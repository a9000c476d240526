import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from decorators.error_handler import CfiValidationError, GridError
from numerics.amplitudes import SpectralAmplitude1D
from numerics.grids import FrequencyGrid
from schemas.state_schema import AbstractBiphotonState
from utils.log_utils import log
from utils.unit_utils import TWO_PI, hz_to_rad_s

EDGE_TOLERANCE = 1e-12


def canonical_phase(phi: float) -> float:
    """φ reduced to [0, 2π) and rounded to 1e-12 rad, so φ and φ + 2π give identical samples."""
    return float(np.round(np.mod(phi, TWO_PI), 12)) % TWO_PI


@dataclass(frozen=True)
class FlatTopPhaseParams:
    """Flat-top spectrum: phase 0 for |ω| <= omega_1, phase phi for omega_1 < |ω| <= omega_max."""

    omega_max: float = hz_to_rad_s(160e9)
    omega_1: float = hz_to_rad_s(80e9)
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.omega_1 < self.omega_max:
            raise CfiValidationError(
                f"Need 0 < omega_1 < omega_max, got {self.omega_1} and {self.omega_max}"
            )
        if not math.isfinite(self.phi):
            raise CfiValidationError(f"phi must be finite, got {self.phi}")


def flat_top_jsa(
    params: FlatTopPhaseParams, grid: FrequencyGrid, guard: float = 0.0
) -> SpectralAmplitude1D:
    """
    Normalized flat-top cw JSA with a step spectral phase.

    Args:
        params: Band edges and step phase.
        grid: Frequency grid; must cover ±(omega_max + guard).
        guard: Empty band required beyond ±omega_max (pass 2·ΔΩ for shift overlaps).

    Raises:
        GridError: If the grid does not hold the band plus its guard.
    """
    reach = params.omega_max + guard
    points = grid.points
    if points[0] > -reach or points[-1] < reach:
        raise GridError(
            f"Grid [{points[0]:.6g}, {points[-1]:.6g}] rad/s does not cover ±{reach:.6g} rad/s"
        )
    detuning = np.abs(points)
    slack = EDGE_TOLERANCE * params.omega_max
    inner = detuning <= params.omega_1 + slack
    outer = ~inner & (detuning <= params.omega_max + slack)
    values = np.where(inner, 1.0 + 0j, 0j) + np.where(
        outer, np.exp(1j * canonical_phase(params.phi)), 0j
    )
    return SpectralAmplitude1D(grid=grid, values=values).normalize()


def flat_top_visibility_closed_form(omega_max: float, delta_omega: float, phi: float) -> float:
    """
    V(φ) = (2ω_max − 3ΔΩ + 2ΔΩ·cos φ)/(2ω_max) for omega_1 = omega_max/2 and ΔΩ <= omega_1.
    """
    return (2 * omega_max - 3 * delta_omega + 2 * delta_omega * math.cos(phi)) / (2 * omega_max)


@dataclass
class FlatTopState(AbstractBiphotonState):
    """Flat 2·omega_max spectrum with a programmable step phase."""

    params: FlatTopPhaseParams | None = None
    guard: float = 0.0

    def __post_init__(self) -> None:
        self.config_dir = self.config_dir or Path(__file__).parent
        self.config_file = self.config_file or "flat_top_config.yaml"
        self.config = self._load_config()
        self.build()
        log(message=f"{self} initialized.", level="INFO")

    def build(self) -> None:
        self.params = FlatTopPhaseParams(
            omega_max=hz_to_rad_s(float(self.config["omega_max_hz"])),
            omega_1=hz_to_rad_s(float(self.config["omega_1_hz"])),
            phi=float(self.config["phi"]),
        )
        if self.grid is None:
            raise GridError(f"{self} needs a frequency grid")
        self.jsa = flat_top_jsa(self.params, self.grid, self.guard)
