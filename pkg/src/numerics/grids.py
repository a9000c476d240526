"""Uniform frequency and time grids and their Fourier duality.

Both cw and pulsed transforms use the kernel e^{∓iωt}, so every dual pair obeys
``d_t * d_omega * n == 2π``. The ``convention`` recorded on a TimeGrid only labels
its axis (t_− for cw states, t_S / t_I for pulsed 2-D states).
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from decorators.error_handler import GridError

TWO_PI = 2.0 * math.pi
MIN_POINTS = 8
DUALITY_TOLERANCE = 1e-9

GridConvention = Literal["pulsed-2d", "cw-tminus"]
CONVENTIONS: tuple[str, ...] = ("pulsed-2d", "cw-tminus")


def check_grid_size(n: int) -> None:
    """Grid sizes are powers of two, at least 8 (never padded silently)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise GridError(f"Grid size must be an integer, got {n!r}")
    if n < MIN_POINTS:
        raise GridError(f"Grid size must be >= {MIN_POINTS}, got {n}")
    if n & (n - 1):
        raise GridError(f"Grid size must be a power of two, got {n}")


def _check_spacing(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0:
        raise GridError(f"{name} must be finite and positive, got {value}")


@dataclass(frozen=True)
class FrequencyGrid:
    """Detuning grid ω_k = center + (k − n/2)·d_omega, k = 0..n−1 (rad/s)."""

    n: int
    d_omega: float
    center: float = 0.0

    def __post_init__(self) -> None:
        check_grid_size(self.n)
        _check_spacing("d_omega", self.d_omega)

    @property
    def points(self) -> np.ndarray:
        return self.center + (np.arange(self.n) - self.n // 2) * self.d_omega

    @property
    def span(self) -> float:
        return self.n * self.d_omega

    @property
    def half_width(self) -> float:
        """Distance from the center to the outermost (lowest) grid point."""
        return self.n // 2 * self.d_omega

    def nearest_index(self, omega: float) -> int:
        return int(round((omega - self.center) / self.d_omega)) + self.n // 2


@dataclass(frozen=True)
class TimeGrid:
    """Time grid t_k = center + (k − n/2)·d_t (s)."""

    n: int
    d_t: float
    center: float = 0.0
    convention: GridConvention = "cw-tminus"

    def __post_init__(self) -> None:
        check_grid_size(self.n)
        _check_spacing("d_t", self.d_t)
        if self.convention not in CONVENTIONS:
            raise GridError(f"Unknown grid convention '{self.convention}'")

    @property
    def points(self) -> np.ndarray:
        return self.center + (np.arange(self.n) - self.n // 2) * self.d_t

    @property
    def span(self) -> float:
        return self.n * self.d_t


def dual_time_grid(
    grid: FrequencyGrid, convention: GridConvention = "cw-tminus", center: float = 0.0
) -> TimeGrid:
    return TimeGrid(
        n=grid.n, d_t=TWO_PI / (grid.n * grid.d_omega), center=center, convention=convention
    )


def dual_frequency_grid(grid: TimeGrid, center: float = 0.0) -> FrequencyGrid:
    return FrequencyGrid(n=grid.n, d_omega=TWO_PI / (grid.n * grid.d_t), center=center)


def check_duality(freq: FrequencyGrid, time: TimeGrid) -> None:
    """Raise GridError unless the two grids are Fourier duals."""
    if freq.n != time.n:
        raise GridError(f"Grid sizes differ: {freq.n} frequency vs {time.n} time points")
    product = freq.d_omega * time.d_t * freq.n
    if abs(product - TWO_PI) > DUALITY_TOLERANCE * TWO_PI:
        raise GridError(
            f"Grids are not Fourier duals: d_t*d_omega*n = {product:.12g}, expected 2π"
        )


def make_dual_grids(
    n: int, omega_span: float, convention: GridConvention = "cw-tminus"
) -> tuple[FrequencyGrid, TimeGrid]:
    """
    Build a frequency grid of `n` points covering `omega_span` (rad/s) and its dual time grid.

    Args:
        n: Point count, a power of two >= 8.
        omega_span: Total frequency extent n·d_omega (rad/s).
        convention: Axis label of the time grid, "cw-tminus" or "pulsed-2d".

    Returns:
        (FrequencyGrid, TimeGrid) with d_t = 2π / (n·d_omega), both centered on zero.

    Raises:
        GridError: For n < 8, non-power-of-two n, non-positive span or unknown convention.
    """
    check_grid_size(n)
    _check_spacing("omega_span", omega_span)
    if convention not in CONVENTIONS:
        raise GridError(f"Unknown grid convention '{convention}'")
    freq = FrequencyGrid(n=n, d_omega=omega_span / n)
    return freq, dual_time_grid(freq, convention)
