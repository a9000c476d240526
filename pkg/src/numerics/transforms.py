"""
Normalized discrete Fourier transforms between spectral and temporal amplitudes.

cw:      ψ(t_−)     = (1/√(2π)) ∫dω Ψ(ω) e^{−iωt_−}
pulsed:  ψ(t_S,t_I) = (1/2π) ∫∫dω_S dω_I Ψ(ω_S,ω_I) e^{−i(ω_S t_S − ω_I t_I)}
                      × e^{−i(ω_S0 t_S + ω_I0 t_I)}   (carrier, optional)

Sums are midpoint rules on dual grids, which makes each transform an exact,
unitary DFT: norms are preserved to rounding error and inverses are exact.
"""

import math

import numpy as np

from numerics.amplitudes import (
    JointSpectralAmplitude2D,
    JointTemporalAmplitude2D,
    SpectralAmplitude1D,
    TemporalAmplitude1D,
)
from numerics.grids import (
    FrequencyGrid,
    TimeGrid,
    check_duality,
    dual_frequency_grid,
    dual_time_grid,
)

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def centered_dft(
    values: np.ndarray,
    x: np.ndarray,
    x0: float,
    y: np.ndarray,
    y0: float,
    sign: int,
    axis: int = 0,
) -> np.ndarray:
    """
    Σ_k values_k · exp(sign·i·x_k·y_j) along `axis`.

    `x` and `y` are centered grids (x_k = x0 + (k − n/2)dx, likewise y) with
    n·dx·dy = 2π and n divisible by 4, so the double sum factors into one FFT
    between two diagonal phase factors.
    """
    n = values.shape[axis]
    alternating = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    pre = alternating * np.exp(sign * 1j * y0 * (x - x0))
    post = alternating * np.exp(sign * 1j * x0 * y)
    shape = [1] * values.ndim
    shape[axis] = n
    weighted = values * pre.reshape(shape)
    if sign < 0:
        summed = np.fft.fft(weighted, axis=axis)
    else:
        summed = np.fft.ifft(weighted, axis=axis) * n
    return summed * post.reshape(shape)


def jsa_to_jta_cw(
    psi: SpectralAmplitude1D, time_grid: TimeGrid | None = None
) -> TemporalAmplitude1D:
    """
    cw JSA → JTA on the dual t_− grid (centered on zero unless `time_grid` is given).

    Raises:
        GridError: If `time_grid` is not the Fourier dual of the spectral grid.
    """
    time_grid = time_grid or dual_time_grid(psi.grid)
    check_duality(psi.grid, time_grid)
    values = centered_dft(
        psi.values, psi.grid.points, psi.grid.center, time_grid.points, time_grid.center, -1
    )
    return TemporalAmplitude1D(
        grid=time_grid, values=values * psi.grid.d_omega / SQRT_TWO_PI, raw_norm=psi.raw_norm
    )


def jta_to_jsa_cw(
    psi: TemporalAmplitude1D, freq_grid: FrequencyGrid | None = None
) -> SpectralAmplitude1D:
    """Inverse of `jsa_to_jta_cw`."""
    freq_grid = freq_grid or dual_frequency_grid(psi.grid)
    check_duality(freq_grid, psi.grid)
    values = centered_dft(
        psi.values, psi.grid.points, psi.grid.center, freq_grid.points, freq_grid.center, +1
    )
    return SpectralAmplitude1D(
        grid=freq_grid, values=values * psi.grid.d_t / SQRT_TWO_PI, raw_norm=psi.raw_norm
    )


def _carrier(grid_s: TimeGrid, grid_i: TimeGrid, omega_s0: float, omega_i0: float) -> np.ndarray:
    return np.exp(-1j * np.add.outer(omega_s0 * grid_s.points, omega_i0 * grid_i.points))


def jsa_to_jta_2d(
    psi: JointSpectralAmplitude2D,
    time_grid_s: TimeGrid | None = None,
    time_grid_i: TimeGrid | None = None,
    apply_carrier: bool = False,
) -> JointTemporalAmplitude2D:
    """
    Pulsed JSA → JTA. ω_S pairs with e^{−iω_S t_S}, ω_I with e^{+iω_I t_I}.

    Args:
        psi: Joint spectral amplitude.
        time_grid_s, time_grid_i: Dual grids; default to zero-centered duals.
        apply_carrier: Multiply by e^{−i(ω_S0 t_S + ω_I0 t_I)}; off by default since
            no coincidence probability depends on it.
    """
    grid_s = time_grid_s or dual_time_grid(psi.grid_s, "pulsed-2d")
    grid_i = time_grid_i or dual_time_grid(psi.grid_i, "pulsed-2d")
    check_duality(psi.grid_s, grid_s)
    check_duality(psi.grid_i, grid_i)
    values = centered_dft(
        psi.values, psi.grid_s.points, psi.grid_s.center, grid_s.points, grid_s.center, -1, axis=0
    )
    values = centered_dft(
        values, psi.grid_i.points, psi.grid_i.center, grid_i.points, grid_i.center, +1, axis=1
    )
    values *= psi.grid_s.d_omega * psi.grid_i.d_omega / (2.0 * math.pi)
    if apply_carrier:
        values *= _carrier(grid_s, grid_i, psi.omega_s0, psi.omega_i0)
    return JointTemporalAmplitude2D(
        grid_s=grid_s,
        grid_i=grid_i,
        values=values,
        omega_s0=psi.omega_s0,
        omega_i0=psi.omega_i0,
        carrier_applied=apply_carrier,
        raw_norm=psi.raw_norm,
    )


def jta_to_jsa_2d(
    psi: JointTemporalAmplitude2D,
    freq_grid_s: FrequencyGrid | None = None,
    freq_grid_i: FrequencyGrid | None = None,
) -> JointSpectralAmplitude2D:
    """Inverse of `jsa_to_jta_2d`; a carrier phase, if applied, is removed first."""
    grid_s = freq_grid_s or dual_frequency_grid(psi.grid_s)
    grid_i = freq_grid_i or dual_frequency_grid(psi.grid_i)
    check_duality(grid_s, psi.grid_s)
    check_duality(grid_i, psi.grid_i)
    values = np.array(psi.values)
    if psi.carrier_applied:
        values *= np.conj(_carrier(psi.grid_s, psi.grid_i, psi.omega_s0, psi.omega_i0))
    values = centered_dft(
        values, psi.grid_s.points, psi.grid_s.center, grid_s.points, grid_s.center, +1, axis=0
    )
    values = centered_dft(
        values, psi.grid_i.points, psi.grid_i.center, grid_i.points, grid_i.center, -1, axis=1
    )
    values *= psi.grid_s.d_t * psi.grid_i.d_t / (2.0 * math.pi)
    return JointSpectralAmplitude2D(
        grid_s=grid_s,
        grid_i=grid_i,
        values=values,
        omega_s0=psi.omega_s0,
        omega_i0=psi.omega_i0,
        raw_norm=psi.raw_norm,
    )
