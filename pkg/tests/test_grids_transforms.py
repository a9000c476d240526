import math

import numpy as np
import pytest

from decorators.error_handler import GridError
from numerics.amplitudes import JointSpectralAmplitude2D, SpectralAmplitude1D, TemporalAmplitude1D, norm_l2
from numerics.grids import FrequencyGrid, TimeGrid, check_duality, dual_time_grid, make_dual_grids
from numerics.transforms import jsa_to_jta_2d, jsa_to_jta_cw, jta_to_jsa_2d, jta_to_jsa_cw
from states.gaussian.gaussian_state import GaussianBiphotonParams, gaussian_jsa, gaussian_jta


@pytest.mark.parametrize("n", [4, 100, 0])
def test_grid_size_rejected(n):
    with pytest.raises(GridError):
        FrequencyGrid(n=n, d_omega=1.0)


def test_dual_grids_satisfy_duality():
    freq, time = make_dual_grids(1024, omega_span=2.0 * math.pi * 100e9)
    assert freq.d_omega * time.d_t * freq.n == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert time.convention == "cw-tminus"
    check_duality(freq, time)


def test_non_dual_grid_rejected():
    freq = FrequencyGrid(n=64, d_omega=1.0)
    with pytest.raises(GridError, match="not Fourier duals"):
        jsa_to_jta_cw(SpectralAmplitude1D(freq, np.ones(64)), TimeGrid(n=64, d_t=0.5))


def test_grid_points_are_centered():
    grid = FrequencyGrid(n=8, d_omega=0.5)
    assert grid.points[grid.n // 2] == 0.0
    assert grid.points[0] == -2.0
    assert grid.nearest_index(0.0) == 4


def test_cw_transform_is_unitary_and_invertible():
    grid = FrequencyGrid(n=256, d_omega=0.05)
    omega = grid.points
    psi = SpectralAmplitude1D(grid, np.exp(-(omega**2)) * np.exp(0.3j * omega**3)).normalize()
    jta = jsa_to_jta_cw(psi)
    assert jta.norm() == pytest.approx(1.0, abs=1e-12)
    back = jta_to_jsa_cw(jta)
    np.testing.assert_allclose(back.values, psi.values, atol=1e-12)


def test_flat_top_jta_peak_matches_sinc():
    """ψ(0) = √(ω_max/π) for a flat band of half-width ω_max."""
    grid = FrequencyGrid(n=4096, d_omega=0.01)
    omega_max = 2.0
    band = np.abs(grid.points) <= omega_max + 1e-12
    psi = SpectralAmplitude1D(grid, band.astype(float)).normalize()
    peak = jsa_to_jta_cw(psi).values[grid.n // 2]
    expected = math.sqrt(omega_max / math.pi)
    assert abs(peak) == pytest.approx(expected, rel=5e-3)


def test_gaussian_jsa_transforms_to_closed_form_jta():
    params = GaussianBiphotonParams(sigma_coh=2.0, sigma_cor=1.0)
    grid = FrequencyGrid(n=128, d_omega=12.0 / 128)
    jsa = gaussian_jsa(params, grid, grid)
    jta = jsa_to_jta_2d(jsa)
    expected = gaussian_jta(params, jta.grid_s, jta.grid_i)
    peak = np.abs(expected.values).max()
    assert np.abs(jta.values - expected.values).max() < 1e-6 * peak
    assert jta.grid_s.convention == "pulsed-2d"


def test_2d_round_trip_with_carrier():
    params = GaussianBiphotonParams(sigma_coh=2.0, sigma_cor=1.0, omega_s0=3.0, omega_i0=-1.0)
    grid = FrequencyGrid(n=128, d_omega=12.0 / 128)
    jsa = gaussian_jsa(params, grid, grid)
    jta = jsa_to_jta_2d(jsa, apply_carrier=True)
    assert jta.carrier_applied
    back = jta_to_jsa_2d(jta)
    assert isinstance(back, JointSpectralAmplitude2D)
    np.testing.assert_allclose(back.values, jsa.values, atol=1e-12)


def test_dual_time_grid_of_cw_grid(flat_top_grid):
    time = dual_time_grid(flat_top_grid)
    assert time.d_t == pytest.approx(2.0 * math.pi / (flat_top_grid.n * flat_top_grid.d_omega))


PARSEVAL_TOLERANCE = 1e-9


def smooth_profile(rng: np.random.Generator, axis: np.ndarray) -> np.ndarray:
    """Gaussian envelope with a random center, width and cubic phase on `axis`."""
    span = axis[-1] - axis[0]
    width = rng.uniform(0.03, 0.12) * span
    center = rng.uniform(-0.2, 0.2) * span
    x = (axis - center) / width
    phase = np.polynomial.polynomial.polyval(x, rng.uniform(-2.0, 2.0, size=4))
    return np.exp(-(x**2) / 2.0 + 1j * phase)


def test_cw_transforms_preserve_norm_for_random_amplitudes():
    rng = np.random.default_rng(11)
    freq, time = make_dual_grids(512, omega_span=200.0)
    for _ in range(25):
        jsa = SpectralAmplitude1D(freq, smooth_profile(rng, freq.points)).normalize()
        assert norm_l2(jsa_to_jta_cw(jsa)) == pytest.approx(1.0, rel=PARSEVAL_TOLERANCE)
        jta = TemporalAmplitude1D(time, smooth_profile(rng, time.points)).normalize()
        assert norm_l2(jta_to_jsa_cw(jta)) == pytest.approx(1.0, rel=PARSEVAL_TOLERANCE)


@pytest.mark.parametrize("apply_carrier", [False, True])
def test_2d_transforms_preserve_norm_for_random_amplitudes(apply_carrier):
    rng = np.random.default_rng(13)
    grid_s = FrequencyGrid(n=64, d_omega=0.25)
    grid_i = FrequencyGrid(n=128, d_omega=0.125)
    for _ in range(10):
        values = np.outer(smooth_profile(rng, grid_s.points), smooth_profile(rng, grid_i.points))
        values *= np.exp(1j * rng.uniform(-1.0, 1.0) * np.multiply.outer(grid_s.points, grid_i.points))
        jsa = JointSpectralAmplitude2D(
            grid_s, grid_i, values, omega_s0=rng.uniform(-3.0, 3.0), omega_i0=rng.uniform(-3.0, 3.0)
        ).normalize()
        jta = jsa_to_jta_2d(jsa, apply_carrier=apply_carrier)
        assert norm_l2(jta) == pytest.approx(1.0, rel=PARSEVAL_TOLERANCE)
        assert norm_l2(jta_to_jsa_2d(jta)) == pytest.approx(1.0, rel=PARSEVAL_TOLERANCE)
