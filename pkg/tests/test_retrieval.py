import math

import numpy as np
import pytest

from cfi.cfi_core import cfi_visibility_cw
from decorators.error_handler import CfiValidationError, GridError
from numerics.amplitudes import SpectralAmplitude1D, TemporalAmplitude1D
from numerics.grids import FrequencyGrid, TimeGrid
from numerics.transforms import jsa_to_jta_cw
from retrieval.canonical import canonicalize
from retrieval.phase_retrieval import MAX_RESTARTS, RetrievalResult, gerchberg_saxton, read_phase_csv
from states.flat_top.flat_top_state import FlatTopPhaseParams, flat_top_jsa
from utils.seed_utils import make_rng


def magnitudes(jsa: SpectralAmplitude1D) -> tuple[SpectralAmplitude1D, TemporalAmplitude1D]:
    jta = jsa_to_jta_cw(jsa)
    return (
        SpectralAmplitude1D(jsa.grid, np.abs(jsa.values)),
        TemporalAmplitude1D(jta.grid, np.abs(jta.values)),
    )


@pytest.fixture
def retrieval_grid(delta_omega) -> FrequencyGrid:
    return FrequencyGrid(n=1024, d_omega=delta_omega / 8)


def test_zero_phase_is_a_fixed_point(retrieval_grid):
    jsa = flat_top_jsa(FlatTopPhaseParams(phi=0.0), retrieval_grid)
    result = gerchberg_saxton(*magnitudes(jsa))
    assert result.converged
    assert result.iterations == 0
    canonical = canonicalize(result)
    np.testing.assert_allclose(canonical.phase[canonical.support], 0.0, atol=1e-3)


def test_true_phase_is_a_fixed_point():
    grid = FrequencyGrid(n=256, d_omega=0.05)
    omega = grid.points
    truth = 0.5 * omega**2 + 0.3 * omega**3
    jsa = SpectralAmplitude1D(grid, np.exp(-(omega**2)) * np.exp(1j * truth)).normalize()
    result = gerchberg_saxton(*magnitudes(jsa), init=truth, restarts=0)
    assert result.magnitude_residual < 1e-6


@pytest.fixture
def gaussian_benchmark() -> dict:
    """Random smooth phases on a Gaussian |Ψ|: share of seeds that must reach `residual`."""
    return {"seeds": range(10), "max_iter": 2000, "residual": 1e-4, "pass_fraction": 0.9}


@pytest.mark.slow
def test_random_smooth_phase_benchmark(gaussian_benchmark):
    grid = FrequencyGrid(n=256, d_omega=0.05)
    omega = grid.points
    passed = 0
    for seed in gaussian_benchmark["seeds"]:
        quadratic, cubic = make_rng(seed).uniform(-0.5, 0.5, size=2)
        truth = quadratic * omega**2 + cubic * omega**3
        jsa = SpectralAmplitude1D(grid, np.exp(-(omega**2)) * np.exp(1j * truth)).normalize()
        result = gerchberg_saxton(
            *magnitudes(jsa),
            max_iter=gaussian_benchmark["max_iter"],
            tol=gaussian_benchmark["residual"],
            seed=seed,
        )
        assert result.iterations <= gaussian_benchmark["max_iter"] * (MAX_RESTARTS + 1)
        passed += result.converged
    seeds = len(gaussian_benchmark["seeds"])
    assert passed >= gaussian_benchmark["pass_fraction"] * seeds


@pytest.mark.parametrize("init", ["zero", "random"])
def test_step_phase_recovered_in_visibility(retrieval_grid, delta_omega, init):
    jsa = flat_top_jsa(FlatTopPhaseParams(phi=math.pi), retrieval_grid)
    result = gerchberg_saxton(*magnitudes(jsa), init=init)
    assert result.converged or init == "random"
    expected = cfi_visibility_cw(jsa_to_jta_cw(jsa), delta_omega)
    recovered = cfi_visibility_cw(jsa_to_jta_cw(result.state()), delta_omega)
    assert recovered == pytest.approx(expected, abs=1e-2)
    assert recovered == pytest.approx(0.755, abs=1e-2)


def test_retrieval_rejects_bad_inputs(retrieval_grid):
    jsi, jti = magnitudes(flat_top_jsa(FlatTopPhaseParams(), retrieval_grid))
    with pytest.raises(GridError):
        gerchberg_saxton(jsi, TemporalAmplitude1D(TimeGrid(n=1024, d_t=1.0), jti.values))
    with pytest.raises(CfiValidationError, match="restarts"):
        gerchberg_saxton(jsi, jti, restarts=9)
    with pytest.raises(CfiValidationError, match="init"):
        gerchberg_saxton(jsi, jti, init=np.zeros(3))


def test_phase_csv_holds_support_only(tmp_path, retrieval_grid):
    jsa = flat_top_jsa(FlatTopPhaseParams(), retrieval_grid)
    result = gerchberg_saxton(*magnitudes(jsa))
    result.to_csv(tmp_path / "phase.csv")
    omega, phase = read_phase_csv(tmp_path / "phase.csv")
    assert omega.size == int(result.support.sum())
    assert np.all(np.abs(omega) <= FlatTopPhaseParams().omega_max * (1 + 1e-9))


def _gaussian_result(phase_fn) -> RetrievalResult:
    grid = FrequencyGrid(n=256, d_omega=0.05)
    omega = grid.points
    magnitude = np.exp(-(omega**2))
    magnitude /= math.sqrt(np.sum(magnitude**2) * grid.d_omega)
    support = magnitude > 1e-3 * magnitude.max()
    phase = np.where(support, np.angle(np.exp(1j * phase_fn(omega))), np.nan)
    return RetrievalResult(grid, magnitude, phase, 0.0, 0, True)


def _cubic(omega):
    return 0.5 * omega**2 + 0.3 * omega**3


def assert_same_phase(first: RetrievalResult, second: RetrievalResult) -> None:
    np.testing.assert_array_equal(first.support, second.support)
    difference = np.angle(np.exp(1j * (first.phase - second.phase)))[first.support]
    np.testing.assert_allclose(difference, 0.0, atol=1e-9)


@pytest.mark.parametrize(
    "variant",
    [
        lambda omega: _cubic(omega) + 1.3,
        lambda omega: _cubic(omega) + 0.7 * omega,
        lambda omega: -_cubic(-omega),
        lambda omega: -_cubic(-omega) - 0.4 * omega + 2.0,
    ],
    ids=["global-phase", "ramp", "reflection", "all"],
)
def test_canonical_form_removes_trivial_ambiguities(variant):
    reference = canonicalize(_gaussian_result(_cubic))
    assert_same_phase(canonicalize(_gaussian_result(variant)), reference)


def test_canonicalize_is_idempotent():
    once = canonicalize(_gaussian_result(_cubic))
    assert_same_phase(canonicalize(once), once)
    assert once.phase[once.grid.n // 2] == 0.0


def test_asymmetric_magnitude_is_never_reflected():
    result = _gaussian_result(_cubic)
    shifted = np.roll(result.magnitude, 3)
    lopsided = RetrievalResult(result.grid, shifted, np.roll(result.phase, 3), 0.0, 0, True)
    reflected = RetrievalResult(
        result.grid, shifted, np.roll(-np.roll(result.phase[::-1], 1), 3), 0.0, 0, True
    )
    first, second = canonicalize(lopsided), canonicalize(reflected)
    difference = np.angle(np.exp(1j * (first.phase - second.phase)))[first.support]
    assert np.max(np.abs(difference)) > 1e-3
