import math
import time

import numpy as np
import pytest

from analysis.fringe_fit import (
    VisibilityEstimate,
    fit_fringe,
    read_fit_report,
    scan_visibility_minmax,
    summarize_estimates,
    threshold_sigmas,
    visibility_minmax,
)
from analysis.histogram import CoincidenceHistogram, build_histogram, pair_nearest
from analysis.mapping import frequency_resolution, map_time_to_frequency
from analysis.peaks import PeakSet, find_peaks
from cfi.cfi_core import CLASSICAL_THRESHOLD, CfiConfig
from decorators.error_handler import CfiValidationError
from experiment.experiment_models import DriftModel
from experiment.scans import FringeScan, simulate_drift_scan
from experiment.timetags import TimeTagStream
from utils.unit_utils import rad_per_min_to_rad_per_s

TICK = 128e-12


def synthetic_histogram(bin_width=50e-12, sep=1.27e-9, sigma=170e-12, heights=(500, 1000, 500)):
    half = int(3e-9 / bin_width)
    centers = np.arange(-half, half + 1) * bin_width
    counts = np.full(centers.shape, 2.0)
    for height, center in zip(heights, (-sep, 0.0, sep)):
        counts += height * np.exp(-((centers - center) ** 2) / (2 * sigma**2))
    return CoincidenceHistogram(centers=centers, counts=counts, bin_width=bin_width, window=half * bin_width)


def test_coincident_tags_fill_center_bin():
    stream = TimeTagStream(channels=[0, 1], ticks=[5, 5], tick=TICK, duration=1e-6)
    hist = build_histogram(stream, window=1e-9, bin_width=TICK)
    assert hist.total == 1
    assert hist.counts[hist.centers.size // 2] == 1
    assert hist.centers[hist.centers.size // 2] == 0.0


def test_histogram_bin_cannot_beat_tick():
    stream = TimeTagStream(channels=[0, 1], ticks=[5, 5], tick=TICK, duration=1e-6)
    with pytest.raises(CfiValidationError, match="finer"):
        build_histogram(stream, window=1e-9, bin_width=TICK / 2)


def test_pairing_is_unique():
    signal = np.array([10, 11, 50], dtype=np.uint64)
    idler = np.array([12, 100], dtype=np.uint64)
    s_index, i_index = pair_nearest(signal, idler, max_ticks=5)
    assert list(s_index) == [1]
    assert list(i_index) == [0]


def test_coincidences_never_exceed_singles():
    rng = np.random.default_rng(1)
    ticks = np.sort(rng.integers(0, 10_000, 400))
    channels = rng.integers(0, 2, 400)
    stream = TimeTagStream(channels=channels, ticks=ticks, tick=TICK, duration=10_000 * TICK)
    hist = build_histogram(stream, window=20 * TICK, bin_width=TICK)
    assert hist.total <= min(np.sum(channels == 0), np.sum(channels == 1))


def test_histogram_csv_round_trip(tmp_path):
    hist = synthetic_histogram()
    hist.to_csv(tmp_path / "histogram.csv")
    back = CoincidenceHistogram.from_csv(tmp_path / "histogram.csv")
    np.testing.assert_allclose(back.counts, hist.counts)
    assert back.bin_width == pytest.approx(hist.bin_width)


def test_three_peaks_located():
    hist = synthetic_histogram()
    peaks = find_peaks(hist, 1.27e-9)
    assert len(peaks) == 3
    np.testing.assert_allclose(peaks.centers, [-1.27e-9, 0.0, 1.27e-9], atol=hist.bin_width / 2)
    assert peaks.areas[1] == pytest.approx(2.0 * peaks.areas[0], rel=0.05)
    assert peaks.separations == pytest.approx([1.27e-9, 1.27e-9], abs=hist.bin_width)


def test_single_peak_without_dispersion():
    hist = synthetic_histogram(heights=(0, 1000, 0))
    peaks = find_peaks(hist, 1.27e-9)
    assert len(peaks) == 1
    assert peaks.centers[0] == pytest.approx(0.0, abs=hist.bin_width / 2)


def test_flat_histogram_has_no_peaks():
    hist = synthetic_histogram(heights=(0, 0, 0))
    assert len(find_peaks(hist, 1.27e-9)) == 0


def test_peak_separation_must_exceed_three_bins():
    with pytest.raises(CfiValidationError, match="three bins"):
        find_peaks(synthetic_histogram(), 100e-12)


def test_peak_set_csv(tmp_path):
    peaks = PeakSet(centers=[1.0, -1.0], areas=[3.0, 4.0], rms_widths=[0.1, 0.2])
    assert list(peaks.centers) == [-1.0, 1.0]
    peaks.to_csv(tmp_path / "peaks.csv")
    assert list(PeakSet.from_csv(tmp_path / "peaks.csv").areas) == [4.0, 3.0]


def test_side_peak_maps_to_shift(beta2):
    mapping = map_time_to_frequency(1.27e-9, beta2)
    assert mapping.detuning / (2 * math.pi) == pytest.approx(15.65e9, rel=5e-3)
    assert map_time_to_frequency(0.0, beta2).detuning == 0.0
    assert map_time_to_frequency(np.array([-1e-9, 1e-9]), beta2).detuning.shape == (2,)


def test_frequency_resolution_of_reference_setup(beta2):
    resolution = frequency_resolution(beta2, 120e-12, 120e-12) / (2 * math.pi)
    assert resolution == pytest.approx(2.09e9, rel=0.01)
    assert resolution == pytest.approx(1.8e9, rel=0.3)
    assert map_time_to_frequency(0.0, beta2, jitter=170e-12).resolution == pytest.approx(
        170e-12 / beta2
    )


def test_minmax_estimator():
    assert visibility_minmax(200, 0) == VisibilityEstimate(v=1.0, sigma_v=0.0, method="minmax")
    assert visibility_minmax(50, 50).v == 0.0
    estimate = visibility_minmax(1470, 30)
    assert estimate.v == pytest.approx(0.96)
    expected_sigma = 2.0 * math.sqrt(1470 * 30**2 + 30 * 1470**2) / 1500**2
    assert estimate.sigma_v == pytest.approx(expected_sigma)
    with pytest.raises(CfiValidationError, match="undefined"):
        visibility_minmax(0, 0)


def test_threshold_sigmas():
    assert threshold_sigmas(VisibilityEstimate(0.807, 0.01, "fit")) == pytest.approx(
        (0.807 - CLASSICAL_THRESHOLD) / 0.01
    )
    assert threshold_sigmas(VisibilityEstimate(1.0, 0.0, "minmax")) == math.inf


def _noiseless_scan(amplitude=100.0, visibility=0.93, offset=0.4, points=50):
    phi = np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)
    counts = amplitude * (1.0 + visibility * np.cos(phi + offset))
    return FringeScan(phi_t=phi, coincidences=counts, integration=30.0)


def test_fit_recovers_noiseless_fringe(tmp_path):
    fit = fit_fringe(_noiseless_scan())
    assert fit.visibility.v == pytest.approx(0.93, abs=1e-6)
    assert fit.amplitude == pytest.approx(100.0, rel=1e-6)
    assert fit.phase_offset == pytest.approx(0.4, abs=1e-6)
    fit.to_csv(tmp_path / "fit.csv")
    report = read_fit_report(tmp_path / "fit.csv")
    assert set(report) == {"A", "V", "phase_offset"}
    assert report["V"][0] == pytest.approx(0.93, abs=1e-6)


@pytest.mark.parametrize("visibility, needed", [(0.93, 16), (0.0, 12)])
def test_fit_error_bars_cover_truth(visibility, needed):
    phi = np.linspace(0.0, 2.0 * math.pi, 40, endpoint=False)
    mean = 1000.0 * (1.0 + visibility * np.cos(phi))
    covered = 0
    for seed in range(20):
        counts = np.random.default_rng(seed).poisson(mean)
        fit = fit_fringe(FringeScan(phi_t=phi, coincidences=counts, integration=1.0))
        if visibility == 0.0:
            covered += abs(fit.visibility.v) <= 2.0 * fit.visibility.sigma_v
        else:
            covered += abs(fit.visibility.v - visibility) <= 2.0 * fit.visibility.sigma_v
    assert covered >= needed


def test_fit_needs_points_and_phase_span():
    with pytest.raises(CfiValidationError, match="at least 5"):
        fit_fringe(FringeScan(phi_t=[0, 1, 2, 3], coincidences=[1, 2, 3, 4], integration=1.0))
    narrow = np.linspace(0.0, 1.0, 10)
    with pytest.raises(CfiValidationError, match="at least π"):
        fit_fringe(FringeScan(phi_t=narrow, coincidences=np.ones(10), integration=1.0))


def test_fringe_scan_csv(tmp_path):
    scan = _noiseless_scan(points=8)
    scan.to_csv(tmp_path / "scan.csv")
    back = FringeScan.from_csv(tmp_path / "scan.csv")
    np.testing.assert_allclose(back.coincidences, scan.coincidences)
    np.testing.assert_allclose(back.integration, 30.0)


@pytest.mark.slow
def test_drift_scans_resolve_visibility_above_threshold(delta_omega, ideal_detector):
    drift = DriftModel(rate=rad_per_min_to_rad_per_s(0.3))
    cfg = CfiConfig(delta_omega)
    start = time.perf_counter()
    estimates = [
        scan_visibility_minmax(
            simulate_drift_scan(0.96, cfg, ideal_detector, drift, 200.0, 30.0, 42, seed=seed)
        )
        for seed in range(23)
    ]
    assert time.perf_counter() - start < 60.0
    summary = summarize_estimates(estimates)
    assert summary.n == 23
    assert summary.mean == pytest.approx(0.96, abs=0.02)
    assert 0.003 < summary.std < 0.02
    assert summary.threshold_sigmas >= 20.0


def test_summary_needs_two_estimates():
    with pytest.raises(CfiValidationError):
        summarize_estimates([0.9])
