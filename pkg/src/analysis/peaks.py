"""Three-peak detection in coincidence histograms."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from analysis.histogram import CoincidenceHistogram
from decorators.error_handler import CfiValidationError
from numerics.amplitudes import check_columns
from utils.file_utils import read_file, write_file
from utils.log_utils import log

PEAK_COLUMNS = ["center_s", "area", "rms_s"]
MAX_PEAKS = 3
THRESHOLD_FACTOR = 5.0
CENTROID_BINS = 3


@dataclass(frozen=True, eq=False)
class PeakSet:
    """Peaks sorted by center (s) with background-subtracted areas and rms widths (s)."""

    centers: np.ndarray
    areas: np.ndarray
    rms_widths: np.ndarray

    def __post_init__(self) -> None:
        centers = np.asarray(self.centers, dtype=np.float64)
        order = np.argsort(centers, kind="stable")
        areas = np.asarray(self.areas, dtype=np.float64)[order]
        if np.any(areas < 0):
            raise CfiValidationError("peak areas must be >= 0")
        object.__setattr__(self, "centers", centers[order])
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "rms_widths", np.asarray(self.rms_widths, dtype=np.float64)[order])

    def __len__(self) -> int:
        return int(self.centers.size)

    @property
    def separations(self) -> np.ndarray:
        return np.diff(self.centers)

    def to_csv(self, path: str | Path) -> None:
        write_file(path=path, data={"center_s": self.centers, "area": self.areas, "rms_s": self.rms_widths})

    @classmethod
    def from_csv(cls, path: str | Path) -> "PeakSet":
        frame = check_columns(read_file(path=path), PEAK_COLUMNS, path)
        return cls(frame["center_s"].to_numpy(), frame["area"].to_numpy(), frame["rms_s"].to_numpy())


def peak_fractions(peaks: PeakSet) -> np.ndarray:
    """Area of each peak over the summed area of the set."""
    total = peaks.areas.sum()
    if total <= 0:
        raise CfiValidationError("Peak set holds no area")
    return peaks.areas / total


def _window_stats(counts: np.ndarray, centers: np.ndarray, lo: int, hi: int) -> tuple[float, float]:
    """Area and rms width over bins [lo, hi] after removing a line through the flanking bins."""
    left = counts[max(lo - 1, 0)]
    right = counts[min(hi + 1, counts.size - 1)]
    index = np.arange(lo, hi + 1)
    background = np.interp(index, [lo - 1, hi + 1], [left, right])
    net = np.clip(counts[lo : hi + 1] - background, 0.0, None)
    area = float(net.sum())
    if area <= 0:
        return 0.0, 0.0
    mean = float(np.dot(net, centers[lo : hi + 1]) / area)
    rms = float(np.sqrt(np.dot(net, (centers[lo : hi + 1] - mean) ** 2) / area))
    return area, rms


def find_peaks(hist: CoincidenceHistogram, expected_sep: float) -> PeakSet:
    """
    Up to three local maxima above 5× the median background.

    Centers are centroids over ±3 bins; areas sum a window of half the expected
    separation around each center, minus a linear background through its flanks.
    """
    bin_width = hist.bin_width
    if not expected_sep > 3.0 * bin_width:
        raise CfiValidationError(
            f"expected_sep {expected_sep:g} s must exceed three bins ({3.0 * bin_width:g} s)"
        )
    counts = hist.counts
    threshold = THRESHOLD_FACTOR * max(float(np.median(counts)), 1.0)
    spacing = max(1, int(0.5 * expected_sep / bin_width))
    candidates, properties = signal.find_peaks(counts, height=threshold, distance=spacing)
    if not candidates.size:
        log(message="No coincidence peak above threshold", level="WARNING")
        return PeakSet(np.empty(0), np.empty(0), np.empty(0))

    strongest = candidates[np.argsort(properties["peak_heights"])[::-1][:MAX_PEAKS]]
    half = max(CENTROID_BINS, int(0.5 * expected_sep / bin_width) - 1)
    centers, areas, widths = [], [], []
    for peak in strongest:
        lo, hi = max(peak - CENTROID_BINS, 0), min(peak + CENTROID_BINS, counts.size - 1)
        weights = counts[lo : hi + 1]
        centers.append(float(np.dot(weights, hist.centers[lo : hi + 1]) / weights.sum()))
        area, rms = _window_stats(counts, hist.centers, max(peak - half, 0), min(peak + half, counts.size - 1))
        areas.append(area)
        widths.append(rms)
    return PeakSet(np.array(centers), np.array(areas), np.array(widths))
