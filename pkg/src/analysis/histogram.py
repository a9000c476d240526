"""Coincidence histogram of t_S − t_I from a time-tag stream."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from decorators.error_handler import CfiValidationError
from experiment.timetags import Channel, TimeTagStream
from numerics.amplitudes import check_columns
from utils.file_utils import read_file, write_file
from utils.log_utils import log

HISTOGRAM_COLUMNS = ["dt_s", "count"]
TICK_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    """Counts over bins centered at k·bin_width, |k·bin_width| ≤ window."""

    centers: np.ndarray
    counts: np.ndarray
    bin_width: float
    window: float

    def __post_init__(self) -> None:
        centers = np.asarray(self.centers, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.float64)
        if centers.shape != counts.shape or centers.ndim != 1:
            raise CfiValidationError("centers and counts must be 1-D arrays of equal length")
        if np.any(counts < 0):
            raise CfiValidationError("histogram counts must be >= 0")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def to_csv(self, path: str | Path) -> None:
        write_file(path=path, data={"dt_s": self.centers, "count": self.counts})

    @classmethod
    def from_csv(cls, path: str | Path) -> "CoincidenceHistogram":
        frame = check_columns(read_file(path=path), HISTOGRAM_COLUMNS, path)
        centers = frame["dt_s"].to_numpy()
        if centers.size < 2:
            raise CfiValidationError(f"{path}: a histogram needs at least two bins")
        return cls(
            centers=centers,
            counts=frame["count"].to_numpy(),
            bin_width=float(np.diff(centers).mean()),
            window=float(np.abs(centers).max()),
        )


def pair_nearest(signal: np.ndarray, idler: np.ndarray, max_ticks: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Unique nearest-neighbour pairing of two sorted tick arrays.

    Each signal tag takes its nearest idler tag; when several signal tags claim the same
    idler tag only the closest keeps it. Pairs further apart than `max_ticks` are dropped.
    Returns the paired (signal, idler) index arrays.
    """
    if not signal.size or not idler.size:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty
    s = signal.astype(np.int64)
    i = idler.astype(np.int64)
    right = np.clip(np.searchsorted(i, s), 0, i.size - 1)
    left = np.clip(right - 1, 0, i.size - 1)
    nearest = np.where(np.abs(s - i[left]) <= np.abs(s - i[right]), left, right)
    distance = np.abs(s - i[nearest])

    keep = np.flatnonzero(distance <= max_ticks)
    keep = keep[np.argsort(distance[keep], kind="stable")]
    _, first = np.unique(nearest[keep], return_index=True)
    chosen = np.sort(keep[first])
    return chosen, nearest[chosen]


def build_histogram(stream: TimeTagStream, window: float, bin_width: float) -> CoincidenceHistogram:
    """
    Histogram of t_S − t_I for uniquely paired tags with |t_S − t_I| ≤ window.

    Raises:
        CfiValidationError: Bin finer than the tagger tick or a non-positive window.
    """
    if bin_width < stream.tick * (1.0 - TICK_TOLERANCE):
        raise CfiValidationError(f"bin_width {bin_width:g} s is finer than the tagger tick {stream.tick:g} s")
    if not window > 0:
        raise CfiValidationError(f"window must be > 0, got {window}")
    half_bins = int(math.floor(window / bin_width + TICK_TOLERANCE))
    centers = np.arange(-half_bins, half_bins + 1) * bin_width
    edges = (np.arange(-half_bins, half_bins + 2) - 0.5) * bin_width

    signal = stream.channel_ticks(Channel.SIGNAL)
    idler = stream.channel_ticks(Channel.IDLER)
    s_index, i_index = pair_nearest(signal, idler, window / stream.tick)
    dt = (signal[s_index].astype(np.int64) - idler[i_index].astype(np.int64)) * stream.tick
    counts, _ = np.histogram(dt, bins=edges)
    if not len(stream):
        log(message="Empty time-tag stream; histogram has no counts", level="WARNING")
    log(message=f"{s_index.size} coincidences paired from {signal.size}/{idler.size} tags", level="INFO")
    return CoincidenceHistogram(centers=centers, counts=counts, bin_width=bin_width, window=window)
