"""
Visibility estimation from fringe scans.

The fit model is A·[1 + V·cos(φ_T + δ)] with Poisson weights; the min/max estimator
uses V = (max − min)/(max + min) with Poisson error propagation.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
from scipy.optimize import curve_fit

from cfi.cfi_core import CLASSICAL_THRESHOLD
from decorators.error_handler import CfiRuntimeError, CfiValidationError
from experiment.scans import FringeScan
from numerics.amplitudes import check_columns
from utils.file_utils import read_file, write_file
from utils.log_utils import log

FIT_REPORT_COLUMNS = ["param", "value", "sigma"]
MIN_POINTS = 5
MIN_PHASE_SPAN = math.pi
VISIBILITY_EDGE = 1.0 - 1e-9


@dataclass(frozen=True)
class VisibilityEstimate:
    v: float
    sigma_v: float
    method: Literal["minmax", "fit"]

    def __post_init__(self) -> None:
        if not -1.0 <= self.v <= 1.0:
            raise CfiValidationError(f"visibility must lie in [-1, 1], got {self.v}")
        if not self.sigma_v >= 0:
            raise CfiValidationError(f"sigma_v must be >= 0, got {self.sigma_v}")

    def __str__(self) -> str:
        return f"V = {self.v:.3f} ± {self.sigma_v:.3f} ({self.method})"


@dataclass(frozen=True, eq=False)
class FringeFit:
    amplitude: float
    amplitude_sigma: float
    visibility: VisibilityEstimate
    phase_offset: float
    phase_sigma: float
    covariance: np.ndarray

    def to_csv(self, path: str | Path) -> None:
        write_file(
            path=path,
            data={
                "param": ["A", "V", "phase_offset"],
                "value": [self.amplitude, self.visibility.v, self.phase_offset],
                "sigma": [self.amplitude_sigma, self.visibility.sigma_v, self.phase_sigma],
            },
        )


@dataclass(frozen=True)
class VisibilitySummary:
    """Mean and sample standard deviation of repeated estimates."""

    mean: float
    std: float
    n: int

    @property
    def threshold_sigmas(self) -> float:
        return (self.mean - CLASSICAL_THRESHOLD) / self.std if self.std > 0 else math.inf


def read_fit_report(path: str | Path) -> dict[str, tuple[float, float]]:
    """`param,value,sigma` rows as {param: (value, sigma)}."""
    frame = read_file(path=path)
    if list(frame.columns) != FIT_REPORT_COLUMNS:
        check_columns(frame, FIT_REPORT_COLUMNS, path)
    numbers = check_columns(frame[["value", "sigma"]], ["value", "sigma"], path)
    return {
        str(param): (float(value), float(sigma))
        for param, value, sigma in zip(frame["param"], numbers["value"], numbers["sigma"])
    }


def visibility_minmax(max_count: float, min_count: float) -> VisibilityEstimate:
    """
    V = (max − min)/(max + min), σ_V = 2·√(max·min² + min·max²)/(max + min)².

    Example
    -------
    >>> visibility_minmax(200, 0)
    VisibilityEstimate(v=1.0, sigma_v=0.0, method='minmax')
    """
    if min_count < 0 or max_count < min_count:
        raise CfiValidationError(f"Need max >= min >= 0, got max={max_count}, min={min_count}")
    total = max_count + min_count
    if total == 0:
        raise CfiValidationError("Visibility is undefined when max = min = 0")
    v = (max_count - min_count) / total
    sigma = 2.0 * math.sqrt(max_count * min_count**2 + min_count * max_count**2) / total**2
    return VisibilityEstimate(v=float(v), sigma_v=float(sigma), method="minmax")


def scan_visibility_minmax(scan: FringeScan) -> VisibilityEstimate:
    """Min/max estimate over the raw counts of a scan."""
    if not len(scan):
        raise CfiValidationError("Empty fringe scan")
    return visibility_minmax(float(scan.coincidences.max()), float(scan.coincidences.min()))


def threshold_sigmas(estimate: VisibilityEstimate, threshold: float = CLASSICAL_THRESHOLD) -> float:
    """Standard deviations by which the estimate exceeds the quantum-classical threshold."""
    if estimate.sigma_v == 0:
        return math.copysign(math.inf, estimate.v - threshold) if estimate.v != threshold else 0.0
    return (estimate.v - threshold) / estimate.sigma_v


def summarize_estimates(estimates: Iterable[VisibilityEstimate | float]) -> VisibilitySummary:
    values = np.array([e.v if isinstance(e, VisibilityEstimate) else float(e) for e in estimates])
    if values.size < 2:
        raise CfiValidationError("Need at least two estimates for a sample deviation")
    return VisibilitySummary(mean=float(values.mean()), std=float(values.std(ddof=1)), n=int(values.size))


def _fringe(phi: np.ndarray, amplitude: float, visibility: float, offset: float) -> np.ndarray:
    return amplitude * (1.0 + visibility * np.cos(phi + offset))


def _linear_start(phi: np.ndarray, counts: np.ndarray, sigma: np.ndarray) -> tuple[float, float, float]:
    """Weighted linear solve of counts ≈ A + a·cos φ + b·sin φ."""
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    if np.linalg.matrix_rank(design) < 3:
        raise CfiValidationError("Degenerate fringe scan: phases do not resolve a cosine")
    (amplitude, a, b), *_ = np.linalg.lstsq(design / sigma[:, None], counts / sigma, rcond=None)
    if amplitude <= 0:
        raise CfiValidationError("Fringe scan holds no coincidences")
    visibility = math.hypot(a, b) / amplitude
    return float(amplitude), float(np.clip(visibility, -VISIBILITY_EDGE, VISIBILITY_EDGE)), math.atan2(-b, a)


def fit_fringe(scan: FringeScan) -> FringeFit:
    """
    Weighted least squares of A·[1 + V cos(φ_T + δ)] to a scan.

    Weights are Poisson, σ_k = √max(count_k, 1); V is bounded to [−1, 1]; the
    covariance is absolute (not rescaled by the reduced χ²).

    Raises:
        CfiValidationError: Fewer than five points, less than π of phase, or a
            degenerate design.
        CfiRuntimeError: The optimizer did not converge.
    """
    phi, counts = scan.phi_t, scan.coincidences
    if phi.size < MIN_POINTS:
        raise CfiValidationError(f"fit_fringe needs at least {MIN_POINTS} points, got {phi.size}")
    if np.ptp(phi) < MIN_PHASE_SPAN:
        raise CfiValidationError(f"Scan spans {np.ptp(phi):.3f} rad of phase; at least π is required")
    sigma = np.sqrt(np.maximum(counts, 1.0))
    start = _linear_start(phi, counts, sigma)
    try:
        params, covariance = curve_fit(
            _fringe,
            phi,
            counts,
            p0=start,
            sigma=sigma,
            absolute_sigma=True,
            bounds=([0.0, -1.0, -np.inf], [np.inf, 1.0, np.inf]),
        )
    except RuntimeError as e:
        raise CfiRuntimeError(f"Fringe fit did not converge | {e}") from e
    amplitude, visibility, offset = (float(p) for p in params)
    errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    offset = math.remainder(offset, 2.0 * math.pi)
    fit = FringeFit(
        amplitude=amplitude,
        amplitude_sigma=float(errors[0]),
        visibility=VisibilityEstimate(v=float(np.clip(visibility, -1.0, 1.0)), sigma_v=float(errors[1]), method="fit"),
        phase_offset=offset,
        phase_sigma=float(errors[2]),
        covariance=covariance,
    )
    log(message=f"Fringe fit: A = {amplitude:.2f}, {fit.visibility}", level="INFO")
    return fit
