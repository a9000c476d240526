"""Fringe scans: drift-driven and PZT-stepped coincidence counts against φ_T."""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from tqdm import tqdm

from cfi.cfi_core import CfiConfig
from decorators.error_handler import CfiValidationError
from experiment.experiment_models import (
    DetectorModel,
    DriftModel,
    InterferometerModel,
    ShifterModel,
    StateLike,
    VisibilityBudget,
    peak_fractions,
    state_visibility,
)
from numerics.amplitudes import check_columns
from utils.file_utils import read_file, write_file
from utils.log_utils import log
from utils.seed_utils import make_rng

SCAN_COLUMNS = ["phi_t_rad", "coincidences", "integration_s"]
FINE_STEP = 0.15
COARSE_STEP = 0.52
EXTREMUM_BAND = 0.1


@dataclass(frozen=True, eq=False)
class FringeScan:
    """Coincidence counts of the central peak per integration bin."""

    phi_t: np.ndarray
    coincidences: np.ndarray
    integration: np.ndarray
    source: Literal["drift", "pzt"] = "drift"

    def __post_init__(self) -> None:
        phi_t = np.asarray(self.phi_t, dtype=np.float64)
        counts = np.asarray(self.coincidences, dtype=np.float64)
        integration = np.broadcast_to(np.asarray(self.integration, dtype=np.float64), phi_t.shape).copy()
        if phi_t.ndim != 1 or counts.shape != phi_t.shape:
            raise CfiValidationError("phi_t and coincidences must be 1-D arrays of equal length")
        if np.any(counts < 0):
            raise CfiValidationError("coincidence counts must be >= 0")
        if np.any(integration <= 0):
            raise CfiValidationError("integration times must be > 0")
        object.__setattr__(self, "phi_t", phi_t)
        object.__setattr__(self, "coincidences", counts)
        object.__setattr__(self, "integration", integration)

    def __len__(self) -> int:
        return int(self.phi_t.size)

    def to_csv(self, path: str | Path) -> None:
        write_file(
            path=path,
            data={
                "phi_t_rad": self.phi_t,
                "coincidences": self.coincidences,
                "integration_s": self.integration,
            },
        )

    @classmethod
    def from_csv(cls, path: str | Path, source: Literal["drift", "pzt"] = "drift") -> "FringeScan":
        frame = check_columns(read_file(path=path), SCAN_COLUMNS, path)
        return cls(
            phi_t=frame["phi_t_rad"].to_numpy(),
            coincidences=frame["coincidences"].to_numpy(),
            integration=frame["integration_s"].to_numpy(),
            source=source,
        )


@dataclass(frozen=True)
class _CentralPeakRate:
    """Central-peak coincidence rate as a function of φ_T, accidentals included."""

    pair_rate: float
    eta_product: float
    visibility: float
    leakage: float
    accidentals: float

    def __call__(self, phi_t: float | np.ndarray) -> float | np.ndarray:
        central, _ = peak_fractions(self.visibility, phi_t, self.leakage)
        return self.pair_rate * self.eta_product * central + self.accidentals


def _central_peak_rate(
    state: StateLike,
    cfg: CfiConfig,
    det: DetectorModel,
    pair_rate: float,
    interferometer: InterferometerModel | None,
    shifters: ShifterModel | None,
    budget: VisibilityBudget,
    visibility: float | None,
    coincidence_window: float,
) -> _CentralPeakRate:
    if not pair_rate >= 0:
        raise CfiValidationError(f"pair_rate must be >= 0, got {pair_rate}")
    eta_s, eta_i = (interferometer or InterferometerModel()).eta_tot(det)
    ideal = visibility if visibility is not None else state_visibility(state, cfg.delta_omega)
    singles_s = pair_rate * eta_s / 2.0 + det.dark_rate
    singles_i = pair_rate * eta_i / 2.0 + det.dark_rate
    return _CentralPeakRate(
        pair_rate=pair_rate,
        eta_product=eta_s * eta_i,
        visibility=ideal * budget.factor,
        leakage=shifters.leakage if shifters else 0.0,
        accidentals=singles_s * singles_i * coincidence_window,
    )


def simulate_drift_scan(
    state: StateLike,
    cfg: CfiConfig,
    det: DetectorModel,
    drift: DriftModel,
    pair_rate: float,
    bin_seconds: float,
    n_bins: int,
    seed: int,
    interferometer: InterferometerModel | None = None,
    shifters: ShifterModel | None = None,
    budget: VisibilityBudget | None = None,
    visibility: float | None = None,
    coincidence_window: float = 0.0,
) -> FringeScan:
    """
    Central-peak counts while φ_T drifts freely.

    Bin k records φ_T = cfg.phi_t + drift(t_k) at its center t_k = (k + ½)·bin_seconds;
    its count is Poisson around the expected central-peak rate at that phase. With a
    phase blur in the budget, each bin sees its own Gaussian offset of the phase.
    """
    if not bin_seconds > 0:
        raise CfiValidationError(f"bin_seconds must be > 0, got {bin_seconds}")
    if n_bins < 1:
        raise CfiValidationError(f"n_bins must be >= 1, got {n_bins}")
    budget = budget or VisibilityBudget()
    rate = _central_peak_rate(
        state, cfg, det, pair_rate, interferometer, shifters, budget, visibility, coincidence_window
    )
    rng = make_rng(seed)
    centers = (np.arange(n_bins) + 0.5) * bin_seconds
    phi_t = cfg.phi_t + drift.phase(centers)
    actual = phi_t + rng.normal(0.0, budget.phase_blur, n_bins) if budget.phase_blur > 0 else phi_t
    counts = rng.poisson(rate(actual) * bin_seconds)
    log(
        message=f"Drift scan: {n_bins} bins of {bin_seconds:g} s, φ_T step {drift.rate * bin_seconds:.3f} rad",
        level="INFO",
    )
    return FringeScan(phi_t=phi_t, coincidences=counts, integration=bin_seconds, source="drift")


def adaptive_phase_schedule(
    current_count: float,
    running_max: float | None = None,
    running_min: float | None = None,
) -> float:
    """
    Next PZT phase step (rad): fine near a fringe extremum, coarse elsewhere.

    "Near" means within 10% of the fringe span (running_max − running_min) of either
    extremum. Without a span yet (fewer than two distinct observations) the coarse step
    is returned.

    Example
    -------
    >>> adaptive_phase_schedule(95.0, running_max=100.0, running_min=0.0)
    0.15
    """
    if current_count < 0:
        raise CfiValidationError(f"counts must be >= 0, got {current_count}")
    if running_max is None or running_min is None or running_max <= running_min:
        return COARSE_STEP
    band = EXTREMUM_BAND * (running_max - running_min)
    if abs(current_count - running_max) <= band or abs(current_count - running_min) <= band:
        return FINE_STEP
    return COARSE_STEP


def simulate_pzt_scan(
    state: StateLike,
    cfg: CfiConfig,
    det: DetectorModel,
    pair_rate: float,
    bin_seconds: float,
    seed: int,
    drift: DriftModel | None = None,
    span: float = 2.0 * math.pi,
    max_points: int = 200,
    interferometer: InterferometerModel | None = None,
    shifters: ShifterModel | None = None,
    budget: VisibilityBudget | None = None,
    visibility: float | None = None,
    coincidence_window: float = 0.0,
    progress: bool = False,
) -> FringeScan:
    """
    Adaptive PZT scan over `span` of applied phase.

    After each integration the step is chosen by `adaptive_phase_schedule` from the
    extremes of the earlier points. The recorded φ_T is the applied setpoint; drift
    accumulates underneath it and shows up as an offset in the fit.
    """
    if not bin_seconds > 0:
        raise CfiValidationError(f"bin_seconds must be > 0, got {bin_seconds}")
    if not span > 0:
        raise CfiValidationError(f"span must be > 0, got {span}")
    budget = budget or VisibilityBudget()
    drift = drift or DriftModel(rate=0.0)
    rate = _central_peak_rate(
        state, cfg, det, pair_rate, interferometer, shifters, budget, visibility, coincidence_window
    )
    rng = make_rng(seed)

    setpoints, counts = [], []
    applied = cfg.phi_t
    with tqdm(total=max_points, desc="PZT scan", disable=not progress) as bar:
        while len(setpoints) < max_points and applied - cfg.phi_t <= span:
            t_center = (len(setpoints) + 0.5) * bin_seconds
            actual = applied + drift.phase(t_center)
            if budget.phase_blur > 0:
                actual += rng.normal(0.0, budget.phase_blur)
            count = int(rng.poisson(rate(actual) * bin_seconds))
            history = (max(counts), min(counts)) if counts else (None, None)
            setpoints.append(applied)
            counts.append(count)
            applied += adaptive_phase_schedule(count, *history)
            bar.update()
    log(message=f"PZT scan: {len(setpoints)} points over {span:.3f} rad", level="INFO")
    return FringeScan(phi_t=np.array(setpoints), coincidences=np.array(counts), integration=bin_seconds, source="pzt")
