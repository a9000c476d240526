"""
Gerchberg–Saxton recovery of the cw spectral phase from |Ψ(ω)| and |ψ(t_−)|.

Each iteration imposes the spectral magnitude, transforms to time, imposes the
temporal magnitude and transforms back. The figure of merit is the L² distance
between the achieved and the target temporal magnitude; the spectral magnitude is
exact by construction.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from decorators.error_handler import CfiValidationError
from numerics.amplitudes import SpectralAmplitude1D, TemporalAmplitude1D, check_columns
from numerics.grids import FrequencyGrid, TimeGrid, check_duality
from numerics.transforms import SQRT_TWO_PI, centered_dft
from utils.file_utils import read_file, write_file
from utils.log_utils import log
from utils.seed_utils import make_rng, spawn_seeds

PHASE_COLUMNS = ["omega_rad_s", "phase_rad"]
SUPPORT_THRESHOLD = 1e-3
STAGNATION_WINDOW = 50
STAGNATION_GAIN = 1e-8
MAX_RESTARTS = 8
DEFAULT_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class RetrievalResult:
    """
    Recovered spectral phase (rad) on `grid`; NaN where |Ψ| ≤ 10⁻³·max|Ψ|.
    `magnitude` is the normalized target |Ψ|.
    """

    grid: FrequencyGrid
    magnitude: np.ndarray
    phase: np.ndarray
    magnitude_residual: float
    iterations: int
    converged: bool
    restarts_used: int = 0

    def __post_init__(self) -> None:
        if not self.magnitude_residual >= 0:
            raise CfiValidationError(f"residual must be >= 0, got {self.magnitude_residual}")

    @property
    def support(self) -> np.ndarray:
        return ~np.isnan(self.phase)

    def state(self) -> SpectralAmplitude1D:
        """Ψ = |Ψ|·e^{iθ}, zero phase off the support."""
        phase = np.where(self.support, self.phase, 0.0)
        return SpectralAmplitude1D(self.grid, self.magnitude * np.exp(1j * phase))

    def to_csv(self, path: str | Path) -> None:
        """Support rows only: `omega_rad_s,phase_rad`."""
        support = self.support
        write_file(path=path, data={"omega_rad_s": self.grid.points[support], "phase_rad": self.phase[support]})


def read_phase_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    frame = check_columns(read_file(path=path), PHASE_COLUMNS, path)
    return frame["omega_rad_s"].to_numpy(), frame["phase_rad"].to_numpy()


@dataclass(frozen=True, eq=False)
class _Projector:
    """Alternating projections between the two magnitude constraints on dual grids."""

    freq: FrequencyGrid
    time: TimeGrid
    spectral: np.ndarray
    temporal: np.ndarray

    def to_time(self, values: np.ndarray) -> np.ndarray:
        out = centered_dft(values, self.freq.points, self.freq.center, self.time.points, self.time.center, -1)
        return out * (self.freq.d_omega / SQRT_TWO_PI)

    def to_frequency(self, values: np.ndarray) -> np.ndarray:
        out = centered_dft(values, self.time.points, self.time.center, self.freq.points, self.freq.center, +1)
        return out * (self.time.d_t / SQRT_TWO_PI)

    def residual(self, phase: np.ndarray) -> tuple[float, np.ndarray]:
        psi = self.to_time(self.spectral * np.exp(1j * phase))
        distance = math.sqrt(float(np.sum((np.abs(psi) - self.temporal) ** 2)) * self.time.d_t)
        return distance, psi

    def run(self, phase: np.ndarray, max_iter: int, tol: float) -> tuple[np.ndarray, float, int]:
        """Best phase, its residual, and the iterations spent (stops at tol or on stagnation)."""
        residual, psi = self.residual(phase)
        best_phase, best = phase, residual
        history = [residual]
        iterations = 0
        while iterations < max_iter and best > tol:
            iterations += 1
            phase = np.angle(self.to_frequency(self.temporal * np.exp(1j * np.angle(psi))))
            residual, psi = self.residual(phase)
            history.append(residual)
            if residual < best:
                best_phase, best = phase, residual
            if len(history) > STAGNATION_WINDOW and history[-STAGNATION_WINDOW - 1] - best < STAGNATION_GAIN:
                break
        return best_phase, best, iterations


def _random_attempt(
    projector: _Projector, seed: np.random.SeedSequence, max_iter: int, tol: float
) -> tuple[np.ndarray, float, int]:
    start = make_rng(seed).uniform(-math.pi, math.pi, projector.freq.n)
    return projector.run(start, max_iter, tol)


def gerchberg_saxton(
    jsi_mag: SpectralAmplitude1D,
    jti_mag: TemporalAmplitude1D,
    max_iter: int = 2000,
    tol: float = DEFAULT_TOL,
    init: Literal["zero", "random"] | np.ndarray = "zero",
    seed: int = 0,
    restarts: int = MAX_RESTARTS,
    n_jobs: int = 1,
    progress: bool = False,
) -> RetrievalResult:
    """
    Recover θ(ω) such that |F[|Ψ|e^{iθ}]| matches |ψ|.

    The first attempt starts from `init`; if it stagnates above `tol`, up to `restarts`
    random-phase attempts follow (substream k of `seed`), run in parallel over `n_jobs`.
    The best attempt is kept, so the final residual never exceeds the initial one.
    `max_iter` bounds each attempt; `RetrievalResult.iterations` is the total over
    all attempts, at most max_iter·(restarts + 1).

    Raises:
        GridError: Magnitudes not on dual grids.
        NormalizationError: Zero-norm magnitude.
    """
    check_duality(jsi_mag.grid, jti_mag.grid)
    if not 0 <= restarts <= MAX_RESTARTS:
        raise CfiValidationError(f"restarts must lie in [0, {MAX_RESTARTS}], got {restarts}")
    spectral = np.abs(jsi_mag.normalize().values)
    projector = _Projector(jsi_mag.grid, jti_mag.grid, spectral, np.abs(jti_mag.normalize().values))

    match init:
        case np.ndarray() if init.shape == (jsi_mag.grid.n,):
            start = np.asarray(init, dtype=np.float64)
        case np.ndarray():
            raise CfiValidationError(f"init phase has shape {init.shape}, expected ({jsi_mag.grid.n},)")
        case "zero":
            start = np.zeros(jsi_mag.grid.n)
        case "random":
            start = make_rng(seed).uniform(-math.pi, math.pi, jsi_mag.grid.n)
        case _:
            raise CfiValidationError("init must be 'zero', 'random' or a phase array on the grid")

    phase, residual, iterations = projector.run(start, max_iter, tol)
    restarts_used = 0
    if residual > tol and restarts:
        log(message=f"Phase retrieval stagnated at {residual:.3e}; {restarts} random restarts", level="INFO")
        children = spawn_seeds(seed, restarts + 1)[1:]
        attempts = Parallel(n_jobs=n_jobs)(
            delayed(_random_attempt)(projector, child, max_iter, tol)
            for child in tqdm(children, desc="GS restarts", disable=not progress)
        )
        restarts_used = len(attempts)
        for candidate, candidate_residual, spent in attempts:
            iterations += spent
            if candidate_residual < residual:
                phase, residual = candidate, candidate_residual

    support = spectral > SUPPORT_THRESHOLD * spectral.max()
    converged = residual <= tol
    log(
        message=f"Phase retrieval residual {residual:.3e} after {iterations} iterations"
        + ("" if converged else " (not converged)"),
        level="INFO",
    )
    return RetrievalResult(
        grid=jsi_mag.grid,
        magnitude=spectral,
        phase=np.where(support, phase, np.nan),
        magnitude_residual=residual,
        iterations=iterations,
        converged=converged,
        restarts_used=restarts_used,
    )
