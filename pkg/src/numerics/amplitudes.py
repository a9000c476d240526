"""Sampled biphoton amplitudes and intensities, their norms and CSV forms."""

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing_extensions import Self

import numpy as np
import pandas as pd

from decorators.error_handler import FormatError, GridError, NormalizationError
from numerics.grids import FrequencyGrid, TimeGrid, check_grid_size
from utils.file_utils import read_file, write_file
from utils.log_utils import log

NORM_TOLERANCE = 1e-9
SPACING_TOLERANCE = 1e-6

SPECTRAL_1D_COLUMNS = ["omega_rad_s", "re", "im"]
SPECTRAL_2D_COLUMNS = ["omega_s", "omega_i", "re", "im"]
TEMPORAL_1D_COLUMNS = ["t_s", "re", "im"]
SPECTRAL_MAGNITUDE_COLUMNS = ["omega_rad_s", "magnitude"]
TEMPORAL_MAGNITUDE_COLUMNS = ["t_s", "magnitude"]


def _as_array(values, dtype, shape: tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    if array.shape != shape:
        raise GridError(f"{name} has shape {array.shape}, grid expects {shape}")
    array.setflags(write=False)
    return array


class _Sampled:
    """Shared behaviour of sampled amplitudes: norm, rescaling, tolerance checks."""

    values: np.ndarray
    raw_norm: float

    @property
    def cell(self) -> float:
        raise NotImplementedError

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return norm_l2(self)

    def normalize(self) -> Self:
        """Rescale to unit norm; the pre-rescaling norm is kept in `raw_norm`."""
        norm = self.norm()
        if not math.isfinite(norm) or norm <= 0.0:
            raise NormalizationError(f"{type(self).__name__} has zero or invalid norm ({norm})")
        if abs(norm - 1.0) > NORM_TOLERANCE:
            log(message=f"{type(self).__name__} rescaled, raw norm {norm:.9g}", level="INFO")
        return replace(self, values=self.values / math.sqrt(norm), raw_norm=norm)

    def require_normalized(self, tolerance: float = NORM_TOLERANCE) -> None:
        norm = self.norm()
        if abs(norm - 1.0) > tolerance:
            raise NormalizationError(
                f"{type(self).__name__} norm {norm:.12g} deviates from 1 by more than {tolerance}"
            )


@dataclass(frozen=True, eq=False)
class SpectralAmplitude1D(_Sampled):
    """cw joint spectral amplitude Ψ(ω) (1/√(rad/s))."""

    grid: FrequencyGrid
    values: np.ndarray
    raw_norm: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", _as_array(self.values, np.complex128, (self.grid.n,), "values")
        )

    @property
    def cell(self) -> float:
        return self.grid.d_omega


@dataclass(frozen=True, eq=False)
class TemporalAmplitude1D(_Sampled):
    """cw joint temporal amplitude ψ(t_−) (1/√s)."""

    grid: TimeGrid
    values: np.ndarray
    raw_norm: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", _as_array(self.values, np.complex128, (self.grid.n,), "values")
        )

    @property
    def cell(self) -> float:
        return self.grid.d_t


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude2D(_Sampled):
    """
    Pulsed joint spectral amplitude Ψ(ω_S, ω_I), rows indexed by ω_S.

    The carrier frequencies ω_S0, ω_I0 are metadata; they only enter when a
    temporal amplitude is requested with its carrier phase applied.
    """

    grid_s: FrequencyGrid
    grid_i: FrequencyGrid
    values: np.ndarray
    omega_s0: float = 0.0
    omega_i0: float = 0.0
    raw_norm: float = 1.0

    def __post_init__(self) -> None:
        shape = (self.grid_s.n, self.grid_i.n)
        object.__setattr__(self, "values", _as_array(self.values, np.complex128, shape, "values"))

    @property
    def cell(self) -> float:
        return self.grid_s.d_omega * self.grid_i.d_omega


@dataclass(frozen=True, eq=False)
class JointTemporalAmplitude2D(_Sampled):
    """Pulsed joint temporal amplitude ψ(t_S, t_I), rows indexed by t_S."""

    grid_s: TimeGrid
    grid_i: TimeGrid
    values: np.ndarray
    omega_s0: float = 0.0
    omega_i0: float = 0.0
    carrier_applied: bool = False
    raw_norm: float = 1.0

    def __post_init__(self) -> None:
        shape = (self.grid_s.n, self.grid_i.n)
        object.__setattr__(self, "values", _as_array(self.values, np.complex128, shape, "values"))

    @property
    def cell(self) -> float:
        return self.grid_s.d_t * self.grid_i.d_t


@dataclass(frozen=True, eq=False)
class TemporalIntensity1D:
    """JTI(t_−) = |ψ(t_−)|² on a time grid (1/s)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", _as_array(self.values, np.float64, (self.grid.n,), "values")
        )
        if np.any(self.values < 0):
            raise NormalizationError("Intensities must be non-negative")

    @classmethod
    def from_amplitude(cls, psi: TemporalAmplitude1D) -> "TemporalIntensity1D":
        return cls(grid=psi.grid, values=psi.intensity)

    def norm(self) -> float:
        return float(np.sum(self.values) * self.grid.d_t)

    def normalize(self) -> "TemporalIntensity1D":
        norm = self.norm()
        if not math.isfinite(norm) or norm <= 0.0:
            raise NormalizationError(f"Intensity has zero or invalid norm ({norm})")
        return replace(self, values=self.values / norm)


@dataclass(frozen=True, eq=False)
class TemporalIntensity2D:
    """JTI(t_S, t_I) = |ψ(t_S, t_I)|² (1/s²)."""

    grid_s: TimeGrid
    grid_i: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.grid_s.n, self.grid_i.n)
        object.__setattr__(self, "values", _as_array(self.values, np.float64, shape, "values"))

    @classmethod
    def from_amplitude(cls, psi: JointTemporalAmplitude2D) -> "TemporalIntensity2D":
        return cls(grid_s=psi.grid_s, grid_i=psi.grid_i, values=psi.intensity)

    def norm(self) -> float:
        return float(np.sum(self.values) * self.grid_s.d_t * self.grid_i.d_t)


def norm_l2(amplitude: _Sampled) -> float:
    """Σ|values|²·cell, the midpoint-rule ∫|·|² of a sampled amplitude (1-D or 2-D)."""
    return float(np.sum(np.abs(amplitude.values) ** 2) * amplitude.cell)


# CSV forms -----------------------------------------------------------------------------


def check_columns(frame: pd.DataFrame, expected: list[str], path: str | Path) -> pd.DataFrame:
    """Validate the header and coerce every cell to a number; returns the numeric frame."""
    if list(frame.columns) != expected:
        raise FormatError(
            f"{path}: header {','.join(map(str, frame.columns))} != {','.join(expected)}",
            line=1,
        )
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    missing = numeric.isna().to_numpy().any(axis=1)
    if missing.any():
        row = int(np.flatnonzero(missing)[0])
        raise FormatError(f"{path}: missing or non-numeric value", line=row + 2)
    return numeric


def uniform_axis(points: np.ndarray, label: str) -> tuple[int, float, float]:
    """(n, spacing, center) of a uniform, increasing, power-of-two-sized axis."""
    points = np.asarray(points, dtype=np.float64)
    n = points.size
    check_grid_size(n)
    spacing = (points[-1] - points[0]) / (n - 1)
    if not spacing > 0:
        raise FormatError(f"{label} axis is not increasing", line=2)
    deviation = np.abs(np.diff(points) - spacing)
    bad = np.flatnonzero(deviation > SPACING_TOLERANCE * spacing)
    if bad.size:
        raise FormatError(f"{label} axis has non-uniform spacing", line=int(bad[0]) + 3)
    return n, float(spacing), float(points[n // 2])


def _complex_column(frame: pd.DataFrame) -> np.ndarray:
    return frame["re"].to_numpy(np.float64) + 1j * frame["im"].to_numpy(np.float64)


def read_spectral_csv(path: str | Path) -> SpectralAmplitude1D | JointSpectralAmplitude2D:
    """
    Read a tabulated JSA (`omega_rad_s,re,im` or `omega_s,omega_i,re,im`), normalized.

    Raises:
        FormatError: Header, value or grid-order violations (with the offending line).
        GridError: Point count not a power of two >= 8.
        NormalizationError: All-zero amplitude.
    """
    frame = read_file(path=path)
    if list(frame.columns) == SPECTRAL_1D_COLUMNS:
        frame = check_columns(frame, SPECTRAL_1D_COLUMNS, path)
        n, d_omega, center = uniform_axis(frame["omega_rad_s"].to_numpy(), "omega_rad_s")
        amplitude = SpectralAmplitude1D(FrequencyGrid(n, d_omega, center), _complex_column(frame))
        return amplitude.normalize()

    frame = check_columns(frame, SPECTRAL_2D_COLUMNS, path)
    rows = len(frame)
    n = math.isqrt(rows)
    if n * n != rows:
        raise FormatError(f"{path}: {rows} rows do not form a square grid", line=rows + 1)
    omega_s = frame["omega_s"].to_numpy(np.float64).reshape(n, n)
    omega_i = frame["omega_i"].to_numpy(np.float64).reshape(n, n)
    if np.any(omega_s != omega_s[:, :1]) or np.any(omega_i != omega_i[:1, :]):
        raise FormatError(f"{path}: rows are not in (omega_s, omega_i) grid order", line=2)
    n_s, d_s, c_s = uniform_axis(omega_s[:, 0], "omega_s")
    n_i, d_i, c_i = uniform_axis(omega_i[0, :], "omega_i")
    amplitude = JointSpectralAmplitude2D(
        grid_s=FrequencyGrid(n_s, d_s, c_s),
        grid_i=FrequencyGrid(n_i, d_i, c_i),
        values=_complex_column(frame).reshape(n, n),
    )
    return amplitude.normalize()


def write_spectral_csv(
    amplitude: SpectralAmplitude1D | JointSpectralAmplitude2D, path: str | Path
) -> None:
    if isinstance(amplitude, SpectralAmplitude1D):
        table = {
            "omega_rad_s": amplitude.grid.points,
            "re": amplitude.values.real,
            "im": amplitude.values.imag,
        }
    else:
        omega_s, omega_i = np.meshgrid(
            amplitude.grid_s.points, amplitude.grid_i.points, indexing="ij"
        )
        table = {
            "omega_s": omega_s.ravel(),
            "omega_i": omega_i.ravel(),
            "re": amplitude.values.real.ravel(),
            "im": amplitude.values.imag.ravel(),
        }
    write_file(path=path, data=table)


def write_temporal_csv(amplitude: TemporalAmplitude1D, path: str | Path) -> None:
    write_file(
        path=path,
        data={"t_s": amplitude.grid.points, "re": amplitude.values.real, "im": amplitude.values.imag},
    )


def write_magnitude_csv(
    amplitude: SpectralAmplitude1D | TemporalAmplitude1D, path: str | Path
) -> None:
    """Write |Ψ| (`omega_rad_s,magnitude`) or |ψ| (`t_s,magnitude`)."""
    axis = "omega_rad_s" if isinstance(amplitude, SpectralAmplitude1D) else "t_s"
    write_file(path=path, data={axis: amplitude.grid.points, "magnitude": np.abs(amplitude.values)})


def _read_magnitude(path: str | Path, columns: list[str]) -> tuple[int, float, float, np.ndarray]:
    frame = check_columns(read_file(path=path), columns, path)
    n, spacing, center = uniform_axis(frame[columns[0]].to_numpy(), columns[0])
    magnitude = frame["magnitude"].to_numpy(np.float64)
    if np.any(magnitude < 0):
        raise FormatError(f"{path}: negative magnitude", line=int(np.argmax(magnitude < 0)) + 2)
    return n, spacing, center, magnitude


def read_spectral_magnitude_csv(path: str | Path) -> SpectralAmplitude1D:
    """|Ψ| as a real, normalized SpectralAmplitude1D."""
    n, d_omega, center, magnitude = _read_magnitude(path, SPECTRAL_MAGNITUDE_COLUMNS)
    return SpectralAmplitude1D(FrequencyGrid(n, d_omega, center), magnitude).normalize()


def read_temporal_magnitude_csv(path: str | Path) -> TemporalAmplitude1D:
    """|ψ| as a real, normalized TemporalAmplitude1D."""
    n, d_t, center, magnitude = _read_magnitude(path, TEMPORAL_MAGNITUDE_COLUMNS)
    return TemporalAmplitude1D(TimeGrid(n, d_t, center), magnitude).normalize()
