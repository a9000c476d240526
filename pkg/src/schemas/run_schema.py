"""
Run configuration of the CLI commands.

A run file is YAML with the sections below; every section is optional and every
unknown key is an error. Frequencies are in Hz and times in seconds; conversion to
rad/s and to β₂ happens here and nowhere else.
"""

import math
from pathlib import Path
from typing import Annotated, Any, Literal

from omegaconf import OmegaConf
from pydantic import Field, PositiveFloat, PositiveInt, ValidationError, field_validator
from ruamel.yaml.comments import CommentedMap

from cfi.cfi_core import CfiConfig
from decorators.error_handler import ConfigError
from experiment.experiment_models import (
    MEASURED_BUDGET,
    DetectorModel,
    DriftModel,
    InterferometerModel,
    ShifterModel,
    VisibilityBudget,
)
from numerics.grids import FrequencyGrid, check_grid_size
from schemas.base_schema import BaseSchema
from utils.file_utils import read_file
from utils.unit_utils import dispersion_to_beta2, hz_to_rad_s, rad_per_min_to_rad_per_s

NonNegativeFloat = Annotated[float, Field(ge=0.0)]
Fraction = Annotated[float, Field(ge=0.0, le=1.0)]
Penalty = Annotated[float, Field(ge=0.0, lt=1.0)]


class GaussianSection(BaseSchema):
    kind: Literal["gaussian"] = "gaussian"
    sigma_coh_s: PositiveFloat = 1.0e-10
    sigma_cor_s: PositiveFloat = 1.0e-12
    signal_center_hz: float = 0.0
    idler_center_hz: float = 0.0


class FlatTopSection(BaseSchema):
    kind: Literal["flat_top"] = "flat_top"
    omega_max_hz: PositiveFloat = 1.6e11
    omega_1_hz: PositiveFloat = 8.0e10
    phi: float = 0.0


class TabulatedSection(BaseSchema):
    kind: Literal["tabulated"] = "tabulated"
    path: str


StateSection = Annotated[GaussianSection | FlatTopSection | TabulatedSection, Field(discriminator="kind")]


class CfiSection(BaseSchema):
    delta_omega_hz: NonNegativeFloat = 15.65e9
    phi_s: float = 0.0
    phi_i: float = 0.0
    eta: Fraction = 1.0
    dispersion_ns_per_nm: NonNegativeFloat = 10.0
    center_wavelength_nm: PositiveFloat = 1560.0


class GridSection(BaseSchema):
    n: PositiveInt = 8192
    shift_subdivisions: PositiveInt = 128
    d_omega_hz: PositiveFloat = 2.5e8

    @field_validator("n")
    @classmethod
    def power_of_two(cls, n: int) -> int:
        check_grid_size(n)
        return n


class DetectorSection(BaseSchema):
    efficiency: Fraction = 0.8
    jitter_s: NonNegativeFloat = 120e-12
    dark_rate_hz: NonNegativeFloat = 100.0
    tick_s: PositiveFloat = 128e-12


class InterferometerSection(BaseSchema):
    insertion_loss_db_s: NonNegativeFloat = 18.6
    insertion_loss_db_i: NonNegativeFloat = 22.7
    carrier_suppression_db: NonNegativeFloat = 25.0


class BudgetSection(BaseSchema):
    multi_pair: Penalty = MEASURED_BUDGET.multi_pair
    extra_sidebands: Penalty = MEASURED_BUDGET.extra_sidebands
    modulator_dispersion: Penalty = MEASURED_BUDGET.modulator_dispersion
    phase_blur_rad: NonNegativeFloat = 0.0


class SimulationSection(BaseSchema):
    pair_rate_hz: NonNegativeFloat = 4.0e6
    duration_s: PositiveFloat = 1.0
    seed: int | None = None
    bins: PositiveInt = 40
    bin_seconds: PositiveFloat = 30.0
    drift_rad_per_min: float = 0.3
    coincidence_window_s: NonNegativeFloat = 0.0
    scan: Literal["drift", "pzt"] = "drift"
    visibility: Annotated[float, Field(ge=-1.0, le=1.0)] | None = None
    n_chunks: PositiveInt = 1
    n_jobs: int = 1


class SweepSection(BaseSchema):
    phis: list[float] | None = None
    points: Annotated[int, Field(ge=2)] = 5
    method: Literal["time", "freq"] = "time"
    n_jobs: int = 1


class AnalysisSection(BaseSchema):
    window_s: PositiveFloat | None = None
    bin_width_s: PositiveFloat | None = None


class RetrievalSection(BaseSchema):
    max_iter: PositiveInt = 2000
    tol: PositiveFloat = 1e-4
    init: Literal["zero", "random"] = "zero"
    seed: int = 0
    restarts: Annotated[int, Field(ge=0, le=8)] = 8
    n_jobs: int = 1
    canonicalize: bool = True


class OutputSection(BaseSchema):
    directory: str | None = None
    stream_format: Literal["bin", "csv"] = "bin"
    svg: bool = False
    export_magnitudes: bool = False


class RunConfig(BaseSchema):
    state: StateSection = Field(default_factory=FlatTopSection)
    cfi: CfiSection = Field(default_factory=CfiSection)
    grid: GridSection = Field(default_factory=GridSection)
    detector: DetectorSection = Field(default_factory=DetectorSection)
    interferometer: InterferometerSection = Field(default_factory=InterferometerSection)
    budget: BudgetSection = Field(default_factory=BudgetSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    retrieval: RetrievalSection = Field(default_factory=RetrievalSection)
    output: OutputSection = Field(default_factory=OutputSection)

    # Domain objects -----------------------------------------------------------------

    def cfi_config(self) -> CfiConfig:
        beta2 = (
            dispersion_to_beta2(self.cfi.dispersion_ns_per_nm, self.cfi.center_wavelength_nm)
            if self.cfi.dispersion_ns_per_nm
            else 0.0
        )
        return CfiConfig(
            delta_omega=hz_to_rad_s(self.cfi.delta_omega_hz),
            phi_s=self.cfi.phi_s,
            phi_i=self.cfi.phi_i,
            eta=self.cfi.eta,
            beta2=beta2,
        )

    def frequency_grid(self) -> FrequencyGrid:
        """ΔΩ/shift_subdivisions spacing so the shift is an exact grid multiple; d_omega_hz when ΔΩ = 0."""
        if self.cfi.delta_omega_hz > 0:
            d_omega = hz_to_rad_s(self.cfi.delta_omega_hz) / self.grid.shift_subdivisions
        else:
            d_omega = hz_to_rad_s(self.grid.d_omega_hz)
        return FrequencyGrid(n=self.grid.n, d_omega=d_omega)

    def detector_model(self) -> DetectorModel:
        return DetectorModel(
            efficiency=self.detector.efficiency,
            jitter_sigma=self.detector.jitter_s,
            dark_rate=self.detector.dark_rate_hz,
            tick=self.detector.tick_s,
        )

    def interferometer_model(self) -> InterferometerModel:
        return InterferometerModel(
            insertion_loss_db_s=self.interferometer.insertion_loss_db_s,
            insertion_loss_db_i=self.interferometer.insertion_loss_db_i,
        )

    def shifter_model(self) -> ShifterModel:
        return ShifterModel(carrier_suppression_db=self.interferometer.carrier_suppression_db)

    def drift_model(self) -> DriftModel:
        return DriftModel(rate=rad_per_min_to_rad_per_s(self.simulation.drift_rad_per_min))

    def visibility_budget(self) -> VisibilityBudget:
        return VisibilityBudget(
            multi_pair=self.budget.multi_pair,
            extra_sidebands=self.budget.extra_sidebands,
            modulator_dispersion=self.budget.modulator_dispersion,
            phase_blur=self.budget.phase_blur_rad,
        )

    def sweep_phis(self) -> list[float]:
        if self.sweep.phis is not None:
            return list(self.sweep.phis)
        step = 2.0 * math.pi / (self.sweep.points - 1)
        return [k * step for k in range(self.sweep.points)]


# Loading ------------------------------------------------------------------------------


def _apply_overrides(data: CommentedMap, overrides: list[str]) -> None:
    """Merge `section.key=value` strings into the loaded mapping, in place."""
    parsed = OmegaConf.to_container(OmegaConf.from_dotlist(overrides))

    def merge(target: CommentedMap, updates: dict[str, Any]) -> None:
        for key, value in updates.items():
            if isinstance(value, dict) and isinstance(target.get(key), dict):
                merge(target[key], value)
            else:
                target[key] = value

    merge(data, parsed)


def _line_of(data: Any, location: tuple[Any, ...]) -> int | None:
    """1-based line of the deepest key of `location` present in the YAML mapping."""
    line, node = None, data
    for key in location:
        if not isinstance(node, CommentedMap) or key not in node:
            continue
        position = node.lc.key(key)
        if position is not None:
            line = position[0] + 1
        node = node[key]
    return line


def describe_errors(error: ValidationError, data: Any, source: str) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        line = _line_of(data, item["loc"])
        where = f"{source}:{line}" if line else source
        lines.append(f"{where}: {location}: {item['msg']}")
    return "\n".join(lines)


def load_run_config(path: str | Path | None = None, overrides: list[str] | None = None) -> RunConfig:
    """
    Validate a run file (defaults only when `path` is None) plus dotted overrides.

    Raises:
        ConfigError: Listing every invalid or unknown key with its file and line.
    """
    data = read_file(path=path) if path is not None else CommentedMap()
    if data is None:
        data = CommentedMap()
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: a run file must be a mapping of sections")
    if overrides:
        _apply_overrides(data, list(overrides))
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(describe_errors(e, data, str(path or "<overrides>"))) from e
