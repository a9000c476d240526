from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from cfi.cfi_core import cfi_visibility_cw
from decorators.error_handler import CfiValidationError
from numerics.amplitudes import (
    JointSpectralAmplitude2D,
    SpectralAmplitude1D,
    TemporalAmplitude1D,
    TemporalIntensity1D,
)
from numerics.grids import FrequencyGrid
from numerics.transforms import jsa_to_jta_cw
from utils.file_utils import read_file


@dataclass
class AbstractBiphotonState(ABC):
    """
    Abstract class for all biphoton state families.

    Default parameters live in a YAML file next to each implementation (key
    'state_params'); `overrides` replaces any of them. Subclasses build the cw
    spectral amplitude on `grid` and, where defined, a joint 2-D amplitude.
    """

    overrides: dict[str, Any] = field(default_factory=dict)
    grid: FrequencyGrid | None = None
    config_dir: str | Path | None = None
    config_file: str | None = None
    config: dict[str, Any] = field(init=False)

    jsa: SpectralAmplitude1D | None = field(init=False, default=None)
    joint_jsa: JointSpectralAmplitude2D | None = field(init=False, default=None)

    @abstractmethod
    def build(self) -> None:
        raise NotImplementedError

    def _load_config(self) -> dict[str, Any]:
        """
        Returns the default parameters merged with `overrides`.
        Unknown override keys are rejected.
        """
        defaults = dict(read_file(path=Path(self.config_dir) / self.config_file)["state_params"])
        unknown = set(self.overrides) - set(defaults)
        if unknown:
            raise CfiValidationError(f"{self}: unknown parameters {sorted(unknown)}")
        return {**defaults, **self.overrides}

    @property
    def cw_jsa(self) -> SpectralAmplitude1D:
        if self.jsa is None:
            raise CfiValidationError(f"{self} has no cw (1-D) spectral amplitude")
        return self.jsa

    def jta(self) -> TemporalAmplitude1D:
        return jsa_to_jta_cw(self.cw_jsa)

    def jti(self) -> TemporalIntensity1D:
        return TemporalIntensity1D.from_amplitude(self.jta())

    def visibility(self, delta_omega: float) -> float:
        """CFI visibility for a frequency shift ΔΩ (rad/s), time-domain form."""
        return cfi_visibility_cw(self.jti(), delta_omega)

    def __str__(self) -> str:
        return f"{self.__class__.__name__}"
