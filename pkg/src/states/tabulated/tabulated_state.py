from dataclasses import dataclass
from pathlib import Path

from decorators.error_handler import CfiValidationError
from numerics.amplitudes import (
    JointSpectralAmplitude2D,
    SpectralAmplitude1D,
    read_spectral_csv,
)
from schemas.state_schema import AbstractBiphotonState
from utils.log_utils import log


def tabulated_jsa(path: str | Path) -> SpectralAmplitude1D | JointSpectralAmplitude2D:
    """
    Load a tabulated JSA from CSV; the result is normalized and its raw norm logged.

    Raises:
        FormatError: Bad header, non-numeric cells, non-uniform spacing, bad grid order.
        GridError: Point count not a power of two >= 8.
        NormalizationError: Zero norm.
    """
    amplitude = read_spectral_csv(path)
    log(message=f"Tabulated JSA '{path}' loaded, raw norm {amplitude.raw_norm:.9g}", level="INFO")
    return amplitude


@dataclass
class TabulatedState(AbstractBiphotonState):
    """State read from a CSV file; its own grid replaces `grid`."""

    def __post_init__(self) -> None:
        self.config_dir = self.config_dir or Path(__file__).parent
        self.config_file = self.config_file or "tabulated_config.yaml"
        self.config = self._load_config()
        self.build()
        log(message=f"{self} initialized.", level="INFO")

    def build(self) -> None:
        path = self.config["path"]
        if not path:
            raise CfiValidationError(f"{self} needs a 'path' to a JSA CSV file")
        amplitude = tabulated_jsa(path)
        if isinstance(amplitude, SpectralAmplitude1D):
            self.jsa = amplitude
            self.grid = amplitude.grid
        else:
            self.joint_jsa = amplitude
