from pathlib import Path

import pytest

from experiment.experiment_models import DetectorModel
from numerics.grids import FrequencyGrid
from states.gaussian.gaussian_state import gaussian_cw_jsa
from utils.unit_utils import dispersion_to_beta2, hz_to_rad_s

SHIFT_HZ = 15.65e9


@pytest.fixture
def delta_omega() -> float:
    return hz_to_rad_s(SHIFT_HZ)


@pytest.fixture
def flat_top_grid(delta_omega) -> FrequencyGrid:
    """4096 points, ΔΩ = 64 steps."""
    return FrequencyGrid(n=4096, d_omega=delta_omega / 64)


@pytest.fixture
def beta2() -> float:
    return dispersion_to_beta2(10.0, 1560.0)


@pytest.fixture
def ideal_detector() -> DetectorModel:
    return DetectorModel(efficiency=1.0, jitter_sigma=0.0, dark_rate=0.0)


@pytest.fixture
def gaussian_ridge(flat_top_grid):
    return gaussian_cw_jsa(1e-12, flat_top_grid)


@pytest.fixture
def run_file(tmp_path):
    """Writes a run YAML into tmp_path; the output directory defaults to tmp_path/out."""

    def write(body: str = "", name: str = "run.yaml") -> Path:
        path = tmp_path / name
        if "output:" not in body:
            body = f"{body}\noutput:\n  directory: {tmp_path / 'out'}\n"
        path.write_text(body)
        return path

    return write
