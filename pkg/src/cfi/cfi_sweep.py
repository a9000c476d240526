"""φ and φ_T sweeps of the CFI visibility and coincidence probability, with CSV forms."""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from cfi.cfi_core import CfiConfig, cfi_probability_cw, cfi_visibility_cw, cfi_visibility_freq
from numerics.amplitudes import TemporalAmplitude1D, TemporalIntensity1D, check_columns
from numerics.grids import FrequencyGrid
from numerics.transforms import jsa_to_jta_cw
from states.flat_top.flat_top_state import FlatTopPhaseParams, flat_top_jsa
from utils.file_utils import read_file, write_file

PHI_SWEEP_COLUMNS = ["phi_rad", "visibility"]
PHI_T_SWEEP_COLUMNS = ["phi_t_rad", "probability"]


@dataclass(frozen=True, eq=False)
class PhiSweep:
    """Visibility of the flat-top family against its step phase φ."""

    phi: np.ndarray
    visibility: np.ndarray

    def to_csv(self, path: str | Path) -> None:
        write_file(path=path, data={"phi_rad": self.phi, "visibility": self.visibility})

    @classmethod
    def from_csv(cls, path: str | Path) -> "PhiSweep":
        frame = check_columns(read_file(path=path), PHI_SWEEP_COLUMNS, path)
        return cls(phi=frame["phi_rad"].to_numpy(), visibility=frame["visibility"].to_numpy())


@dataclass(frozen=True, eq=False)
class FringeSweep:
    """Central-peak coincidence probability against φ_T."""

    phi_t: np.ndarray
    probability: np.ndarray

    def to_csv(self, path: str | Path) -> None:
        write_file(path=path, data={"phi_t_rad": self.phi_t, "probability": self.probability})

    @classmethod
    def from_csv(cls, path: str | Path) -> "FringeSweep":
        frame = check_columns(read_file(path=path), PHI_T_SWEEP_COLUMNS, path)
        return cls(phi_t=frame["phi_t_rad"].to_numpy(), probability=frame["probability"].to_numpy())


def _flat_top_visibility(
    params: FlatTopPhaseParams,
    grid: FrequencyGrid,
    delta_omega: float,
    method: Literal["time", "freq"],
) -> float:
    jsa = flat_top_jsa(params, grid, guard=2.0 * delta_omega)
    if method == "freq":
        return cfi_visibility_freq(jsa, delta_omega)
    return cfi_visibility_cw(jsa_to_jta_cw(jsa), delta_omega)


def sweep_phi_visibility(
    params: FlatTopPhaseParams,
    grid: FrequencyGrid,
    delta_omega: float,
    phis: np.ndarray,
    method: Literal["time", "freq"] = "time",
    n_jobs: int = 1,
    progress: bool = False,
) -> PhiSweep:
    """
    V(φ) for flat-top states that differ from `params` only in φ.

    Points are independent and evaluated in parallel when n_jobs != 1; each
    result depends only on its own φ.
    """
    phis = np.asarray(phis, dtype=np.float64)
    visibilities = Parallel(n_jobs=n_jobs)(
        delayed(_flat_top_visibility)(replace(params, phi=float(phi)), grid, delta_omega, method)
        for phi in tqdm(phis, desc="φ sweep", disable=not progress)
    )
    return PhiSweep(phi=phis, visibility=np.asarray(visibilities, dtype=np.float64))


def sweep_phi_t_probability(
    jti: TemporalIntensity1D | TemporalAmplitude1D,
    cfg: CfiConfig,
    phi_ts: np.ndarray,
) -> FringeSweep:
    """P_CFI(φ_T) at fixed ΔΩ, η; φ_T is carried on the signal phase."""
    phi_ts = np.asarray(phi_ts, dtype=np.float64)
    probabilities = [
        cfi_probability_cw(jti, replace(cfg, phi_s=float(phi_t), phi_i=0.0)) for phi_t in phi_ts
    ]
    return FringeSweep(phi_t=phi_ts, probability=np.asarray(probabilities, dtype=np.float64))
