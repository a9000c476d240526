"""Apparatus models and the expected peak and singles rates of the CFI setup."""

import math
from dataclasses import dataclass, field

import numpy as np

from cfi.cfi_core import CfiConfig, cfi_visibility_cw
from decorators.error_handler import CfiValidationError
from numerics.amplitudes import SpectralAmplitude1D, TemporalAmplitude1D, TemporalIntensity1D
from numerics.transforms import jsa_to_jta_cw
from schemas.state_schema import AbstractBiphotonState
from utils.unit_utils import db_to_transmission, rad_per_min_to_rad_per_s

StateLike = AbstractBiphotonState | SpectralAmplitude1D | TemporalAmplitude1D | TemporalIntensity1D | float


def _non_negative(owner: str, **values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value) or value < 0:
            raise CfiValidationError(f"{owner}.{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class DetectorModel:
    """SNSPD channel plus time tagger: efficiency, rms jitter (s), dark rate (1/s), tick (s)."""

    efficiency: float = 0.8
    jitter_sigma: float = 120e-12
    dark_rate: float = 100.0
    tick: float = 128e-12

    def __post_init__(self) -> None:
        _non_negative("DetectorModel", jitter_sigma=self.jitter_sigma, dark_rate=self.dark_rate)
        if not 0.0 <= self.efficiency <= 1.0:
            raise CfiValidationError(f"DetectorModel.efficiency must lie in [0, 1], got {self.efficiency}")
        if not self.tick > 0:
            raise CfiValidationError(f"DetectorModel.tick must be > 0, got {self.tick}")


@dataclass(frozen=True)
class ShifterModel:
    """
    Electro-optic frequency shifter. With probability 10^(−suppression/10) a photon
    in the shifted arm leaves on the residual carrier, i.e. unshifted.
    """

    carrier_suppression_db: float = 25.0
    signal_shift_sign: int = +1
    idler_shift_sign: int = -1

    def __post_init__(self) -> None:
        _non_negative("ShifterModel", carrier_suppression_db=self.carrier_suppression_db)
        if {self.signal_shift_sign, self.idler_shift_sign} != {+1, -1}:
            raise CfiValidationError("Shifters must apply opposite shifts (+ΔΩ and −ΔΩ)")

    @property
    def leakage(self) -> float:
        return 10.0 ** (-self.carrier_suppression_db / 10.0)


@dataclass(frozen=True)
class DriftModel:
    """Linear thermal drift of the sum phase: φ(t) = phi0 + rate·t (rad, rad/s)."""

    rate: float = rad_per_min_to_rad_per_s(0.3)
    phi0: float = 0.0

    def phase(self, t: float | np.ndarray) -> float | np.ndarray:
        return self.phi0 + self.rate * t


@dataclass(frozen=True)
class InterferometerModel:
    """Insertion losses of the signal and idler MZIs (dB), excluding the output-port split."""

    insertion_loss_db_s: float = 0.0
    insertion_loss_db_i: float = 0.0

    def __post_init__(self) -> None:
        _non_negative(
            "InterferometerModel",
            insertion_loss_db_s=self.insertion_loss_db_s,
            insertion_loss_db_i=self.insertion_loss_db_i,
        )

    def eta_tot(self, det: DetectorModel) -> tuple[float, float]:
        """Signal and idler end-to-end efficiencies (loss thinning × detector)."""
        return (
            det.efficiency * db_to_transmission(self.insertion_loss_db_s),
            det.efficiency * db_to_transmission(self.insertion_loss_db_i),
        )


@dataclass(frozen=True)
class VisibilityBudget:
    """
    Visibility penalties not modelled physically. Penalties multiply the state's
    visibility by Π(1 − p); `phase_blur` is the rms of a Gaussian φ_T jitter (rad).
    """

    multi_pair: float = 0.0
    extra_sidebands: float = 0.0
    modulator_dispersion: float = 0.0
    phase_blur: float = 0.0

    def __post_init__(self) -> None:
        for name in ("multi_pair", "extra_sidebands", "modulator_dispersion"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise CfiValidationError(f"VisibilityBudget.{name} must lie in [0, 1), got {value}")
        _non_negative("VisibilityBudget", phase_blur=self.phase_blur)

    @property
    def factor(self) -> float:
        return (1 - self.multi_pair) * (1 - self.extra_sidebands) * (1 - self.modulator_dispersion)

    @property
    def blur_factor(self) -> float:
        """Mean of cos(δ) for δ ~ N(0, phase_blur²)."""
        return math.exp(-(self.phase_blur**2) / 2.0)


# Penalties estimated for the reference apparatus; default of the run file's `budget` section.
MEASURED_BUDGET = VisibilityBudget(multi_pair=0.004, extra_sidebands=0.007, modulator_dispersion=0.005)


@dataclass(frozen=True)
class ExpectedRates:
    """Rates in 1/s. Peak rates exclude accidentals, which are listed separately."""

    central_peak: float
    side_peak_each: float
    singles_s: float
    singles_i: float
    accidentals_per_peak: float = 0.0
    visibility: float = field(default=0.0)


def state_visibility(state: StateLike, delta_omega: float) -> float:
    """Ideal CFI visibility of a state (or a visibility given directly)."""
    match state:
        case AbstractBiphotonState():
            return state.visibility(delta_omega)
        case SpectralAmplitude1D():
            return cfi_visibility_cw(jsa_to_jta_cw(state), delta_omega)
        case TemporalAmplitude1D() | TemporalIntensity1D():
            return cfi_visibility_cw(state, delta_omega)
        case float() | int():
            if not -1.0 <= state <= 1.0:
                raise CfiValidationError(f"Visibility must lie in [-1, 1], got {state}")
            return float(state)
        case _:
            raise CfiValidationError(f"Cannot derive a visibility from {type(state).__name__}")


def peak_fractions(visibility: float, phi_t: float | np.ndarray, leakage: float = 0.0):
    """
    Per-pair probabilities (central, each side) that both photons reach the detected
    ports, before detector and loss thinning.

    Each of the four path configurations carries amplitude 1/4: the two unshifted/shifted
    pairs interfere into (1/8)(1 + V cos φ_T), the single-shift ones give 1/16 each.
    Carrier leakage in a shifted arm moves events between peaks without changing the total.
    """
    interfering = (1.0 + visibility * np.cos(phi_t)) / 8.0
    p = leakage
    central = interfering * (1.0 - p * (1.0 - p)) + p / 8.0
    side = (1.0 - p) / 16.0 + interfering * p * (1.0 - p) / 2.0
    return central, side


def expected_rates(
    state: StateLike,
    cfg: CfiConfig,
    det: DetectorModel,
    pair_rate: float,
    interferometer: InterferometerModel | None = None,
    shifters: ShifterModel | None = None,
    budget: VisibilityBudget | None = None,
    coincidence_window: float = 0.0,
) -> ExpectedRates:
    """
    Mean rates of the three coincidence peaks and the two singles channels.

    Central peak: pair_rate·(η_S η_I/8)(1 + V cos φ_T); side peaks: pair_rate·η_S η_I/16
    each; singles: pair_rate·η/2 + dark rate, independent of φ_T.
    """
    _non_negative("expected_rates", pair_rate=pair_rate, coincidence_window=coincidence_window)
    interferometer = interferometer or InterferometerModel()
    budget = budget or VisibilityBudget()
    leakage = shifters.leakage if shifters else 0.0
    eta_s, eta_i = interferometer.eta_tot(det)
    visibility = state_visibility(state, cfg.delta_omega) * budget.factor * budget.blur_factor
    central, side = peak_fractions(visibility, cfg.phi_t, leakage)
    singles_s = pair_rate * eta_s / 2.0 + det.dark_rate
    singles_i = pair_rate * eta_i / 2.0 + det.dark_rate
    return ExpectedRates(
        central_peak=float(pair_rate * eta_s * eta_i * central),
        side_peak_each=float(pair_rate * eta_s * eta_i * side),
        singles_s=singles_s,
        singles_i=singles_i,
        accidentals_per_peak=singles_s * singles_i * coincidence_window,
        visibility=visibility,
    )
