import math

from scipy.constants import c as SPEED_OF_LIGHT

TWO_PI = 2.0 * math.pi


def hz_to_rad_s(frequency_hz: float) -> float:
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * frequency_hz


def rad_s_to_hz(omega: float) -> float:
    return omega / TWO_PI


def rad_per_min_to_rad_per_s(rate: float) -> float:
    return rate / 60.0


def db_to_transmission(loss_db: float) -> float:
    """Power transmission of an element with `loss_db` insertion loss."""
    if loss_db < 0:
        raise ValueError(f"Insertion loss must be >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def dispersion_to_beta2(dispersion_ns_per_nm: float, center_wavelength_nm: float) -> float:
    """
    Group-delay dispersion β₂ (s²) of a module with total dispersion D (ns/nm) at λ.

    β₂ = D·λ²/(2πc), so a detuning ω (rad/s) is delayed by β₂·ω.
    10 ns/nm at 1560 nm gives ≈ 1.29e-20 s².
    """
    if center_wavelength_nm <= 0:
        raise ValueError(f"Center wavelength must be positive, got {center_wavelength_nm}")
    dispersion_s_per_m = float(dispersion_ns_per_nm)  # ns/nm == s/m
    wavelength_m = center_wavelength_nm * 1e-9
    return dispersion_s_per_m * wavelength_m**2 / (TWO_PI * SPEED_OF_LIGHT)
