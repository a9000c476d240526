import math

import pytest

from decorators.error_handler import ConfigError
from experiment.experiment_models import MEASURED_BUDGET
from schemas.run_schema import FlatTopSection, GaussianSection, RunConfig, load_run_config
from states.gaussian.gaussian_state import GaussianState
from states.state_factory import build_state
from utils.unit_utils import hz_to_rad_s


def test_defaults_describe_reference_setup():
    run = load_run_config()
    assert isinstance(run.state, FlatTopSection)
    cfg = run.cfi_config()
    assert cfg.beta2 == pytest.approx(1.2919e-20, rel=1e-3)
    assert cfg.delta_omega == pytest.approx(hz_to_rad_s(15.65e9))
    grid = run.frequency_grid()
    assert grid.n == 8192
    assert grid.d_omega * 128 == pytest.approx(cfg.delta_omega, rel=1e-12)
    assert run.output.stream_format == "bin"


def test_unknown_key_reports_line(run_file):
    path = run_file(
        "state:\n"
        "  kind: flat_top\n"
        "  phi: 3.14159\n"
        "cfi:\n"
        "  delta_omega_hz: 1.565e+10\n"
        "  dispersoin_ns_per_nm: 10\n"
    )
    with pytest.raises(ConfigError) as error:
        load_run_config(path)
    message = str(error.value)
    assert f"{path}:6" in message
    assert "cfi.dispersoin_ns_per_nm" in message


def test_invalid_value_rejected(run_file):
    with pytest.raises(ConfigError, match="cfi.eta"):
        load_run_config(run_file("cfi:\n  eta: -0.5\n"))
    with pytest.raises(ConfigError, match="grid.n"):
        load_run_config(overrides=["grid.n=1000"])
    with pytest.raises(ConfigError, match="path"):
        load_run_config(overrides=["state.kind=tabulated"])


def test_overrides_merge_into_file(run_file):
    path = run_file("cfi:\n  phi_s: 0.2\n")
    run = load_run_config(path, ["cfi.phi_i=1.5", "state.kind=gaussian"])
    assert run.cfi.phi_s == 0.2
    assert run.cfi_config().phi_t == pytest.approx(1.7)
    assert isinstance(run.state, GaussianSection)


def test_sweep_phis_cover_full_turn():
    phis = RunConfig().sweep_phis()
    assert phis == pytest.approx([0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])
    assert RunConfig.model_validate({"sweep": {"phis": [0.5]}}).sweep_phis() == [0.5]


def test_zero_shift_uses_explicit_spacing():
    run = RunConfig.model_validate({"cfi": {"delta_omega_hz": 0.0}})
    assert run.frequency_grid().d_omega == pytest.approx(hz_to_rad_s(2.5e8))


def test_apparatus_models():
    run = RunConfig()
    eta_s, eta_i = run.interferometer_model().eta_tot(run.detector_model())
    assert eta_s == pytest.approx(0.8 * 10 ** (-1.86))
    assert eta_i == pytest.approx(0.8 * 10 ** (-2.27))
    assert run.shifter_model().leakage == pytest.approx(10 ** (-2.5))
    assert run.drift_model().rate == pytest.approx(0.005)
    assert run.visibility_budget() == MEASURED_BUDGET
    assert MEASURED_BUDGET.factor == pytest.approx(0.996 * 0.993 * 0.995)


def test_state_factory_builds_configured_state():
    run = RunConfig.model_validate({"state": {"kind": "gaussian", "sigma_cor_s": 2e-12}})
    state = build_state(run)
    assert isinstance(state, GaussianState)
    assert state.params.sigma_cor == 2e-12
    assert state.grid == run.frequency_grid()
