import math

import numpy as np
import pytest

from analysis.peaks import PeakSet
from cfi.cfi_sweep import PhiSweep
from experiment.scans import FringeScan
from experiment.timetags import HEADER_SIZE, MAGIC
from main import CfiCommands
from states.flat_top.flat_top_state import flat_top_visibility_closed_form
from utils.file_utils import read_file
from utils.unit_utils import hz_to_rad_s

FLAT_TOP_PI = "state:\n  kind: flat_top\n  phi: 3.141592653589793\n"


@pytest.fixture
def cli() -> CfiCommands:
    return CfiCommands()


def test_visibility_of_step_phase(cli, run_file):
    assert cli.visibility(config=str(run_file(FLAT_TOP_PI))) == "V = 0.755"


def test_visibility_without_shift(cli, run_file):
    path = run_file("state:\n  kind: gaussian\ncfi:\n  delta_omega_hz: 0.0\n")
    assert cli.visibility(config=str(path)) == "V = 1.000"


def test_phi_sweep_written(cli, run_file, tmp_path):
    summary = cli.sweep_phi(config=str(run_file()))
    assert summary.startswith("V(φ) = [0.951, ")
    sweep = PhiSweep.from_csv(tmp_path / "out" / "phi_sweep.csv")
    omega_max, delta_omega = hz_to_rad_s(1.6e11), hz_to_rad_s(15.65e9)
    expected = [flat_top_visibility_closed_form(omega_max, delta_omega, phi) for phi in sweep.phi]
    np.testing.assert_allclose(sweep.visibility, expected, atol=1e-3)
    assert sweep.visibility[0] == pytest.approx(sweep.visibility[-1], abs=1e-12)


def test_sweep_needs_flat_top(cli, run_file):
    with pytest.raises(SystemExit) as error:
        cli.sweep_phi(config=str(run_file("state:\n  kind: gaussian\n")))
    assert error.value.code == 1


def test_simulate_needs_seed(cli, run_file):
    with pytest.raises(SystemExit) as error:
        cli.simulate(config=str(run_file()))
    assert error.value.code == 1


SMALL_RUN = (
    "interferometer:\n"
    "  insertion_loss_db_s: 0.0\n"
    "  insertion_loss_db_i: 0.0\n"
    "simulation:\n"
    "  pair_rate_hz: 1.0e+6\n"
    "  duration_s: 0.05\n"
    "  bins: 40\n"
)


def test_simulate_is_reproducible(cli, run_file, tmp_path):
    path = str(run_file(SMALL_RUN))
    for name in ("first", "second"):
        cli.simulate(seed=1, config=path, overrides=[f"output.directory={tmp_path / name}"])
    first, second = tmp_path / "first", tmp_path / "second"
    assert (first / "timetags.bin").read_bytes() == (second / "timetags.bin").read_bytes()
    assert (first / "fringe_scan.csv").read_text() == (second / "fringe_scan.csv").read_text()
    assert len(FringeScan.from_csv(first / "fringe_scan.csv")) == 40


def test_simulated_stream_shows_three_peaks(cli, run_file, tmp_path):
    path = str(run_file(SMALL_RUN))
    cli.simulate(seed=2, config=path)
    summary = cli.analyze(stream=str(tmp_path / "out" / "timetags.bin"), config=path)
    assert "3 peaks" in summary
    peaks = PeakSet.from_csv(tmp_path / "out" / "peaks.csv")
    assert np.argmax(peaks.areas) == 1
    assert (tmp_path / "out" / "histogram.csv").exists()


def test_analyze_scan_reports_visibility(cli, run_file, tmp_path):
    phi = np.linspace(0.0, 2.0 * math.pi, 40, endpoint=False)
    FringeScan(phi_t=phi, coincidences=500.0 * (1.0 + 0.93 * np.cos(phi)), integration=30.0).to_csv(
        tmp_path / "scan.csv"
    )
    summary = cli.analyze(scan=str(tmp_path / "scan.csv"), config=str(run_file()))
    assert summary.startswith("V = 0.930")
    table = read_file(path=tmp_path / "out" / "visibility.csv")
    assert list(table.columns) == ["method", "v", "sigma_v", "threshold_sigmas"]
    assert list(table["method"]) == ["fit", "minmax"]
    assert (tmp_path / "out" / "fit_report.csv").exists()


def test_analyze_rejects_malformed_stream(cli, run_file, tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTATAG!" + bytes(8))
    with pytest.raises(SystemExit) as error:
        cli.analyze(stream=str(bad), config=str(run_file()))
    assert error.value.code == 1


def test_analyze_empty_stream(cli, run_file, tmp_path):
    empty = tmp_path / "empty.bin"
    empty.write_bytes(MAGIC + (128).to_bytes(8, "little"))
    assert empty.stat().st_size == HEADER_SIZE
    assert cli.analyze(stream=str(empty), config=str(run_file())) == "empty stream"
    assert len(PeakSet.from_csv(tmp_path / "out" / "peaks.csv")) == 0


def test_retrieve_from_exported_magnitudes(cli, run_file, tmp_path):
    path = str(run_file("output:\n  export_magnitudes: true\n  directory: " + str(tmp_path / "out") + "\n"))
    assert cli.visibility(config=path) == "V = 0.951"
    out = tmp_path / "out"
    summary = cli.retrieve(str(out / "jsi_magnitude.csv"), str(out / "jti_magnitude.csv"), config=path)
    assert summary.endswith("V = 0.951")
    assert "not converged" not in summary
    assert (out / "phase.csv").exists()


def test_selftest(cli):
    assert cli.selftest() == "selftest passed (5 checks)"


def test_retrieve_step_phase_converges(cli, run_file, tmp_path):
    out = tmp_path / "out"
    body = FLAT_TOP_PI + f"grid:\n  n: 1024\n  shift_subdivisions: 8\noutput:\n  export_magnitudes: true\n  directory: {out}\n"
    path = str(run_file(body))
    cli.visibility(config=path)
    summary = cli.retrieve(str(out / "jsi_magnitude.csv"), str(out / "jti_magnitude.csv"), config=path)
    assert "not converged" not in summary
    assert summary.endswith("V = 0.755")
