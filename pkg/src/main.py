import math
from dataclasses import replace
from pathlib import Path

import numpy as np
from fire import Fire

from analysis.fringe_fit import fit_fringe, scan_visibility_minmax, threshold_sigmas
from analysis.histogram import build_histogram
from analysis.mapping import map_time_to_frequency
from analysis.peaks import find_peaks
from cfi.cfi_core import (
    CfiConfig,
    cfi_probability_2d,
    cfi_visibility_cw,
    cfi_visibility_freq,
    gaussian_visibility_closed_form,
    visibility_from_probabilities,
)
from cfi.cfi_sweep import sweep_phi_visibility
from configs.app_config import AppConfig
from decorators.error_handler import CfiRuntimeError, ConfigError, exit_on_errors
from experiment.experiment_models import expected_rates
from experiment.scans import FringeScan, simulate_drift_scan, simulate_pzt_scan
from experiment.timetags import read_timetags, simulate_timetags, write_timetags
from numerics.amplitudes import (
    read_spectral_magnitude_csv,
    read_temporal_magnitude_csv,
    write_magnitude_csv,
)
from numerics.grids import FrequencyGrid
from numerics.transforms import jsa_to_jta_2d, jsa_to_jta_cw
from retrieval.canonical import canonicalize
from retrieval.phase_retrieval import gerchberg_saxton
from schemas.run_schema import FlatTopSection, RunConfig
from schemas.state_schema import AbstractBiphotonState
from states.flat_top.flat_top_state import FlatTopPhaseParams, flat_top_visibility_closed_form
from states.gaussian.gaussian_state import gaussian_cw_jsa
from states.state_factory import build_state
from utils.file_utils import write_file
from utils.log_utils import log, setup_logs
from utils.plot_utils import plot_fringe, plot_histogram, plot_phi_sweep
from utils.unit_utils import hz_to_rad_s, rad_s_to_hz

SELFTEST_TOLERANCE = 1e-3


def _state_visibility(state: AbstractBiphotonState, cfg: CfiConfig) -> float:
    """cw states through their JTI; joint-only (tabulated 2-D) states through the pulsed form."""
    if state.jsa is not None:
        return state.visibility(cfg.delta_omega)
    jti = jsa_to_jta_2d(state.joint_jsa)
    fringe = [cfi_probability_2d(jti, replace(cfg, phi_s=phi, phi_i=0.0)) for phi in (0.0, math.pi)]
    return visibility_from_probabilities(np.array(fringe))


class CfiCommands:
    """
    Conjugate-Franson interferometry toolkit.

    Every command takes an optional run file (`--config`) plus dotted overrides
    (`--overrides='["cfi.phi_s=1.0"]'`) and writes its files under the output
    directory. Exit codes: 0 success, 1 validation error, 2 runtime error.
    """

    def __init__(
        self,
        settings_dir: str | Path | None = None,
        settings_file: str = "settings.yaml",
    ):
        self._settings_dir = settings_dir
        self._settings_file = settings_file

    def _setup(self, config: str | Path | None, overrides: list[str] | str | None) -> RunConfig:
        AppConfig.load(config_dir=self._settings_dir, config_file=self._settings_file)
        setup_logs(config=AppConfig.settings["logs"])
        if isinstance(overrides, str):
            overrides = [overrides]
        run = AppConfig.load_run(config, overrides)
        log(message=f"Run configuration: {run}", level="INFO")
        return run

    @staticmethod
    def _output(name: str) -> Path:
        return AppConfig.output_dir() / name

    @exit_on_errors()
    def visibility(self, config: str | None = None, overrides: list[str] | None = None, sweep: bool = False) -> str:
        """Print V for the configured state and shift; optionally write the φ sweep."""
        run = self._setup(config, overrides)
        cfg = run.cfi_config()
        state = build_state(run)
        visibility = _state_visibility(state, cfg)
        if run.output.export_magnitudes and state.jsa is not None:
            write_magnitude_csv(state.cw_jsa, self._output("jsi_magnitude.csv"))
            write_magnitude_csv(state.jta(), self._output("jti_magnitude.csv"))
        if sweep or run.sweep.phis is not None:
            self._sweep(run)
        return f"V = {visibility:.3f}"

    @exit_on_errors()
    def sweep_phi(self, config: str | None = None, overrides: list[str] | None = None) -> str:
        """Write `phi_rad,visibility` for the flat-top family over the configured φ values."""
        run = self._setup(config, overrides)
        sweep = self._sweep(run)
        rows = ", ".join(f"{v:.3f}" for v in sweep.visibility)
        return f"V(φ) = [{rows}]"

    def _sweep(self, run: RunConfig):
        if not isinstance(run.state, FlatTopSection):
            raise ConfigError("The φ sweep is defined for flat_top states only")
        params = FlatTopPhaseParams(
            omega_max=hz_to_rad_s(run.state.omega_max_hz),
            omega_1=hz_to_rad_s(run.state.omega_1_hz),
        )
        delta_omega = hz_to_rad_s(run.cfi.delta_omega_hz)
        sweep = sweep_phi_visibility(
            params,
            run.frequency_grid(),
            delta_omega,
            np.array(run.sweep_phis()),
            method=run.sweep.method,
            n_jobs=run.sweep.n_jobs,
        )
        sweep.to_csv(self._output("phi_sweep.csv"))
        if run.output.svg:
            closed = [flat_top_visibility_closed_form(params.omega_max, delta_omega, phi) for phi in sweep.phi]
            plot_phi_sweep(sweep.phi, sweep.visibility, self._output("phi_sweep.svg"), closed_form=closed)
        return sweep

    @exit_on_errors()
    def simulate(
        self,
        seed: int | None = None,
        config: str | None = None,
        overrides: list[str] | None = None,
    ) -> str:
        """Simulate a time-tag stream and a fringe scan; `--seed` is mandatory."""
        if seed is None:
            raise ConfigError("simulate needs --seed; simulation commands are deterministic")
        run = self._setup(config, overrides)
        cfg = run.cfi_config()
        state = build_state(run)
        det, budget = run.detector_model(), run.visibility_budget()
        interferometer, shifters = run.interferometer_model(), run.shifter_model()
        sim = run.simulation

        stream = simulate_timetags(
            state, cfg, det, shifters, run.drift_model(), sim.pair_rate_hz, sim.duration_s, seed,
            interferometer=interferometer, budget=budget, visibility=sim.visibility,
            n_chunks=sim.n_chunks, n_jobs=sim.n_jobs,
        )
        stream_path = self._output(f"timetags.{run.output.stream_format}")
        write_timetags(stream, stream_path)

        scan_args = dict(
            interferometer=interferometer, shifters=shifters, budget=budget,
            visibility=sim.visibility, coincidence_window=sim.coincidence_window_s,
        )
        if sim.scan == "pzt":
            scan = simulate_pzt_scan(
                state, cfg, det, sim.pair_rate_hz, sim.bin_seconds, seed,
                drift=run.drift_model(), max_points=sim.bins, **scan_args,
            )
        else:
            scan = simulate_drift_scan(
                state, cfg, det, run.drift_model(), sim.pair_rate_hz, sim.bin_seconds, sim.bins, seed, **scan_args
            )
        scan.to_csv(self._output("fringe_scan.csv"))
        if run.output.svg:
            plot_fringe(scan.phi_t, scan.coincidences, self._output("fringe_scan.svg"))

        rates = expected_rates(
            state, cfg, det, sim.pair_rate_hz, interferometer, shifters, budget, sim.coincidence_window_s
        )
        return (
            f"{len(stream)} tags -> {stream_path}; {len(scan)} scan points; "
            f"expected central {rates.central_peak:.3g}/s, side {rates.side_peak_each:.3g}/s each"
        )

    @exit_on_errors()
    def analyze(
        self,
        stream: str | None = None,
        scan: str | None = None,
        config: str | None = None,
        overrides: list[str] | None = None,
    ) -> str:
        """Histogram, peaks and frequency mapping of a stream; fit and min/max visibility of a scan."""
        if stream is None and scan is None:
            raise ConfigError("analyze needs --stream and/or --scan")
        run = self._setup(config, overrides)
        summary = []
        if stream is not None:
            summary.append(self._analyze_stream(run, stream))
        if scan is not None:
            summary.append(self._analyze_scan(run, scan))
        return "; ".join(summary)

    def _analyze_stream(self, run: RunConfig, path: str) -> str:
        cfg = run.cfi_config()
        tags = read_timetags(path, tick=run.detector.tick_s)
        separation = cfg.side_peak_delay
        window = run.analysis.window_s or 3.0 * separation
        if not window > 0:
            raise ConfigError("analysis.window_s is required when the configured dispersion or shift is zero")
        hist = build_histogram(tags, window, run.analysis.bin_width_s or tags.tick)
        hist.to_csv(self._output("histogram.csv"))
        if not len(tags):
            write_file(path=self._output("peaks.csv"), data={"center_s": [], "area": [], "rms_s": []})
            log(message=f"'{path}' holds no time tags; reports are empty", level="WARNING")
            return "empty stream"
        if not separation > 3.0 * hist.bin_width:
            raise ConfigError("Side-peak delay β₂ΔΩ must exceed three histogram bins to resolve the peaks")
        peaks = find_peaks(hist, separation)
        peaks.to_csv(self._output("peaks.csv"))
        if run.output.svg:
            plot_histogram(hist.centers, hist.counts, self._output("histogram.svg"), peaks.centers)
        if len(peaks) < 3 or cfg.beta2 == 0:
            return f"{hist.total:.0f} coincidences, {len(peaks)} peaks"
        jitter = math.sqrt(2.0) * run.detector.jitter_s
        mapping = map_time_to_frequency(float(np.mean(peaks.separations)), cfg.beta2, jitter=jitter)
        return (
            f"{hist.total:.0f} coincidences, 3 peaks, shift {rad_s_to_hz(mapping.detuning) / 1e9:.2f} GHz "
            f"(resolution {rad_s_to_hz(mapping.resolution) / 1e9:.2f} GHz)"
        )

    def _analyze_scan(self, run: RunConfig, path: str) -> str:
        scan = FringeScan.from_csv(path)
        fit = fit_fringe(scan)
        fit.to_csv(self._output("fit_report.csv"))
        minmax = scan_visibility_minmax(scan)
        write_file(
            path=self._output("visibility.csv"),
            data={
                "method": [fit.visibility.method, minmax.method],
                "v": [fit.visibility.v, minmax.v],
                "sigma_v": [fit.visibility.sigma_v, minmax.sigma_v],
                "threshold_sigmas": [threshold_sigmas(fit.visibility), threshold_sigmas(minmax)],
            },
        )
        if run.output.svg:
            fitted = (fit.amplitude, fit.visibility.v, fit.phase_offset)
            plot_fringe(scan.phi_t, scan.coincidences, self._output("fit.svg"), fitted=fitted)
        return f"V = {fit.visibility.v:.3f} ± {fit.visibility.sigma_v:.3f} (fit), {minmax.v:.3f} ± {minmax.sigma_v:.3f} (min/max)"

    @exit_on_errors()
    def retrieve(
        self,
        jsi: str,
        jti: str,
        config: str | None = None,
        overrides: list[str] | None = None,
    ) -> str:
        """Recover the spectral phase from JSI and JTI magnitude CSVs; writes `phase.csv`."""
        run = self._setup(config, overrides)
        options = run.retrieval
        result = gerchberg_saxton(
            read_spectral_magnitude_csv(jsi),
            read_temporal_magnitude_csv(jti),
            max_iter=options.max_iter,
            tol=options.tol,
            init=options.init,
            seed=options.seed,
            restarts=options.restarts,
            n_jobs=options.n_jobs,
        )
        if options.canonicalize:
            result = canonicalize(result)
        result.to_csv(self._output("phase.csv"))
        delta_omega = hz_to_rad_s(run.cfi.delta_omega_hz)
        visibility = cfi_visibility_cw(jsa_to_jta_cw(result.state()), delta_omega)
        return (
            f"residual {result.magnitude_residual:.2e} after {result.iterations} iterations"
            f"{'' if result.converged else ' (not converged)'}; V = {visibility:.3f}"
        )

    @exit_on_errors()
    def selftest(self) -> str:
        """Closed-form checks of the visibility functional on the reference states."""
        AppConfig.load(config_dir=self._settings_dir, config_file=self._settings_file)
        setup_logs(config=AppConfig.settings["logs"])
        delta_omega = hz_to_rad_s(15.65e9)
        grid = FrequencyGrid(n=4096, d_omega=delta_omega / 64)
        failures = []
        for phi in (0.0, math.pi):
            run = RunConfig.model_validate({"state": {"kind": "flat_top", "phi": phi}})
            state = build_state(run, grid)
            expected = flat_top_visibility_closed_form(state.params.omega_max, delta_omega, phi)
            time_form = state.visibility(delta_omega)
            freq_form = cfi_visibility_freq(state.cw_jsa, delta_omega)
            if abs(time_form - expected) > SELFTEST_TOLERANCE or abs(time_form - freq_form) > 1e-9:
                failures.append(f"flat_top φ={phi:.3f}: {time_form:.6f} vs {expected:.6f}")
        for sigma_cor in (1e-12, 2e-12, 4e-12):
            jsa = gaussian_cw_jsa(sigma_cor, grid)
            computed = cfi_visibility_cw(jsa_to_jta_cw(jsa), delta_omega)
            expected = gaussian_visibility_closed_form(sigma_cor, delta_omega)
            if abs(computed - expected) > 1e-6:
                failures.append(f"gaussian σ_cor={sigma_cor:g}: {computed:.9f} vs {expected:.9f}")
        if failures:
            raise CfiRuntimeError("selftest failed: " + "; ".join(failures))
        return "selftest passed (5 checks)"


if __name__ == "__main__":
    Fire(CfiCommands)
