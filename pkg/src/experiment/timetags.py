"""
Time-tag streams: event-level simulation of the CFI apparatus and file formats.

Binary format (little-endian): 16-byte header b"CFITAG01" + u64 tick in picoseconds,
followed by 9-byte records (u8 channel, u64 tick). CSV debug form: `channel,tick`.
"""

from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from cfi.cfi_core import CfiConfig
from decorators.error_handler import CfiValidationError, FormatError
from experiment.experiment_models import (
    DetectorModel,
    DriftModel,
    InterferometerModel,
    ShifterModel,
    StateLike,
    VisibilityBudget,
    state_visibility,
)
from numerics.amplitudes import SpectralAmplitude1D, check_columns
from utils.file_utils import create_dir, read_file, write_file
from utils.log_utils import log
from utils.seed_utils import make_rng, spawn_seeds

MAGIC = b"CFITAG01"
HEADER_SIZE = 16
TAG_DTYPE = np.dtype([("channel", "u1"), ("tick", "<u8")])
TAG_COLUMNS = ["channel", "tick"]


class Channel(IntEnum):
    SIGNAL = 0
    IDLER = 1


@dataclass(frozen=True, eq=False)
class TimeTagStream:
    """Detection records sorted by (tick, channel); tick and duration in seconds."""

    channels: np.ndarray
    ticks: np.ndarray
    tick: float
    duration: float

    def __post_init__(self) -> None:
        channels = np.array(self.channels, dtype=np.uint8, copy=True)
        ticks = np.array(self.ticks, dtype=np.uint64, copy=True)
        if channels.shape != ticks.shape or channels.ndim != 1:
            raise CfiValidationError("channels and ticks must be 1-D arrays of equal length")
        if not self.tick > 0 or not self.duration > 0:
            raise CfiValidationError("tick and duration must be positive")
        if np.any(channels > Channel.IDLER):
            raise CfiValidationError("channel values must be 0 (signal) or 1 (idler)")
        limit = self.duration / self.tick
        if ticks.size and float(ticks.max()) >= limit:
            raise CfiValidationError("timestamps must lie before duration/tick")
        order = np.lexsort((channels, ticks))
        channels, ticks = channels[order], ticks[order]
        channels.setflags(write=False)
        ticks.setflags(write=False)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "ticks", ticks)

    def __len__(self) -> int:
        return int(self.ticks.size)

    def channel_ticks(self, channel: Channel) -> np.ndarray:
        return self.ticks[self.channels == channel]

    @property
    def tick_ps(self) -> int:
        return int(round(self.tick * 1e12))


def write_timetags(stream: TimeTagStream, path: str | Path) -> None:
    """Binary (`.bin`/`.cfitag`) or CSV (`.csv`) depending on the extension."""
    path = Path(path)
    if path.suffix == ".csv":
        write_file(path=path, data={"channel": stream.channels, "tick": stream.ticks})
        return
    records = np.empty(len(stream), dtype=TAG_DTYPE)
    records["channel"] = stream.channels
    records["tick"] = stream.ticks
    create_dir(dir_path=path.parent)
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(np.array(stream.tick_ps, dtype="<u8").tobytes())
        handle.write(records.tobytes())
    log(message=f"{len(stream)} time tags written to '{path}'", level="INFO")


def _duration_of(ticks: np.ndarray, tick: float) -> float:
    return (float(ticks.max()) + 1.0) * tick if ticks.size else tick


def _check_order(channels: np.ndarray, ticks: np.ndarray, position) -> None:
    for channel in Channel:
        index = np.flatnonzero(channels == channel)
        drops = np.flatnonzero(np.diff(ticks[index].astype(np.int64)) < 0)
        if drops.size:
            record = int(index[drops[0] + 1])
            raise FormatError(f"{channel.name.lower()} timestamps decrease", **position(record))


def read_timetags(path: str | Path, tick: float = 128e-12) -> TimeTagStream:
    """
    Read a binary or CSV stream. The CSV form carries no tick, so `tick` applies to it;
    the duration is taken as (last tick + 1)·tick.

    Raises:
        FormatError: Bad magic, truncated header or record, invalid channel, or
            decreasing timestamps, naming the byte offset (binary) or line (CSV).
    """
    path = Path(path)
    if path.suffix == ".csv":
        frame = check_columns(read_file(path=path), TAG_COLUMNS, path)
        channels = frame["channel"].to_numpy()
        bad = np.flatnonzero((channels != 0) & (channels != 1))
        if bad.size:
            raise FormatError(f"{path}: invalid channel", line=int(bad[0]) + 2)
        ticks = frame["tick"].to_numpy()
        if np.any(ticks < 0):
            raise FormatError(f"{path}: negative tick", line=int(np.argmax(ticks < 0)) + 2)
        ticks = ticks.astype(np.uint64)
        _check_order(channels, ticks, lambda record: {"line": record + 2})
        return TimeTagStream(channels, ticks, tick, _duration_of(ticks, tick))

    data = path.read_bytes()
    for offset, expected in enumerate(MAGIC):
        if offset >= len(data) or data[offset] != expected:
            raise FormatError(f"{path}: bad or missing 'CFITAG01' header", offset=offset)
    if len(data) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header", offset=len(data))
    tick_ps = int(np.frombuffer(data[8:HEADER_SIZE], dtype="<u8")[0])
    if tick_ps == 0:
        raise FormatError(f"{path}: zero tick resolution", offset=8)
    payload = len(data) - HEADER_SIZE
    if payload % TAG_DTYPE.itemsize:
        whole = payload // TAG_DTYPE.itemsize
        raise FormatError(
            f"{path}: truncated record", offset=HEADER_SIZE + whole * TAG_DTYPE.itemsize
        )
    records = np.frombuffer(data, dtype=TAG_DTYPE, offset=HEADER_SIZE)
    offset_of = lambda record: {"offset": HEADER_SIZE + record * TAG_DTYPE.itemsize}  # noqa: E731
    bad = np.flatnonzero(records["channel"] > Channel.IDLER)
    if bad.size:
        raise FormatError(f"{path}: invalid channel {records['channel'][bad[0]]}", **offset_of(int(bad[0])))
    _check_order(records["channel"], records["tick"], offset_of)
    tick = tick_ps * 1e-12
    if not records.size:
        log(message=f"'{path}' holds no time tags", level="WARNING")
    return TimeTagStream(records["channel"], records["tick"], tick, _duration_of(records["tick"], tick))


@dataclass(frozen=True)
class _ChunkInputs:
    pair_rate: float
    visibility: float
    phi_t: float
    drift: DriftModel
    phase_blur: float
    leakage: float
    eta_s: float
    eta_i: float
    delta_omega: float
    beta2: float
    jitter: float
    dark_rate: float


def _sample_detunings(rng: np.random.Generator, jsa: SpectralAmplitude1D, size: int) -> np.ndarray:
    weights = jsa.intensity / jsa.intensity.sum()
    index = rng.choice(jsa.grid.n, size=size, p=weights)
    return jsa.grid.points[index] + (rng.random(size) - 0.5) * jsa.grid.d_omega


def _simulate_chunk(
    seed: np.random.SeedSequence,
    start: float,
    stop: float,
    jsa: SpectralAmplitude1D,
    inputs: _ChunkInputs,
) -> tuple[np.ndarray, np.ndarray]:
    """Times (s) of signal and idler detections for pairs emitted in [start, stop)."""
    rng = make_rng(seed)
    n_pairs = int(rng.poisson(inputs.pair_rate * (stop - start)))
    t0 = rng.uniform(start, stop, n_pairs)
    omega = _sample_detunings(rng, jsa, n_pairs)
    phi = inputs.phi_t + inputs.drift.phase(t0)
    if inputs.phase_blur > 0:
        phi = phi + rng.normal(0.0, inputs.phase_blur, n_pairs)
    c = inputs.visibility * np.cos(phi) / 8.0

    # Output ports: both detected 1/4 + c, signal only 1/4 − c, idler only 1/4 − c.
    u = rng.random(n_pairs)
    both = u < 0.25 + c
    signal_only = ~both & (u < 0.5)
    idler_only = (u >= 0.5) & (u < 0.75 - c)

    # Peak assignment among coincidences; interfering class has weight 1/8 + c.
    central = both & (rng.random(n_pairs) < (0.125 + c) / (0.25 + c))
    side_plus = both & ~central & (rng.random(n_pairs) < 0.5)
    side_minus = both & ~central & ~side_plus
    both_shifted = central & (rng.random(n_pairs) < 0.5)
    arm = rng.random((2, n_pairs)) < 0.5
    shifted_s = side_plus | both_shifted | (signal_only & arm[0])
    shifted_i = side_minus | both_shifted | (idler_only & arm[1])

    leak = rng.random((2, n_pairs)) < inputs.leakage
    shifted_s &= ~leak[0]
    shifted_i &= ~leak[1]

    detect_s = (both | signal_only) & (rng.random(n_pairs) < inputs.eta_s)
    detect_i = (both | idler_only) & (rng.random(n_pairs) < inputs.eta_i)

    # Opposite-sign dispersion: both delays follow the signal detuning, so t_S − t_I
    # depends only on which photons were shifted.
    t_s = t0 + inputs.beta2 * (omega + shifted_s * inputs.delta_omega)
    t_i = t0 + inputs.beta2 * (omega + shifted_i * inputs.delta_omega)
    if inputs.jitter > 0:
        t_s = t_s + rng.normal(0.0, inputs.jitter, n_pairs)
        t_i = t_i + rng.normal(0.0, inputs.jitter, n_pairs)

    dark_s = rng.uniform(start, stop, int(rng.poisson(inputs.dark_rate * (stop - start))))
    dark_i = rng.uniform(start, stop, int(rng.poisson(inputs.dark_rate * (stop - start))))
    return np.concatenate([t_s[detect_s], dark_s]), np.concatenate([t_i[detect_i], dark_i])


def simulate_timetags(
    state: StateLike,
    cfg: CfiConfig,
    det: DetectorModel,
    shifters: ShifterModel | None,
    drift: DriftModel | None,
    pair_rate: float,
    duration: float,
    seed: int | None,
    interferometer: InterferometerModel | None = None,
    budget: VisibilityBudget | None = None,
    visibility: float | None = None,
    n_chunks: int = 1,
    n_jobs: int = 1,
) -> TimeTagStream:
    """
    Event-level Monte Carlo of the apparatus down to tagged detections.

    Interference is semiclassical: the central-peak weight follows (1 + V cos φ_T(t)),
    with V from the state (or `visibility`) times the budget penalties. Chunk k of
    `n_chunks` equal time slices draws from ``SeedSequence(seed).spawn(n_chunks)[k]``,
    so the output depends on (seed, n_chunks) and not on n_jobs.

    Raises:
        CfiValidationError: Missing seed, non-positive duration, ΔΩ = 0, or a state
            without a cw spectral amplitude.
    """
    if seed is None:
        raise CfiValidationError("simulate_timetags is deterministic and needs a seed")
    if not duration > 0:
        raise CfiValidationError(f"duration must be positive, got {duration}")
    if not pair_rate >= 0:
        raise CfiValidationError(f"pair_rate must be >= 0, got {pair_rate}")
    if not cfg.delta_omega > 0:
        raise CfiValidationError("Time-tag simulation needs a non-zero frequency shift")
    jsa = state if isinstance(state, SpectralAmplitude1D) else getattr(state, "cw_jsa", None)
    if jsa is None:
        raise CfiValidationError("Time-tag simulation needs a cw spectral amplitude")
    budget = budget or VisibilityBudget()
    interferometer = interferometer or InterferometerModel()
    eta_s, eta_i = interferometer.eta_tot(det)
    ideal = visibility if visibility is not None else state_visibility(state, cfg.delta_omega)
    inputs = _ChunkInputs(
        pair_rate=pair_rate,
        visibility=ideal * budget.factor,
        phi_t=cfg.phi_t,
        drift=drift or DriftModel(rate=0.0),
        phase_blur=budget.phase_blur,
        leakage=shifters.leakage if shifters else 0.0,
        eta_s=eta_s,
        eta_i=eta_i,
        delta_omega=cfg.delta_omega,
        beta2=cfg.beta2,
        jitter=det.jitter_sigma,
        dark_rate=det.dark_rate,
    )
    edges = np.linspace(0.0, duration, n_chunks + 1)
    chunks = Parallel(n_jobs=n_jobs)(
        delayed(_simulate_chunk)(child, edges[k], edges[k + 1], jsa, inputs)
        for k, child in enumerate(spawn_seeds(seed, n_chunks))
    )
    channels, ticks = [], []
    for channel, times in ((Channel.SIGNAL, 0), (Channel.IDLER, 1)):
        stamps = np.concatenate([chunk[times] for chunk in chunks])
        stamps = stamps[(stamps >= 0.0) & (stamps < duration)]
        tagged = np.floor(stamps / det.tick).astype(np.uint64)
        tagged = tagged[tagged < duration / det.tick]
        ticks.append(tagged)
        channels.append(np.full(tagged.size, channel, dtype=np.uint8))
    stream = TimeTagStream(np.concatenate(channels), np.concatenate(ticks), det.tick, duration)
    log(message=f"Simulated {len(stream)} time tags over {duration:g} s (seed {seed})", level="INFO")
    return stream
