"""Standalone SVG line plots of command outputs (matplotlib, Agg backend)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # must be set before importing pyplot
import matplotlib.pyplot as plt
import numpy as np

from decorators.error_handler import catch_errors
from utils.file_utils import create_dir
from utils.log_utils import log


def _save(fig, path: str | Path) -> Path:
    path = Path(path).with_suffix(".svg")
    create_dir(dir_path=path.parent)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    log(message=f"Plot written to '{path}'", level="INFO")
    return path


@catch_errors()
def plot_fringe(
    phi_t: np.ndarray,
    counts: np.ndarray,
    path: str | Path,
    fitted: tuple[float, float, float] | None = None,
) -> Path:
    """Coincidences against φ_T, with the fitted A·[1 + V cos(φ_T + δ)] when given."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(phi_t, counts, yerr=np.sqrt(np.maximum(counts, 1.0)), fmt="o", ms=3, label="coincidences")
    if fitted is not None:
        amplitude, visibility, offset = fitted
        dense = np.linspace(np.min(phi_t), np.max(phi_t), 400)
        ax.plot(dense, amplitude * (1.0 + visibility * np.cos(dense + offset)), "r-", label=f"fit, V = {visibility:.3f}")
    ax.set_xlabel("φ_T (rad)")
    ax.set_ylabel("coincidences")
    ax.legend()
    return _save(fig, path)


@catch_errors()
def plot_histogram(centers: np.ndarray, counts: np.ndarray, path: str | Path, peak_centers=()) -> Path:
    """Coincidence histogram over t_S − t_I in ns, peak centers marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(centers * 1e9, counts, where="mid")
    for center in peak_centers:
        ax.axvline(center * 1e9, color="r", ls="--", lw=0.8)
    ax.set_xlabel("t_S − t_I (ns)")
    ax.set_ylabel("counts")
    return _save(fig, path)


@catch_errors()
def plot_phi_sweep(phi: np.ndarray, visibility: np.ndarray, path: str | Path, closed_form=None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(phi, visibility, "o-", label="computed")
    if closed_form is not None:
        ax.plot(phi, closed_form, "k--", label="closed form")
    ax.set_xlabel("φ (rad)")
    ax.set_ylabel("V")
    ax.legend()
    return _save(fig, path)
