"""Builds the biphoton state named by the `state` section of a run file."""

from numerics.grids import FrequencyGrid
from schemas.run_schema import FlatTopSection, GaussianSection, RunConfig, TabulatedSection
from schemas.state_schema import AbstractBiphotonState
from states.flat_top.flat_top_state import FlatTopState
from states.gaussian.gaussian_state import GaussianState
from states.tabulated.tabulated_state import TabulatedState
from utils.unit_utils import hz_to_rad_s


def build_state(run: RunConfig, grid: FrequencyGrid | None = None) -> AbstractBiphotonState:
    """
    State of `run` on `grid` (the run's frequency grid by default). Flat-top states
    get a guard band of 2·ΔΩ so shifted copies stay on the grid.
    """
    grid = grid or run.frequency_grid()
    parameters = run.state.to_dict()
    parameters.pop("kind")
    match run.state:
        case FlatTopSection():
            guard = 2.0 * hz_to_rad_s(run.cfi.delta_omega_hz)
            return FlatTopState(overrides=parameters, grid=grid, guard=guard)
        case GaussianSection():
            return GaussianState(overrides=parameters, grid=grid)
        case TabulatedSection():
            return TabulatedState(overrides=parameters)
