import numpy as np


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    """
    Build a numpy Generator (PCG64) from an integer seed or a SeedSequence.

    Example
    -------
    >>> from utils.seed_utils import make_rng
    >>> rng = make_rng(1234)
    """
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """
    Derive `n` independent child sequences from a master seed.

    Child k is ``SeedSequence(seed).spawn(n)[k]``; the derivation depends only on
    (seed, k), so chunked or parallel work reproduces bit-identically regardless
    of how many workers run it.
    """
    if n < 1:
        raise ValueError(f"Need at least one substream, got {n}")
    return np.random.SeedSequence(seed).spawn(n)