import numpy as np

from nlasim import FockState


def random_pure_state(seed: int, num_modes: int = 2, cutoff: int = 3) -> FockState:
    rng = np.random.default_rng(seed)
    dim = (cutoff + 1) ** num_modes
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    amps /= np.linalg.norm(amps)
    return FockState(num_modes, cutoff, amps)


def random_low_sector_state(seed: int, num_modes: int = 2, cutoff: int = 3,
                            max_total: int | None = None) -> FockState:
    """Random state supported on total photon number <= max_total.

    Keeping the total at or below the cutoff means two-mode gates act on
    complete sectors only, so unitarity holds exactly (no truncation leak).
    """
    from itertools import product

    limit = cutoff if max_total is None else max_total
    rng = np.random.default_rng(seed)
    d = cutoff + 1
    amps = np.zeros(d**num_modes, dtype=complex)
    for idx, ns in enumerate(product(range(d), repeat=num_modes)):
        if sum(ns) <= limit:
            amps[idx] = rng.standard_normal() + 1j * rng.standard_normal()
    amps /= np.linalg.norm(amps)
    return FockState(num_modes, cutoff, amps)


def phase_aligned(vec: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Rotate vec by a global phase so its largest-|target| component matches."""
    idx = int(np.argmax(np.abs(target)))
    if abs(vec[idx]) < 1e-300:
        return vec
    phase = (target[idx] / vec[idx])
    phase /= abs(phase)
    return vec * phase
