"""Photon counting, heralding patterns and conditional state preparation.

Detectors here resolve photon number exactly.  Detector inefficiency is
modeled as pure loss in front of an ideal counter, which is the standard
equivalence and all that the photon numbers used by the heralds (at most
one per conditioning mode) can distinguish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import DensityOperator, FockState, State, to_density
from .optics import loss_channel

__all__ = ["HeraldPattern", "HeraldOutcome", "project_count", "herald"]


@dataclass(frozen=True)
class HeraldPattern:
    """Per-mode photon-count conditions defining a post-selection event.

    Attributes:
        conditions: tuple of (mode, required count) pairs, distinct modes.
        efficiency: detector efficiency in (0, 1] applied to every
            conditioned mode as a loss channel before ideal counting.
    """

    conditions: tuple[tuple[int, int], ...]
    efficiency: float = 1.0

    def __post_init__(self):
        conds = tuple((int(m), int(n)) for m, n in self.conditions)
        modes = [m for m, _ in conds]
        if len(set(modes)) != len(modes):
            raise ValueError(f"herald modes must be distinct, got {modes}")
        if any(n < 0 for _, n in conds):
            raise ValueError("required counts must be >= 0")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        object.__setattr__(self, "conditions", conds)


@dataclass(frozen=True)
class HeraldOutcome:
    """Conditional state on the surviving modes plus the event probability.

    ``state`` is normalized when ``probability > 0`` and None for an
    impossible pattern (probability 0), which is reported, never raised.
    """

    state: State | None
    probability: float


def project_count(state: State, mode: int, n: int):
    """Project one mode onto exactly ``n`` photons and remove it.

    Returns ``(conditional_state, probability)`` where the conditional
    state is unnormalized: its squared norm (or trace) is the probability.
    Over all n the probabilities sum to one.
    """
    m = state.num_modes
    if not 0 <= mode < m:
        raise ValueError(f"mode {mode} out of range for {m} modes")
    if not 0 <= n <= state.cutoff:
        raise ValueError(f"count {n} outside [0, cutoff={state.cutoff}]")
    if m == 1:
        # Degenerate case: project everything out; report the scalar weight
        # on a dummy vacuum register so callers keep a valid state object.
        raise ValueError("project_count would remove the last mode; herald instead")
    if isinstance(state, FockState):
        sliced = np.take(state.as_tensor(), n, axis=mode)
        out = FockState(m - 1, state.cutoff, sliced.reshape(-1))
        return out, float(np.linalg.norm(sliced) ** 2)
    t = state.as_tensor()
    t = np.take(np.take(t, n, axis=m + mode), n, axis=mode)
    dim = state.dim_per_mode ** (m - 1)
    out = DensityOperator(m - 1, state.cutoff, t.reshape(dim, dim))
    return out, out.trace


def herald(state: State, pattern: HeraldPattern) -> HeraldOutcome:
    """Condition on a full count pattern; conditioned modes are consumed.

    With efficiency below one each conditioned mode first passes through a
    loss channel (this forces a density-operator result).  The combined
    probability is independent of the order the conditions are applied in.
    """
    if not pattern.conditions:
        return HeraldOutcome(state=state, probability=1.0)
    for mode, n in pattern.conditions:
        if not 0 <= mode < state.num_modes:
            raise ValueError(f"herald mode {mode} out of range")
        if n > state.cutoff:
            raise ValueError(f"required count {n} exceeds cutoff {state.cutoff}")

    current: State = state
    if pattern.efficiency < 1.0:
        if isinstance(current, FockState):
            current = to_density(current)
        for mode, _ in pattern.conditions:
            current = loss_channel(current, mode, pattern.efficiency)

    probability = 1.0
    # Project highest mode first so remaining indices stay valid.
    for mode, n in sorted(pattern.conditions, key=lambda c: -c[0]):
        current, p = project_count(current, mode, n)
        probability = p  # unnormalized states accumulate the joint weight
    if probability <= 0.0:
        return HeraldOutcome(state=None, probability=0.0)
    if isinstance(current, FockState):
        return HeraldOutcome(state=current.normalized(), probability=float(probability))
    return HeraldOutcome(state=current.normalized(), probability=float(probability))
