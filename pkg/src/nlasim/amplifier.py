"""The heralded amplifier stage, the full N-arm amplifier, and the
closed-form expressions the circuit must reproduce.

Stage circuit
-------------
One stage uses a single-photon ancilla and two splitters.  The ancilla is
split at reflectivity ``eta`` between the stage output arm (kept with
amplitude sqrt(1-eta)) and a conditioning arm; the conditioning arm then
mixes with the signal at reflectivity ``kappa`` (normally 50:50) and both
mixer outputs are photon counted.  Counting exactly one photon at exactly
one counter (D2 or D3) heralds success and truncates-and-amplifies the
signal onto the output arm: a coherent input a' becomes proportional to
(1 +/- g a' adag)|0> with amplitude gain g = sqrt((1-eta)/eta), the sign
set by which counter fired.  The D3 sign is repaired by a feedforward
pi phase shift.

The full amplifier splits the input evenly over N arms, runs one stage
per arm, coherently recombines, and additionally heralds vacuum on the
N-1 auxiliary recombiner ports.  After feedforward the 2^N detector
patterns yield identical conditional states, so the simulation evaluates
the all-D2 pattern and multiplies the pattern probability by 2^N (tests
check the equivalence explicitly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnvelopeError
from .fock import (
    DensityOperator,
    FockState,
    State,
    basis_state,
    partial_trace,
    photon_number_marginal,
    tensor,
    to_density,
    vacuum_state,
)
from .detection import project_count
from .optics import (
    BeamSplitterSpec,
    beam_splitter,
    loss_channel,
    multiport_recombine,
    multiport_split,
    phase_shift,
)

__all__ = [
    "StageConfig",
    "StageOutcome",
    "NlaConfig",
    "analytic_gain",
    "default_cutoff",
    "amplifier_stage",
    "apply_stage",
    "feedforward_correct",
    "nla_full",
    "success_probability_analytic",
    "distinguishability_bound",
    "adjusted_gain",
    "lossy_source_output",
    "mixing_condition_check",
]

_MAX_DENSE_DIM = 6_000_000


@dataclass(frozen=True)
class StageConfig:
    """Single amplifier stage parameters.

    eta is the gain-control reflectivity (intensity gain (1-eta)/eta),
    kappa the signal/conditioning mixing ratio, ancilla_efficiency the
    probability that the single-photon ancilla is actually present.
    """

    eta: float
    kappa: float = 0.5
    ancilla_efficiency: float = 1.0
    cutoff: int = 4

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must be in (0, 1), got {self.eta}")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must be in (0, 1), got {self.kappa}")
        if not 0.0 < self.ancilla_efficiency <= 1.0:
            raise ValueError(f"ancilla_efficiency must be in (0, 1], got {self.ancilla_efficiency}")
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")

    @property
    def amplitude_gain(self) -> float:
        return math.sqrt((1.0 - self.eta) / self.eta)


@dataclass(frozen=True)
class StageOutcome:
    """One heralded branch of a stage: which counter fired, the conditional
    output state (normalized), and the branch probability."""

    branch: str
    state: State | None
    probability: float


@dataclass(frozen=True)
class NlaConfig:
    """Full N-arm amplifier parameters.

    source_efficiency is 1-gamma, the probability that each ancilla
    source actually delivers its photon.
    """

    n_stages: int
    eta: float
    cutoff: int = 4
    source_efficiency: float = 1.0

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValueError(f"n_stages must be >= 1, got {self.n_stages}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must be in (0, 1), got {self.eta}")
        if not 0.0 < self.source_efficiency <= 1.0:
            raise ValueError(f"source_efficiency must be in (0, 1], got {self.source_efficiency}")
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")

    @property
    def gamma(self) -> float:
        return 1.0 - self.source_efficiency

    def stage(self) -> StageConfig:
        return StageConfig(eta=self.eta, ancilla_efficiency=self.source_efficiency,
                           cutoff=self.cutoff)


def analytic_gain(eta: float) -> float:
    """Intensity gain (1-eta)/eta of an ideal stage."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    return (1.0 - eta) / eta


def default_cutoff(g: float, alpha: complex) -> int:
    """Cutoff heuristic for amplified coherent states.

    Starts from max(4, ceil(2 g |alpha|) + 3) and then grows until the
    input's own top-rung population drops below 1e-7, so circuit runs
    clear the envelope guard.
    """
    cutoff = max(4, math.ceil(2.0 * g * abs(alpha)) + 3)
    x = abs(alpha) ** 2
    while x > 0.0 and math.exp(-x) * x**cutoff / math.factorial(cutoff) > 1e-7:
        cutoff += 1
    return cutoff


def success_probability_analytic(alpha: complex, g: float, n_stages: int) -> float:
    """Large-N success probability eta^N exp(-(1-g^2)|alpha|^2), eta = 1/(1+g^2)."""
    if g <= 0.0:
        raise ValueError(f"g must be positive, got {g}")
    if n_stages < 1:
        raise ValueError("n_stages must be >= 1")
    eta = 1.0 / (1.0 + g * g)
    return eta**n_stages * math.exp(-(1.0 - g * g) * abs(alpha) ** 2)


def distinguishability_bound(alpha: complex, g: float) -> float:
    """Upper bound (1-e^{-|a|^2})/(1-e^{-|ga|^2}) on any heralded gain-g
    amplifier's success probability; equals 1/g^2 in the small-alpha limit."""
    if g <= 0.0:
        raise ValueError(f"g must be positive, got {g}")
    x = abs(alpha) ** 2
    if x == 0.0:
        return 1.0 / (g * g)
    return float(-math.expm1(-x) / -math.expm1(-(g * g) * x))


def adjusted_gain(eta: float, input_mean_photon: float, epsilon: float) -> float:
    """First-order intensity gain with an imperfect ancilla of efficiency
    epsilon: ((1-eta)/eta) / (1 + |a'|^2 (1-eps)/(eps eta))."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if input_mean_photon < 0.0:
        raise ValueError("input_mean_photon must be >= 0")
    g2 = analytic_gain(eta)
    return g2 / (1.0 + input_mean_photon * (1.0 - epsilon) / (epsilon * eta))


def mixing_condition_check(gamma: float, eta: float, alpha: complex) -> float:
    """Margin ratio (eta/|alpha|^2) / (gamma/(1-gamma)).

    Values much greater than one indicate that source misfires add only
    negligible mixing to the heralded output; 10 is a useful working
    boundary.  gamma = 0 returns +inf.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    x = abs(alpha) ** 2
    if x == 0.0:
        raise ValueError("alpha must be nonzero")
    if gamma == 0.0:
        return math.inf
    return (eta / x) / (gamma / (1.0 - gamma))


def _guard_input_tail(state: State, leak_tol: float = 1e-6) -> None:
    top = sum(photon_number_marginal(state, m)[-1] for m in range(state.num_modes))
    if top > leak_tol:
        raise EnvelopeError(
            f"input weight {top:.3e} on the cutoff rung exceeds {leak_tol:.1e}; "
            f"cutoff {state.cutoff} is too small for this state"
        )


def _single_photon_ancilla(cfg: StageConfig, density: bool) -> State:
    if cfg.ancilla_efficiency >= 1.0 and not density:
        return basis_state((1,), cfg.cutoff)
    rho = to_density(basis_state((1,), cfg.cutoff))
    if cfg.ancilla_efficiency < 1.0:
        rho = loss_channel(rho, 0, cfg.ancilla_efficiency)
    return rho


def apply_stage(state: State, mode: int, cfg: StageConfig, branch: str | None):
    """Run one amplifier stage on ``mode`` of a multimode state.

    Returns ``(state_out, probability)``.  For branch "D2" or "D3" the
    result is the unnormalized heralded state with the stage output
    replacing ``mode`` (its norm/trace carries the branch probability).
    For branch None the counters are traced out instead (no heralding)
    and the returned density operator is normalized with probability 1.
    """
    if branch not in ("D2", "D3", None):
        raise ValueError(f"branch must be 'D2', 'D3' or None, got {branch!r}")
    if state.cutoff != cfg.cutoff:
        raise ValueError(f"state cutoff {state.cutoff} != config cutoff {cfg.cutoff}")
    mixed = isinstance(state, DensityOperator) or cfg.ancilla_efficiency < 1.0 or branch is None
    work: State = to_density(state) if (mixed and isinstance(state, FockState)) else state

    ancilla = _single_photon_ancilla(cfg, density=isinstance(work, DensityOperator))
    vac = vacuum_state(cfg.cutoff)
    aux: State = to_density(vac) if isinstance(work, DensityOperator) else vac

    m = work.num_modes
    joint = tensor(tensor(work, ancilla), aux)  # modes: ..., ancilla=m, mixer arm=m+1
    joint = beam_splitter(joint, m, m + 1, BeamSplitterSpec(reflectivity=cfg.eta))
    joint = beam_splitter(joint, mode, m + 1, BeamSplitterSpec(reflectivity=cfg.kappa))
    # Counter D2 watches the transformed signal mode, D3 the mixer arm.
    if branch is None:
        out = partial_trace(joint, [mode, m + 1])
        # The stage output (previously the ancilla mode) takes the slot the
        # signal mode occupied, preserving the caller's mode ordering.
        out = _move_mode(out, out.num_modes - 1, mode)
        return out.normalized(), 1.0
    counts = {"D2": (1, 0), "D3": (0, 1)}[branch]
    out, _ = project_count(joint, m + 1, counts[1])
    out, _ = project_count(out, mode, counts[0])
    prob = out.norm**2 if isinstance(out, FockState) else out.trace
    out = _move_mode(out, out.num_modes - 1, mode)
    return out, float(prob)


def _move_mode(state: State, src: int, dst: int) -> State:
    if src == dst:
        return state
    m = state.num_modes
    if isinstance(state, FockState):
        t = np.moveaxis(state.as_tensor(), src, dst)
        return FockState(m, state.cutoff, t.reshape(-1))
    t = np.moveaxis(state.as_tensor(), (src, m + src), (dst, m + dst))
    return DensityOperator(m, state.cutoff, t.reshape(state.dim, state.dim))


def amplifier_stage(input_state: State, cfg: StageConfig) -> list[StageOutcome]:
    """Both heralded branches of one stage acting on a single-mode input.

    Branch states are normalized; probabilities are absolute.  For a
    coherent input a' each branch state is proportional to
    (1 +/- g a' adag)|0> with probability (eta/2) e^{-|a'|^2}
    (1 + g^2 |a'|^2) for an ideal ancilla.
    """
    if input_state.num_modes != 1:
        raise ValueError("amplifier_stage expects a single-mode input")
    _guard_input_tail(input_state)
    outcomes = []
    for branch in ("D2", "D3"):
        raw, prob = apply_stage(input_state, 0, cfg, branch)
        if prob <= 0.0:
            outcomes.append(StageOutcome(branch=branch, state=None, probability=0.0))
            continue
        outcomes.append(StageOutcome(branch=branch, state=raw.normalized(), probability=prob))
    return outcomes


def feedforward_correct(outcome: StageOutcome, mode: int = 0) -> StageOutcome:
    """Undo the D3 branch's sign flip with a pi phase shift on the output.

    After correction both branches carry the same physical state (the D3
    state may retain an unobservable global phase).
    """
    if outcome.branch == "D2" or outcome.state is None:
        return outcome
    corrected = phase_shift(outcome.state, mode, math.pi)
    return StageOutcome(branch=outcome.branch, state=corrected, probability=outcome.probability)


def nla_full(input_state: State, config: NlaConfig, mode: int = 0):
    """Split -> N heralded stages -> coherent recombination -> vacuum heralds.

    Returns ``(conditional_state, success_probability)`` where the state
    is normalized and lives on the original modes (the amplified output in
    ``mode``).  The probability sums all 2^N feedforward-equivalent
    detector patterns.  Supported envelope: n_stages <= 4 at cutoff 4 for
    pure inputs, n_stages <= 2 for mixed/lossy inputs.
    """
    n = config.n_stages
    if input_state.cutoff != config.cutoff:
        raise ValueError(f"state cutoff {input_state.cutoff} != config cutoff {config.cutoff}")
    _guard_input_tail(input_state)
    mixed = isinstance(input_state, DensityOperator) or config.source_efficiency < 1.0
    d = config.cutoff + 1
    open_modes = input_state.num_modes + (n - 1) + 2
    dim = d**open_modes
    if (dim * dim if mixed else dim) > _MAX_DENSE_DIM:
        raise EnvelopeError(
            f"{open_modes} open modes at cutoff {config.cutoff} exceed the dense "
            f"simulation envelope ({'mixed' if mixed else 'pure'} path)"
        )

    work = multiport_split(input_state, mode, n)
    arm_modes = [mode] + list(range(input_state.num_modes, input_state.num_modes + n - 1))
    stage_cfg = config.stage()
    for arm in arm_modes:
        work, _ = apply_stage(work, arm, stage_cfg, "D2")
    work = multiport_recombine(work, arm_modes, n)
    for aux in sorted(arm_modes[1:], reverse=True):
        work, _ = project_count(work, aux, 0)
    pattern_prob = work.norm**2 if isinstance(work, FockState) else work.trace
    probability = float(pattern_prob * 2**n)
    if pattern_prob <= 0.0:
        return None, 0.0
    return work.normalized(), probability


def lossy_source_output(alpha: complex, config: NlaConfig, normalized: bool = True) -> DensityOperator:
    """Closed-form heralded output for a coherent input with ancilla sources
    that each misfire with probability gamma.

    Accepted misfire events replace the corresponding arm's contribution
    by vacuum, giving a binomial mixture over the number of misfires n of
    (un)amplified components (1 + g adag alpha/N)^(N-n)|0>.  With
    ``normalized=False`` the raw operator is returned; its trace is the
    total success probability (all detector patterns included).
    """
    gamma = config.gamma
    n_stages = config.n_stages
    eta = config.eta
    g = math.sqrt((1.0 - eta) / eta)
    d = config.cutoff + 1
    x = abs(alpha) ** 2
    total = np.zeros((d, d), dtype=np.complex128)
    sqrt_fact = np.array([math.sqrt(math.factorial(k)) for k in range(d)])
    for miss in range(n_stages + 1):
        keep = n_stages - miss
        weight = (
            math.comb(n_stages, miss)
            * (1.0 - gamma) ** keep
            * gamma**miss
            * x**miss
            / n_stages**miss
            * math.exp(-x)
            * eta**keep
        )
        vec = np.zeros(d, dtype=np.complex128)
        for k in range(min(keep, d - 1) + 1):
            vec[k] = math.comb(keep, k) * (g * alpha / n_stages) ** k * sqrt_fact[k]
        total += weight * np.outer(vec, vec.conj())
    rho = DensityOperator(1, config.cutoff, total)
    return rho.normalized() if normalized else rho
