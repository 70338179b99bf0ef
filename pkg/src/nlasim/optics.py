"""Unitary and lossy optical elements on truncated Fock states.

Beam-splitter convention
------------------------
A splitter of reflectivity ``r`` acting on modes (i, j) maps the mode
operators as ``a_i -> sqrt(1-r) a_i + sqrt(r) a_j`` and
``a_j -> sqrt(r) a_i - sqrt(1-r) a_j`` (real symmetric form, so every
splitter is its own inverse).  Any phase is applied separately with
``phase_shift``.  On states this sends |1,0> to sqrt(1-r)|1,0> +
sqrt(r)|0,1>, i.e. a photon crosses from mode i to mode j with
probability ``r``.

Passive two-mode gates are built element-by-element from the creation
operator substitution rule.  Photon-number sectors with total n <= cutoff
are complete in the truncated basis, so the gate is exactly unitary
there; amplitudes that would overflow a per-mode cutoff are dropped,
which shows up as a norm deficit (truncation leakage) that tests check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EnvelopeError
from .fock import (
    DensityOperator,
    FockState,
    State,
    basis_state,
    partial_trace,
    tensor,
    vacuum_state,
)

__all__ = [
    "BeamSplitterSpec",
    "SqueezeSpec",
    "beam_splitter",
    "phase_shift",
    "epr_state",
    "two_mode_squeeze",
    "loss_channel",
    "multiport_split",
    "multiport_recombine",
    "apply_single_mode_kraus",
]


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Tunable beam splitter: intensity reflectance plus an optional phase.

    ``phase`` is applied to mode j before the real mixing.
    """

    reflectivity: float
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError(f"reflectivity must be in [0, 1], got {self.reflectivity}")
        if not math.isfinite(self.phase):
            raise ValueError("phase must be finite")


@dataclass(frozen=True)
class SqueezeSpec:
    """Two-mode squeezing strength chi = tanh(r) in [0, 1)."""

    chi: float

    def __post_init__(self):
        if not 0.0 <= self.chi < 1.0:
            raise ValueError(f"chi must be in [0, 1), got {self.chi}")

    @property
    def r(self) -> float:
        return math.atanh(self.chi)


@lru_cache(maxsize=128)
def _sqrt_factorials(n: int) -> np.ndarray:
    return np.array([math.sqrt(math.factorial(k)) for k in range(n + 1)])


@lru_cache(maxsize=64)
def _passive_pair_gate(a: complex, b: complex, c: complex, d: complex, cutoff: int) -> np.ndarray:
    """Fock-space matrix of the passive map |1,0> -> a|1,0> + b|0,1>,
    |0,1> -> c|1,0> + d|0,1| on the truncated pair space.

    Returns a (d^2, d^2) array indexed by flat pair indices m1*(cutoff+1)+m2.
    """
    m2 = np.array([[a, b], [c, d]])
    if not np.allclose(m2 @ m2.conj().T, np.eye(2), atol=1e-12):
        raise ValueError("two-mode map matrix must be unitary")
    dd = cutoff + 1
    sf = _sqrt_factorials(2 * cutoff)
    gate = np.zeros((dd, dd, dd, dd), dtype=np.complex128)
    for n1 in range(dd):
        for n2 in range(dd):
            # coefficient of (a1+)^(p+q) (a2+)^(n1+n2-p-q) in
            # (a a1+ + b a2+)^n1 (c a1+ + d a2+)^n2
            for p in range(n1 + 1):
                w1 = math.comb(n1, p) * a**p * b ** (n1 - p)
                for q in range(n2 + 1):
                    mo1 = p + q
                    mo2 = n1 + n2 - mo1
                    if mo1 > cutoff or mo2 > cutoff:
                        continue  # dropped: truncation leakage
                    w = w1 * math.comb(n2, q) * c**q * d ** (n2 - q)
                    gate[mo1, mo2, n1, n2] += w * sf[mo1] * sf[mo2] / (sf[n1] * sf[n2])
    gate = gate.reshape(dd * dd, dd * dd)
    gate.setflags(write=False)
    return gate


def _apply_pair_gate_pure(psi: FockState, i: int, j: int, gate: np.ndarray) -> FockState:
    d = psi.dim_per_mode
    m = psi.num_modes
    t = np.moveaxis(psi.as_tensor(), (i, j), (m - 2, m - 1)).reshape(-1, d * d)
    t = t @ gate.T
    t = np.moveaxis(t.reshape((d,) * m), (m - 2, m - 1), (i, j))
    return FockState(m, psi.cutoff, t.reshape(-1))


def _apply_pair_gate_density(rho: DensityOperator, i: int, j: int, gate: np.ndarray) -> DensityOperator:
    d = rho.dim_per_mode
    m = rho.num_modes
    t = rho.as_tensor()
    # ket side
    t = np.moveaxis(t, (i, j), (2 * m - 2, 2 * m - 1)).reshape(-1, d * d)
    t = (t @ gate.T).reshape((d,) * (2 * m))
    t = np.moveaxis(t, (2 * m - 2, 2 * m - 1), (i, j))
    # bra side
    t = np.moveaxis(t, (m + i, m + j), (2 * m - 2, 2 * m - 1)).reshape(-1, d * d)
    t = (t @ gate.conj().T).reshape((d,) * (2 * m))
    t = np.moveaxis(t, (2 * m - 2, 2 * m - 1), (m + i, m + j))
    dim = d**m
    return DensityOperator(m, rho.cutoff, t.reshape(dim, dim))


def _apply_pair_gate(state: State, i: int, j: int, gate: np.ndarray) -> State:
    m = state.num_modes
    if i == j:
        raise ValueError(f"mode collision: both arguments are mode {i}")
    if not (0 <= i < m and 0 <= j < m):
        raise ValueError(f"modes ({i}, {j}) out of range for {m} modes")
    if isinstance(state, FockState):
        return _apply_pair_gate_pure(state, i, j, gate)
    return _apply_pair_gate_density(state, i, j, gate)


def beam_splitter(state: State, mode_i: int, mode_j: int, spec: BeamSplitterSpec) -> State:
    """Apply the real-convention beam splitter to two modes.

    Zero reflectivity is the identity (the two modes never meet, so the
    reflection branch's sign convention does not apply).
    """
    if spec.phase != 0.0:
        state = phase_shift(state, mode_j, spec.phase)
    if spec.reflectivity == 0.0:
        if not (0 <= mode_i < state.num_modes and 0 <= mode_j < state.num_modes):
            raise ValueError(f"modes ({mode_i}, {mode_j}) out of range")
        if mode_i == mode_j:
            raise ValueError(f"mode collision: both arguments are mode {mode_i}")
        return state
    t = math.sqrt(1.0 - spec.reflectivity)
    r = math.sqrt(spec.reflectivity)
    gate = _passive_pair_gate(t, r, r, -t, state.cutoff)
    return _apply_pair_gate(state, mode_i, mode_j, gate)


def phase_shift(state: State, mode: int, phi: float) -> State:
    """Multiply each amplitude by exp(i n phi) for photon number n in ``mode``."""
    m = state.num_modes
    if not 0 <= mode < m:
        raise ValueError(f"mode {mode} out of range for {m} modes")
    d = state.dim_per_mode
    factors = np.exp(1j * phi * np.arange(d))
    shape = [1] * m
    shape[mode] = d
    f = factors.reshape(shape)
    if isinstance(state, FockState):
        return FockState(m, state.cutoff, (state.as_tensor() * f).reshape(-1))
    fk = factors.reshape(shape + [1] * m)
    fb = factors.conj().reshape([1] * m + shape)
    rho_t = state.as_tensor() * fk * fb
    return DensityOperator(m, state.cutoff, rho_t.reshape(state.dim, state.dim))


def epr_state(spec: SqueezeSpec, cutoff: int) -> FockState:
    """Normalized two-mode squeezed vacuum: sum_n chi^n |n,n> up to cutoff."""
    d = cutoff + 1
    amps = np.zeros((d, d), dtype=np.complex128)
    amps[np.arange(d), np.arange(d)] = spec.chi ** np.arange(d)
    return FockState(2, cutoff, amps.reshape(-1)).normalized()


@lru_cache(maxsize=32)
def _tms_gate(chi: float, cutoff: int) -> np.ndarray:
    """exp[r (a+b+ - ab)] with r = atanh(chi) on the truncated pair space."""
    d = cutoff + 1
    ladder = np.zeros((d, d))
    ns = np.arange(1, d)
    ladder[ns, ns - 1] = np.sqrt(ns)  # creation operator
    create2 = np.kron(ladder, ladder)
    gen = math.atanh(chi) * (create2 - create2.T)
    # gen is real antisymmetric, so i*gen is Hermitian: exponentiate by eigh.
    vals, vecs = np.linalg.eigh(1j * gen)
    gate = (vecs * np.exp(-1j * vals)) @ vecs.conj().T
    gate.setflags(write=False)
    return gate


def _boundary_weight(state: State, modes: tuple[int, ...]) -> float:
    """Probability weight sitting on the top rung of any of the given modes."""
    from .fock import photon_number_marginal

    return float(sum(photon_number_marginal(state, m)[-1] for m in modes))


def two_mode_squeeze(state: State, mode_i: int, mode_j: int, spec: SqueezeSpec,
                     leak_tol: float = 1e-6) -> State:
    """Two-mode squeezing with intensity gain cosh^2(r) = 1/(1-chi^2).

    The truncated generator is exponentiated exactly (the map is unitary on
    the truncated space), so truncation error appears as weight piling up
    at the cutoff boundary rather than as norm loss; if that boundary
    weight exceeds ``leak_tol`` the cutoff is too small and the call is
    rejected.
    """
    gate = _tms_gate(spec.chi, state.cutoff)
    out = _apply_pair_gate(state, mode_i, mode_j, gate)
    if spec.chi > 0.0:
        leak = _boundary_weight(out, (mode_i, mode_j))
        if leak > leak_tol:
            raise EnvelopeError(
                f"two-mode squeeze boundary weight {leak:.3e} exceeds {leak_tol:.1e}; "
                f"increase the cutoff (currently {state.cutoff})"
            )
    return out


def apply_single_mode_kraus(rho: DensityOperator, mode: int, kraus: list[np.ndarray]) -> DensityOperator:
    """Apply a single-mode Kraus channel to one mode of a density operator."""
    d = rho.dim_per_mode
    m = rho.num_modes
    t = rho.as_tensor()
    tk = np.moveaxis(t, mode, 0).reshape(d, -1)
    out = None
    for k in kraus:
        tt = (k @ tk).reshape((d,) + t.shape[1:])
        tt = np.moveaxis(np.moveaxis(tt, 0, mode), m + mode, 0).reshape(d, -1)
        tt = (k.conj() @ tt).reshape((d,) + t.shape[1:])
        tt = np.moveaxis(tt, 0, m + mode)
        out = tt if out is None else out + tt
    return DensityOperator(m, rho.cutoff, out.reshape(rho.dim, rho.dim))


def _loss_kraus(transmissivity: float, cutoff: int) -> list[np.ndarray]:
    d = cutoff + 1
    t = transmissivity
    ops = []
    for lost in range(d):
        k = np.zeros((d, d))
        for n in range(lost, d):
            k[n - lost, n] = math.sqrt(math.comb(n, lost) * (1.0 - t) ** lost * t ** (n - lost))
        ops.append(k)
    return ops


def loss_channel(rho: State, mode: int, transmissivity: float,
                 strategy: str = "kraus") -> DensityOperator:
    """Pure loss on one mode; always returns a density operator.

    ``strategy="ancilla"`` realizes the defining construction (beam-split
    with a vacuum ancilla at reflectivity 1-transmissivity, then trace the
    ancilla out); ``"kraus"`` applies the equivalent binomial-thinning
    Kraus operators directly.  Both are exactly trace preserving.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    from .fock import to_density

    if isinstance(rho, FockState):
        rho = to_density(rho)
    if strategy == "kraus":
        return apply_single_mode_kraus(rho, mode, _loss_kraus(transmissivity, rho.cutoff))
    if strategy == "ancilla":
        joint = tensor(rho, to_density(vacuum_state(rho.cutoff)))
        joint = beam_splitter(joint, mode, joint.num_modes - 1,
                              BeamSplitterSpec(reflectivity=1.0 - transmissivity))
        return partial_trace(joint, [joint.num_modes - 1])
    raise ValueError(f"unknown loss strategy {strategy!r}")


def _split_reflectivities(n_ways: int) -> list[float]:
    # A chain with reflectivities 1/N, 1/(N-1), ..., 1/2 peels off equal
    # intensity fractions: coherent alpha -> alpha/sqrt(N) in every arm.
    return [1.0 / (n_ways - k) for k in range(n_ways - 1)]


def multiport_split(state: State, mode: int, n_ways: int) -> State:
    """Evenly divide one mode over ``n_ways`` arms (appends n_ways-1 modes).

    The original mode keeps the first arm; the appended modes (in order)
    carry the rest.  Coherent alpha in -> coherent alpha/sqrt(N) per arm.
    """
    if n_ways < 1:
        raise ValueError(f"n_ways must be >= 1, got {n_ways}")
    if n_ways == 1:
        return state
    from .fock import to_density

    vac = vacuum_state(state.cutoff, n_ways - 1)
    extra = to_density(vac) if isinstance(state, DensityOperator) else vac
    out = tensor(state, extra)
    first_new = state.num_modes
    for k, r in enumerate(_split_reflectivities(n_ways)):
        out = beam_splitter(out, mode, first_new + k, BeamSplitterSpec(reflectivity=r))
    return out


def multiport_recombine(state: State, modes: list[int], n_ways: int) -> State:
    """Inverse of ``multiport_split`` on the listed arms (first arm is the output).

    Each chain splitter is involutive, so recombination applies the same
    splitters in reverse order.  Mode count is unchanged; the caller
    heralds vacuum on ``modes[1:]``.
    """
    modes = [int(m) for m in modes]
    if n_ways < 1:
        raise ValueError(f"n_ways must be >= 1, got {n_ways}")
    if len(modes) != n_ways:
        raise ValueError(f"expected {n_ways} modes, got {len(modes)}")
    if n_ways == 1:
        return state
    refl = _split_reflectivities(n_ways)
    out = state
    for k in reversed(range(n_ways - 1)):
        out = beam_splitter(out, modes[0], modes[1 + k], BeamSplitterSpec(reflectivity=refl[k]))
    return out
