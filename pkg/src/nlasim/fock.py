"""Truncated Fock-space states: pure amplitude vectors and density operators.

Basis convention
----------------
A state on ``m`` modes with a uniform per-mode cutoff ``c`` lives on the
``(c+1)**m`` photon-number tuples ``(n_0, ..., n_{m-1})`` with every
``n_i <= c``, ordered lexicographically with mode 0 the slowest-varying
index.  The flat index of a tuple is ``sum(n_i * (c+1)**(m-1-i))``.  This
ordering is fixed so that emitted data files are bit-reproducible.

All state objects are immutable; operations are pure functions returning
new objects.  Normalization is explicit, never automatic: conditional
(heralded) states are allowed to carry their success probability in their
norm, and callers decide when to renormalize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

__all__ = [
    "FockState",
    "DensityOperator",
    "basis_state",
    "basis_tuples",
    "coherent_amplitudes",
    "coherent_state",
    "coherent_tail",
    "number_state",
    "phase_averaged_coherent",
    "vacuum_mixture",
    "vacuum_state",
    "to_density",
    "tensor",
    "partial_trace",
    "fidelity",
    "mean_photon",
    "photon_number_marginal",
    "overlap",
]

_ATOL = 1e-12


def _as_complex_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockState:
    """Pure multimode state as a complex amplitude vector.

    Attributes:
        num_modes: number of optical modes (>= 1).
        cutoff: maximum photon number retained per mode (>= 0).
        amplitudes: flat complex vector of length ``(cutoff+1)**num_modes``
            in the lexicographic basis ordering documented above.
    """

    num_modes: int
    cutoff: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_modes < 1:
            raise ValueError(f"num_modes must be >= 1, got {self.num_modes}")
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1 or amps.size != self.dim:
            raise ValueError(
                f"amplitude vector must have length {self.dim} for "
                f"{self.num_modes} modes at cutoff {self.cutoff}, got shape {amps.shape}"
            )
        if not np.isfinite(amps).all():
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", _as_complex_readonly(amps))

    @property
    def dim_per_mode(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.num_modes

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def as_tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length cutoff+1 per mode."""
        return self.amplitudes.reshape((self.dim_per_mode,) * self.num_modes)

    def normalized(self) -> "FockState":
        n = self.norm
        if n < 1e-300:
            raise ValueError("cannot normalize a zero state")
        return FockState(self.num_modes, self.cutoff, self.amplitudes / n)

    def amplitude(self, ns: tuple[int, ...]) -> complex:
        """Amplitude of the basis tuple ``ns``."""
        return complex(self.as_tensor()[tuple(ns)])


@dataclass(frozen=True)
class DensityOperator:
    """Mixed multimode state as a dense Hermitian matrix in the Fock basis."""

    num_modes: int
    cutoff: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.num_modes < 1:
            raise ValueError(f"num_modes must be >= 1, got {self.num_modes}")
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        mat = np.asarray(self.matrix)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(
                f"matrix must be {self.dim}x{self.dim} for {self.num_modes} modes "
                f"at cutoff {self.cutoff}, got shape {mat.shape}"
            )
        object.__setattr__(self, "matrix", _as_complex_readonly(mat))

    @property
    def dim_per_mode(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.num_modes

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def as_tensor(self) -> np.ndarray:
        """Matrix reshaped to ket axes followed by bra axes, one pair per mode."""
        d = self.dim_per_mode
        return self.matrix.reshape((d,) * (2 * self.num_modes))

    def normalized(self) -> "DensityOperator":
        t = self.trace
        if t < 1e-300:
            raise ValueError("cannot normalize a zero-trace operator")
        return DensityOperator(self.num_modes, self.cutoff, self.matrix / t)

    def validate(self, atol: float = _ATOL) -> None:
        """Check Hermiticity, positivity and unit trace; raise on violation."""
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol):
            raise ValueError("density matrix is not Hermitian")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min():.3e}")
        if abs(self.trace - 1.0) > atol:
            raise ValueError(f"density matrix trace {self.trace} is not 1")


State = FockState | DensityOperator


def basis_tuples(num_modes: int, cutoff: int):
    """Iterate photon-number tuples in the fixed basis order."""
    return product(range(cutoff + 1), repeat=num_modes)


def basis_state(ns: tuple[int, ...], cutoff: int) -> FockState:
    """The basis vector |n_0, ..., n_{m-1}> at the given cutoff."""
    ns = tuple(int(n) for n in ns)
    if any(n < 0 or n > cutoff for n in ns):
        raise ValueError(f"occupation {ns} exceeds cutoff {cutoff}")
    m = len(ns)
    d = cutoff + 1
    amps = np.zeros(d**m, dtype=np.complex128)
    idx = 0
    for n in ns:
        idx = idx * d + n
    amps[idx] = 1.0
    return FockState(m, cutoff, amps)


def vacuum_state(cutoff: int, num_modes: int = 1) -> FockState:
    """|0, ..., 0> on ``num_modes`` modes."""
    return basis_state((0,) * num_modes, cutoff)


def number_state(n: int, cutoff: int) -> FockState:
    """Single-mode photon-number eigenstate |n>."""
    if not 0 <= n <= cutoff:
        raise ValueError(f"photon number {n} outside [0, {cutoff}]")
    return basis_state((n,), cutoff)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Unnormalized coherent amplitudes e^(-|a|^2/2) a^n / sqrt(n!) up to cutoff."""
    if not np.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha!r}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    ns = np.arange(cutoff + 1)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff + 1)))))
    mag = abs(alpha)
    if mag == 0.0:
        amps = np.zeros(cutoff + 1, dtype=np.complex128)
        amps[0] = 1.0
        return amps
    phase = alpha / mag
    log_mod = ns * math.log(mag) - 0.5 * log_fact - 0.5 * mag**2
    return np.exp(log_mod) * phase**ns


def coherent_tail(alpha: complex, cutoff: int) -> float:
    """Truncation-tail weight e^(-|a|^2) sum_{n>cutoff} |a|^(2n)/n!.

    Diagnostic for how much of the exact coherent state a given cutoff
    discards; constructors keep states normalized, so this is the only
    truncation effect to budget for.
    """
    x = abs(alpha) ** 2
    kept = 0.0
    term = math.exp(-x)
    for n in range(cutoff + 1):
        kept += term
        term *= x / (n + 1)
    return max(0.0, 1.0 - kept)


def coherent_state(alpha: complex, cutoff: int) -> FockState:
    """Normalized truncated coherent state |alpha>."""
    amps = coherent_amplitudes(alpha, cutoff)
    return FockState(1, cutoff, amps).normalized()


def phase_averaged_coherent(mag: float, cutoff: int) -> DensityOperator:
    """Uniform-phase mixture of coherent states of fixed magnitude.

    The result is diagonal with Poisson(mag^2) weights, renormalized over
    the truncated basis.
    """
    if mag < 0:
        raise ValueError(f"magnitude must be >= 0, got {mag}")
    weights = np.abs(coherent_amplitudes(mag, cutoff)) ** 2
    weights /= weights.sum()
    return DensityOperator(1, cutoff, np.diag(weights.astype(np.complex128)))


def vacuum_mixture(k: float, cutoff: int = 1) -> DensityOperator:
    """The two-level mixture (1-k)|0><0| + k|1><1|.

    This is the standard heralded-single-photon approximation of a weak
    phase-averaged coherent state with mean photon number k.
    """
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"k must be in [0, 1], got {k}")
    if cutoff < 1:
        raise ValueError("vacuum_mixture needs cutoff >= 1")
    diag = np.zeros(cutoff + 1, dtype=np.complex128)
    diag[0] = 1.0 - k
    diag[1] = k
    return DensityOperator(1, cutoff, np.diag(diag))


def to_density(psi: FockState) -> DensityOperator:
    """|psi><psi| as a density operator (not renormalized)."""
    v = psi.amplitudes
    return DensityOperator(psi.num_modes, psi.cutoff, np.outer(v, v.conj()))


def _check_compatible(a: State, b: State) -> None:
    if a.cutoff != b.cutoff:
        raise ValueError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")


def tensor(a: State, b: State):
    """Tensor product; the modes of ``a`` come first (slowest-varying)."""
    _check_compatible(a, b)
    if isinstance(a, FockState) and isinstance(b, FockState):
        amps = np.kron(a.amplitudes, b.amplitudes)
        return FockState(a.num_modes + b.num_modes, a.cutoff, amps)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(a.num_modes + b.num_modes, a.cutoff, np.kron(a.matrix, b.matrix))
    raise TypeError("tensor requires two FockStates or two DensityOperators; convert explicitly")


def partial_trace(rho: DensityOperator, modes) -> DensityOperator:
    """Trace out the given modes, keeping the rest in their original order."""
    traced = sorted(set(int(m) for m in modes))
    m = rho.num_modes
    if any(t < 0 or t >= m for t in traced):
        raise ValueError(f"modes {traced} out of range for {m} modes")
    if len(traced) == m:
        raise ValueError("cannot trace out every mode")
    if not traced:
        return rho
    d = rho.dim_per_mode
    t = rho.as_tensor()
    kept = [i for i in range(m) if i not in traced]
    # Contract each traced mode's ket axis with its bra axis.
    for i in reversed(traced):
        nm = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=nm + i)
    dk = d ** len(kept)
    return DensityOperator(len(kept), rho.cutoff, t.reshape(dk, dk))


def overlap(a: FockState, b: FockState) -> complex:
    """<a|b>."""
    _check_compatible(a, b)
    if a.num_modes != b.num_modes:
        raise ValueError("mode count mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(a: State, b: State) -> float:
    """Uhlmann fidelity; reduces to |<psi|phi>|^2 on pure inputs.

    Pure inputs take exact fast paths; the general mixed-mixed case goes
    through matrix square roots and is accurate to roughly sqrt(eps) when
    an operator is rank deficient.
    """
    _check_compatible(a, b)
    if a.num_modes != b.num_modes:
        raise ValueError("mode count mismatch")
    if isinstance(a, FockState) and isinstance(b, FockState):
        f = abs(overlap(a, b)) ** 2
    elif isinstance(a, FockState):
        f = float(np.real(np.vdot(a.amplitudes, b.matrix @ a.amplitudes)))
    elif isinstance(b, FockState):
        f = float(np.real(np.vdot(b.amplitudes, a.matrix @ b.amplitudes)))
    else:
        sa = _sqrtm_psd(a.matrix)
        inner = sa @ b.matrix @ sa
        vals = np.linalg.eigvalsh(inner)
        f = float(np.sum(np.sqrt(np.clip(vals, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def photon_number_marginal(state: State, mode: int) -> np.ndarray:
    """Probability distribution of the photon number in one mode."""
    m = state.num_modes
    if not 0 <= mode < m:
        raise ValueError(f"mode {mode} out of range for {m} modes")
    d = state.dim_per_mode
    if isinstance(state, FockState):
        probs = np.abs(state.as_tensor()) ** 2
        axes = tuple(i for i in range(m) if i != mode)
        return probs.sum(axis=axes) if axes else probs
    t = state.as_tensor()
    for i in reversed([i for i in range(m) if i != mode]):
        nm = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=nm + i)
    return np.real(np.diagonal(t.reshape(d, d)))


def mean_photon(state: State, mode: int) -> float:
    """Mean photon number in one mode."""
    probs = photon_number_marginal(state, mode)
    return float(np.dot(np.arange(len(probs)), probs))
