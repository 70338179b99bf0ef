"""Truncated Fock-space simulation of heralded linear-optical amplification.

A dense, deterministic simulator of linear-optical circuits with
photon-counting post-selection, built to verify the closed-form behavior
of the non-deterministic noiseless amplifier: gains, success
probabilities, interferometric visibilities, concurrence increase and
two-mode squeezed-state distillation.
"""

from .errors import ConfigError, EnvelopeError
from .fock import (
    DensityOperator,
    FockState,
    basis_state,
    coherent_state,
    coherent_tail,
    fidelity,
    mean_photon,
    number_state,
    partial_trace,
    phase_averaged_coherent,
    photon_number_marginal,
    tensor,
    to_density,
    vacuum_mixture,
    vacuum_state,
)
from .optics import (
    BeamSplitterSpec,
    SqueezeSpec,
    beam_splitter,
    epr_state,
    loss_channel,
    multiport_recombine,
    multiport_split,
    phase_shift,
    two_mode_squeeze,
)
from .detection import HeraldOutcome, HeraldPattern, herald, project_count
from .amplifier import (
    NlaConfig,
    StageConfig,
    StageOutcome,
    adjusted_gain,
    amplifier_stage,
    analytic_gain,
    apply_stage,
    default_cutoff,
    distinguishability_bound,
    feedforward_correct,
    lossy_source_output,
    mixing_condition_check,
    nla_full,
    success_probability_analytic,
)
from .analysis import (
    ArmStats,
    ConcurrenceInputs,
    ConcurrenceReport,
    EprDistillReport,
    FringeData,
    FringeFit,
    InterferometerConfig,
    concurrence,
    concurrence_report,
    detector_efficiency_invariance,
    entanglement_entropy,
    epr_distill,
    extract_arm_stats,
    fit_fringe,
    gain_from_counts,
    linear_amp_visibility_reference,
    linear_amplifier_channel,
    log_negativity,
    run_interferometer,
    stage_gain,
    visibility,
    visibility_vs_tau,
)

__version__ = "0.1.0"
