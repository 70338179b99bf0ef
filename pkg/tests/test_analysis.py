import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlasim import (
    ConcurrenceInputs,
    FringeData,
    InterferometerConfig,
    NlaConfig,
    SqueezeSpec,
    analytic_gain,
    coherent_state,
    concurrence,
    concurrence_report,
    detector_efficiency_invariance,
    entanglement_entropy,
    epr_distill,
    epr_state,
    extract_arm_stats,
    fit_fringe,
    gain_from_counts,
    linear_amp_visibility_reference,
    linear_amplifier_channel,
    log_negativity,
    mean_photon,
    run_interferometer,
    stage_gain,
    to_density,
    vacuum_state,
    visibility,
    visibility_vs_tau,
)

PHASES = tuple(2 * math.pi * k / 12 for k in range(12))


def fringe_from(fn, branch="D2"):
    return FringeData(points=tuple((p, fn(p)) for p in PHASES), branch=branch)


class TestVisibilityFit:
    def test_constant_fringe(self):
        assert visibility(fringe_from(lambda p: 0.3)) == pytest.approx(0.0, abs=1e-12)

    def test_pure_cosine(self):
        fit = fit_fringe(fringe_from(lambda p: 0.5 + 0.5 * math.cos(p)))
        assert fit.visibility == pytest.approx(1.0, abs=1e-12)
        assert fit.residual < 1e-12

    def test_partial_contrast(self):
        assert visibility(fringe_from(lambda p: 0.6 + 0.3 * math.cos(p))) == pytest.approx(
            0.5, abs=1e-12)

    def test_phase_recovered(self):
        fit = fit_fringe(fringe_from(lambda p: 0.4 + 0.2 * math.cos(p + 1.1)))
        assert fit.phase == pytest.approx(1.1, abs=1e-9)


class TestInterferometer:
    def test_unit_visibility_balanced_recombiner(self):
        # sigma = 1-eta balances the arm powers, tau = 1/2 recombines evenly
        eta = 0.2
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=1 - eta, tau=0.5, eta=eta)
        fringes = run_interferometer(cfg)
        assert fit_fringe(fringes["D2"]).visibility == pytest.approx(1.0, abs=1e-6)

    def test_unit_visibility_balanced_split(self):
        # sigma = 1/2 splits evenly, tau = 1-eta undoes the gain imbalance
        eta = 0.2
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=1 - eta, eta=eta)
        fringes = run_interferometer(cfg)
        assert fit_fringe(fringes["D2"]).visibility == pytest.approx(1.0, abs=1e-6)

    def test_branches_offset_by_pi(self):
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.8, eta=0.2)
        fringes = run_interferometer(cfg)
        f2, f3 = fit_fringe(fringes["D2"]), fit_fringe(fringes["D3"])
        delta = abs(f2.phase - f3.phase) % (2 * math.pi)
        assert delta == pytest.approx(math.pi, abs=1e-9)

    def test_unconditioned_fringe_flat(self):
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.8, eta=0.2)
        fringes = run_interferometer(cfg)
        assert fit_fringe(fringes["unconditioned"]).visibility < 1e-10

    def test_phase_averaged_visibility_capped_by_two_photon_tail(self):
        # Poissonian input: the two-photon component floors the dark fringe,
        # capping visibility near 1 - 2|a'|^2
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.8, eta=0.2,
                                   input_model="phase_averaged")
        vis = fit_fringe(run_interferometer(cfg)["D2"]).visibility
        assert 0.95 < vis < 0.98

    def test_heralded_visibility_high_for_all_gain_settings(self):
        for eta in (1 / 3, 1 / 4, 1 / 5):
            cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=1 - eta, eta=eta)
            assert fit_fringe(run_interferometer(cfg)["D2"]).visibility > 0.99

    def test_ancilla_loss_preserves_visibility(self):
        # misfires add heralded vacuum, which never clicks D1
        eta = 0.2
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=1 - eta, eta=eta,
                                   epsilon=0.8)
        assert fit_fringe(run_interferometer(cfg)["D2"]).visibility == pytest.approx(
            1.0, abs=1e-6)

    def test_sigma_one_rejected(self):
        with pytest.raises(ValueError):
            InterferometerConfig(input_mean_photon=0.02, sigma=1.0, tau=0.5, eta=0.2)


class TestVisibilityVsTau:
    def test_argmax_at_one_minus_eta(self):
        eta = 0.2
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.5, eta=eta)
        taus = [round(0.70 + 0.02 * k, 2) for k in range(11)]
        rows = visibility_vs_tau(cfg, taus)
        best_tau, best_vis, _ = max(rows, key=lambda r: r[1])
        assert abs(best_tau - (1 - eta)) <= 0.02
        assert best_vis == pytest.approx(1.0, abs=1e-6)

    def test_symmetric_at_unit_gain(self):
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.5, eta=0.5)
        rows = visibility_vs_tau(cfg, [0.3, 0.4, 0.5, 0.6, 0.7])
        best_tau, _, _ = max(rows, key=lambda r: r[1])
        assert best_tau == pytest.approx(0.5)


class TestConcurrence:
    def test_bell_like(self):
        c = concurrence(ConcurrenceInputs(p00=0.0, p10=0.5, p01=0.5, p11=0.0, d_mag=0.5))
        assert c == pytest.approx(1.0, abs=1e-12)

    def test_zero_coherence(self):
        c = concurrence(ConcurrenceInputs(p00=0.5, p10=0.25, p01=0.25, p11=0.0, d_mag=0.0))
        assert c == 0.0

    def test_subspace_arithmetic(self):
        # |d| = V/2 with absolute p00 and worst-case p11
        inputs = ConcurrenceInputs(p00=0.968, p10=0.5, p01=0.5, p11=2.9e-4, d_mag=0.468,
                                   normalization_mode="photon-subspace")
        assert concurrence(inputs) == pytest.approx(
            2 * (0.468 - math.sqrt(0.968 * 2.9e-4)), abs=1e-9)
        assert concurrence(inputs) == pytest.approx(0.902, abs=1e-3)

    def test_invariant_rejects_overweight(self):
        with pytest.raises(ValueError):
            ConcurrenceInputs(p00=0.9, p10=0.5, p01=0.5, p11=0.0, d_mag=0.4)

    def test_invariant_rejects_excess_coherence(self):
        with pytest.raises(ValueError):
            ConcurrenceInputs(p00=0.5, p10=0.2, p01=0.2, p11=0.0, d_mag=0.3)


class TestConcurrenceReport:
    CFG = InterferometerConfig(input_mean_photon=0.02, sigma=0.8, tau=0.5, eta=0.2)

    def test_amplification_increases_concurrence(self):
        rep = concurrence_report(self.CFG, accidental_p11=0.0)
        assert rep.c_out_absolute > rep.c_in_absolute
        assert rep.c_out_subspace > rep.c_in_subspace

    def test_input_concurrence_value(self):
        # sigma = 4/5 and |a'|^2 = 0.02 at the stage put total mean photon
        # 0.1 into the interferometer: c_in = 2 * 0.1 * sqrt(0.8*0.2) = 0.08
        rep = concurrence_report(self.CFG, accidental_p11=0.0)
        assert rep.c_in_absolute == pytest.approx(0.08, abs=1e-9)

    def test_output_near_reference_annotation(self):
        rep = concurrence_report(self.CFG, accidental_p11=2.9e-4)
        assert rep.reference_c_in == 0.08
        assert abs(rep.c_out_absolute - rep.reference_c_out) < 2 * rep.reference_c_out_err

    def test_passthrough_at_unit_gain(self):
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.8, tau=0.5, eta=0.5)
        rep = concurrence_report(cfg, accidental_p11=0.0)
        assert rep.c_out_absolute == pytest.approx(rep.c_in_absolute, abs=1e-9)
        assert rep.c_out_subspace == pytest.approx(rep.c_in_subspace, abs=1e-9)

    def test_large_accidentals_floor_at_zero(self):
        rep = concurrence_report(self.CFG, accidental_p11=0.5)
        assert rep.c_out_absolute == 0.0

    def test_stats_are_physical(self):
        rep = concurrence_report(self.CFG, accidental_p11=0.0)
        s = rep.stats_out
        assert s.d_mag <= math.sqrt(s.p10 * s.p01) + 1e-12
        assert 0.0 <= s.p00 <= 1.0


class TestLinearAmplifierChannel:
    def test_unit_gain_is_identity(self):
        rho = to_density(coherent_state(0.2, 6))
        out = linear_amplifier_channel(rho, 0, 1.0)
        assert np.allclose(out.matrix, rho.matrix, atol=1e-12)

    def test_vacuum_becomes_thermal(self):
        out = linear_amplifier_channel(to_density(vacuum_state(40)), 0, 2.0)
        assert mean_photon(out, 0) == pytest.approx(1.0, abs=1e-9)
        probs = np.real(np.diag(out.matrix))
        thermal = np.array([0.5 ** (n + 1) for n in range(41)])
        assert np.max(np.abs(probs - thermal)) < 1e-9

    def test_mean_photon_map(self):
        rho = to_density(coherent_state(0.1, 100))
        out = linear_amplifier_channel(rho, 0, 4.0)
        assert mean_photon(out, 0) == pytest.approx(4.0 * 0.01 + 3.0, abs=1e-9)

    def test_kraus_matches_ancilla_construction(self):
        rho = to_density(coherent_state(0.2, 12))
        a = linear_amplifier_channel(rho, 0, 1.2, strategy="kraus")
        b = linear_amplifier_channel(rho, 0, 1.2, strategy="ancilla")
        assert np.max(np.abs(a.matrix - b.matrix)) < 1e-9

    def test_trace_preserved_when_headroom(self):
        out = linear_amplifier_channel(to_density(vacuum_state(60)), 0, 2.0)
        assert out.trace == pytest.approx(1.0, abs=1e-12)


class TestLinearAmpReference:
    CFG = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.8, eta=0.2)

    def test_unit_gain_visibility_one(self):
        cfg = InterferometerConfig(input_mean_photon=0.02, sigma=0.5, tau=0.5, eta=0.5)
        ref = linear_amp_visibility_reference(cfg, gain=1.0)
        assert ref["intensity"] == pytest.approx(1.0, abs=1e-6)

    def test_reports_all_candidate_models(self):
        ref = linear_amp_visibility_reference(self.CFG)
        assert set(ref) == {"intensity", "click", "subspace"}
        assert all(0.0 <= v <= 1.0 for v in ref.values())

    def test_noise_kills_visibility_versus_heralded(self):
        heralded = fit_fringe(run_interferometer(self.CFG)["D2"]).visibility
        ref = linear_amp_visibility_reference(self.CFG, gain=2.0)
        assert all(v < heralded for v in ref.values())

    def test_intensity_fringe_matches_moment_oracle(self):
        # independent oracle from the amplifier's first/second moments:
        # <n_D1>(phi) = (1-tau)<n_S> + tau<n_R>
        #               + 2 sqrt(tau(1-tau)) Re(sqrt(G) <aS+ aR> e^{i phi})
        sigma, tau, gain, k = 0.5, 0.8, 1.5, 0.02
        m = k / (1 - sigma)
        n_s = gain * m * (1 - sigma) + (gain - 1)
        n_r = m * sigma
        cross = math.sqrt(gain) * m * math.sqrt(sigma * (1 - sigma))
        oracle = 2 * math.sqrt(tau * (1 - tau)) * cross / ((1 - tau) * n_s + tau * n_r)
        ref = linear_amp_visibility_reference(self.CFG, gain=gain, cutoff=24)
        assert ref["intensity"] == pytest.approx(oracle, abs=1e-9)


class TestGainExtraction:
    def test_gain_from_counts(self):
        assert gain_from_counts(0.02, 0.06) == pytest.approx(3.0, abs=1e-12)

    @given(mu_in=st.floats(1e-6, 0.5), g=st.floats(0.1, 10.0), mu_d1=st.floats(0.01, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_detector_efficiency_cancels(self, mu_in, g, mu_d1):
        assert detector_efficiency_invariance(mu_in, g * mu_in, mu_d1)

    def test_simulated_ideal_stage_gain(self):
        assert stage_gain(0.25, 1e-12) == pytest.approx(3.0, abs=1e-9)


class TestEprDistillation:
    def test_analytic_mode_exact(self):
        config = NlaConfig(n_stages=1, eta=0.2, cutoff=8)
        rep = epr_distill(0.3, config, mode="analytic")
        assert rep.chi_prime == pytest.approx(0.6, abs=1e-12)
        for ratio in rep.amplitude_ratios:
            assert ratio == pytest.approx(0.6, abs=1e-12)
        assert rep.entropy_out_bits > rep.entropy_in_bits

    def test_no_entanglement_at_zero_chi(self):
        config = NlaConfig(n_stages=1, eta=0.2, cutoff=6)
        rep = epr_distill(0.0, config, mode="analytic")
        assert rep.entropy_in_bits == pytest.approx(0.0, abs=1e-12)
        assert rep.entropy_out_bits == pytest.approx(0.0, abs=1e-12)

    def test_circuit_mode_matches_ladder(self):
        config = NlaConfig(n_stages=1, eta=0.2)
        rep = epr_distill(0.3, config, mode="circuit")
        assert rep.chi_prime == pytest.approx(0.6, abs=1e-10)
        assert rep.entropy_out_bits > rep.entropy_in_bits
        assert rep.log_negativity_out > rep.log_negativity_in
        assert rep.success_probability is not None

    def test_rejects_unnormalizable_output(self):
        config = NlaConfig(n_stages=1, eta=0.1, cutoff=6)  # g = 3
        with pytest.raises(ValueError):
            epr_distill(0.5, config, mode="analytic")

    def test_entropy_of_epr_state(self):
        psi = epr_state(SqueezeSpec(0.3), 12)
        # oracle: Schmidt weights are the squared ladder amplitudes
        w = np.array([0.3 ** (2 * n) for n in range(13)])
        w /= w.sum()
        expected = -np.sum(w * np.log2(w))
        assert entanglement_entropy(psi) == pytest.approx(expected, abs=1e-12)

    def test_log_negativity_positive_for_entangled(self):
        psi = epr_state(SqueezeSpec(0.3), 8)
        assert log_negativity(psi) > 0.1
