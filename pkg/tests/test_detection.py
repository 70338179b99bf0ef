import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlasim import (
    BeamSplitterSpec,
    HeraldPattern,
    basis_state,
    beam_splitter,
    coherent_state,
    herald,
    project_count,
    tensor,
    to_density,
    vacuum_state,
)

from conftest import random_pure_state


def dual_rail(cutoff=2):
    # (|1,0> + |0,1>)/sqrt(2)
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[1, 0] = amps[0, 1] = 1 / math.sqrt(2)
    return basis_state((0, 0), cutoff).__class__(2, cutoff, amps.reshape(-1))


class TestProjectCount:
    def test_vacuum_projects_onto_itself(self):
        joint = tensor(vacuum_state(2), vacuum_state(2))
        state, prob = project_count(joint, 0, 0)
        assert prob == pytest.approx(1.0)
        assert state.amplitudes[0] == pytest.approx(1.0)

    def test_coherent_single_photon_weight(self):
        # Poisson oracle: P(1) = |a|^2 e^{-|a|^2}
        alpha = 0.3
        joint = tensor(coherent_state(alpha, 8), vacuum_state(8))
        _, prob = project_count(joint, 0, 1)
        assert prob == pytest.approx(alpha**2 * math.exp(-(alpha**2)), abs=1e-9)

    def test_dual_rail_collapse(self):
        state, prob = project_count(dual_rail(), 0, 1)
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert abs(state.amplitudes[0]) ** 2 == pytest.approx(0.5, abs=1e-12)

    def test_probabilities_sum_to_one(self):
        psi = random_pure_state(3, num_modes=2, cutoff=3)
        total = sum(project_count(psi, 1, n)[1] for n in range(4))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_rejects_overcutoff_count(self):
        with pytest.raises(ValueError):
            project_count(random_pure_state(1), 0, 9)


class TestHerald:
    def test_empty_pattern_is_identity(self):
        psi = random_pure_state(4)
        outcome = herald(psi, HeraldPattern(conditions=()))
        assert outcome.probability == 1.0
        assert outcome.state is psi

    def test_inefficient_click(self):
        # binomial thinning then projection: 1/2 * 0.5 = 0.25
        outcome = herald(dual_rail(), HeraldPattern(conditions=((0, 1),), efficiency=0.5))
        assert outcome.probability == pytest.approx(0.25, abs=1e-12)

    def test_stage_herald_on_vacuum_signal(self):
        # vacuum signal, ideal single-photon ancilla, eta = 1/4: the herald
        # (one click at the counter watching the signal, none at the other)
        # fires with probability eta/2
        eta = 0.25
        cutoff = 3
        joint = tensor(tensor(vacuum_state(cutoff), basis_state((1,), cutoff)),
                       vacuum_state(cutoff))
        joint = beam_splitter(joint, 1, 2, BeamSplitterSpec(eta))
        joint = beam_splitter(joint, 0, 2, BeamSplitterSpec(0.5))
        outcome = herald(joint, HeraldPattern(conditions=((0, 1), (2, 0))))
        assert outcome.probability == pytest.approx(eta / 2, abs=1e-12)

    def test_zero_probability_pattern_flagged(self):
        psi = tensor(basis_state((1,), 2), vacuum_state(2))
        outcome = herald(psi, HeraldPattern(conditions=((0, 2),)))
        assert outcome.probability == 0.0
        assert outcome.state is None

    def test_duplicate_modes_rejected(self):
        with pytest.raises(ValueError):
            HeraldPattern(conditions=((0, 1), (0, 0)))

    def test_bad_efficiency_rejected(self):
        with pytest.raises(ValueError):
            HeraldPattern(conditions=((0, 1),), efficiency=0.0)


class TestHeraldInvariants:
    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_completeness(self, seed):
        psi = random_pure_state(seed, num_modes=3, cutoff=2)
        total = 0.0
        for n0, n1 in product(range(3), repeat=2):
            total += herald(psi, HeraldPattern(conditions=((0, n0), (1, n1)))).probability
        assert total == pytest.approx(1.0, abs=1e-10)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_order_independence(self, seed):
        psi = random_pure_state(seed, num_modes=3, cutoff=2)
        a = herald(psi, HeraldPattern(conditions=((0, 1), (2, 0))))
        b = herald(psi, HeraldPattern(conditions=((2, 0), (0, 1))))
        assert a.probability == pytest.approx(b.probability, abs=1e-12)
        if a.state is not None:
            assert np.allclose(a.state.amplitudes, b.state.amplitudes, atol=1e-12)

    def test_click_probability_monotone_in_efficiency(self):
        psi = to_density(random_pure_state(17, num_modes=2, cutoff=3))
        previous = 1.1
        for eff in (1.0, 0.8, 0.6, 0.4, 0.2):
            p_zero = herald(psi, HeraldPattern(conditions=((0, 0),), efficiency=eff)).probability
            p_click = 1.0 - p_zero
            assert p_click <= previous + 1e-12
            previous = p_click
