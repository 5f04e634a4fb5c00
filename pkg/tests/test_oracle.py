"""Brute-force enumeration cross-checks for the closed-form statistics."""

import math

import numpy as np
import pytest

from fockdiag import (
    AsppTable,
    DecoherenceParams,
    DomainError,
    EnsembleError,
    InputState,
    InternalEnsemble,
    PhaseMixture,
    component_expansion,
    distribution_from_params,
    oracle_decohered_distribution,
    oracle_distribution,
    outcome_distribution,
)
from fockdiag.oracle import MAX_ORACLE_TOTAL

from conftest import all_states, random_real_ensemble


def random_unit(rng, dim):
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


class TestComponentExpansion:
    def test_preserves_norm(self, rng):
        for n1, n2 in ((1, 0), (2, 1), (3, 2), (0, 4)):
            vec = component_expansion(
                n1, n2, random_unit(rng, 3), random_unit(rng, 3)
            )
            assert vec.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_conserves_particle_number(self, rng):
        vec = component_expansion(2, 3, random_unit(rng, 2), random_unit(rng, 2))
        for config in vec.amplitudes:
            assert sum(config) == 5

    def test_single_particle_split(self):
        # One particle entering port 1 leaves half reflected (factor i) and
        # half transmitted.
        vec = component_expansion(1, 0, np.array([1.0 + 0j]), np.array([1.0 + 0j]))
        amp_reflect = vec.amplitudes[(1, 0)]
        amp_transmit = vec.amplitudes[(0, 1)]
        assert amp_reflect == pytest.approx(1j / math.sqrt(2.0))
        assert amp_transmit == pytest.approx(1.0 / math.sqrt(2.0))

    def test_hom_cancellation_for_identical_particles(self):
        one = np.array([1.0 + 0j])
        vec = component_expansion(1, 1, one, one)
        # The coincidence configuration (1, 1) cancels exactly.
        assert vec.amplitudes.get((1, 1), 0.0) == pytest.approx(0.0, abs=1e-15)
        assert abs(vec.amplitudes[(2, 0)]) ** 2 == pytest.approx(0.5, abs=1e-12)

    def test_rejects_mismatched_vectors(self):
        with pytest.raises(EnsembleError):
            component_expansion(1, 1, np.ones(2) / math.sqrt(2), np.ones(3) / math.sqrt(3))


class TestOracleAgainstClosedForm:
    def test_pure_overlap_grid_matches_analytic_path(self, rng):
        # Pure internal states with a known real overlap: the closed form
        # contracts the coefficient tables with g^(2m+k); the oracle expands
        # the full labeled Fock space. They must agree to near machine level.
        for state in all_states(6):
            for g in (0.0, 0.3, 0.7, 1.0):
                upper = InternalEnsemble.pure([1.0, 0.0])
                lower = InternalEnsemble.pure([g, math.sqrt(1.0 - g * g)])
                table = AsppTable(
                    {
                        (m, k): g ** (2 * m + k)
                        for m in range(state.m + 1)
                        for k in (0, state.n - state.m)
                    }
                )
                for eta in (0.0, 0.9, 2.2):
                    brute = oracle_distribution(state, upper, lower, None, eta)
                    closed = outcome_distribution(state, eta, table)
                    assert np.allclose(
                        brute.as_array(), closed.as_array(), atol=1e-12
                    )

    def test_mixed_ensembles_match_effective_table(self, rng):
        for state in all_states(5):
            upper = random_real_ensemble(rng, dim=3)
            lower = random_real_ensemble(rng, dim=3)
            mixture = PhaseMixture.dephasing(0.55, state.total)
            table = AsppTable.from_ensembles(
                upper,
                lower,
                [
                    (m, k)
                    for m in range(state.m + 1)
                    for k in (0, state.n - state.m)
                ],
                mixture,
            )
            for eta in (0.4, 1.7):
                brute = oracle_distribution(state, upper, lower, mixture, eta)
                closed = outcome_distribution(state, eta, table)
                assert np.allclose(brute.as_array(), closed.as_array(), atol=1e-11)

    def test_decohered_construction_matches_model(self):
        triples = [
            (0.7, 0.6, 0.7),
            (0.3, 1.0, 0.9),
            (1.0, 0.0, 1.0),
            (0.0, 0.5, 0.5),
        ]
        for state in (
            InputState.superposition(2, 1),
            InputState.twin_fock(2),
            InputState.noon(3),
        ):
            for triple in triples:
                params = DecoherenceParams(*triple)
                for eta in (0.0, 1.1):
                    brute = oracle_decohered_distribution(state, 1.0, params, eta)
                    closed = distribution_from_params(state, eta, params)
                    assert np.allclose(
                        brute.as_array(), closed.as_array(), atol=1e-11
                    )

    def test_orthogonal_arms_give_classical_binomial(self):
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([0.0, 1.0])
        for state in (InputState.twin_fock(2), InputState.superposition(3, 1)):
            dist = oracle_distribution(state, upper, lower, None, 0.8)
            total = state.total
            expected = [math.comb(total, s) / 2.0**total for s in range(total + 1)]
            assert np.allclose(dist.as_array(), expected, atol=1e-12)

    def test_partial_pure_overlap_scales_like_distinguishability(self):
        # Starting from pure states at overlap g and applying no decoherence
        # equals the model at gamma_dist = g.
        state = InputState.superposition(2, 1)
        g = 0.64
        brute = oracle_decohered_distribution(
            state, g, DecoherenceParams.ideal(), 1.3
        )
        closed = distribution_from_params(
            state, 1.3, DecoherenceParams(g, 1.0, 1.0)
        )
        assert np.allclose(brute.as_array(), closed.as_array(), atol=1e-12)


class TestOracleGuards:
    def test_total_capped(self):
        big = InputState.superposition(MAX_ORACLE_TOTAL, 1)
        upper = InternalEnsemble.pure([1.0])
        with pytest.raises(DomainError):
            oracle_distribution(big, upper, upper, None, 0.0)

    def test_dimension_mismatch_rejected(self):
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([1.0])
        with pytest.raises(EnsembleError):
            oracle_distribution(
                InputState.twin_fock(1), upper, lower, None, 0.0
            )

    def test_overlap_outside_unit_interval_rejected(self):
        with pytest.raises(DomainError):
            oracle_decohered_distribution(
                InputState.twin_fock(1), 1.5, DecoherenceParams.ideal(), 0.0
            )
