"""Overlap-power algebra: model closed forms, explicit ensembles, bounds."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockdiag import (
    AsppTable,
    DecoherenceParams,
    DomainError,
    EnsembleError,
    InternalEnsemble,
    MissingAsppError,
    PhaseMixture,
    aspp_from_ensembles,
    aspp_from_params,
    decohere_ensembles,
    effective_aspp,
    jensen_bounds_check,
)
from fockdiag.decoherence import (
    apply_distinguishability,
    apply_mixing,
    compose_dephasing,
)

from conftest import random_real_ensemble

unit = st.floats(0.0, 1.0)


class TestParams:
    def test_bounds_enforced(self):
        with pytest.raises(DomainError):
            DecoherenceParams(1.2, 0.5, 0.5)
        with pytest.raises(DomainError):
            DecoherenceParams(0.5, -0.1, 0.5)
        with pytest.raises(DomainError):
            DecoherenceParams(0.5, 0.5, float("nan"))

    def test_ideal_and_tuple_order(self):
        params = DecoherenceParams.ideal()
        assert params.as_tuple() == (1.0, 1.0, 1.0)
        assert DecoherenceParams(0.1, 0.2, 0.3).as_tuple() == (0.1, 0.2, 0.3)


class TestClosedForm:
    def test_reference_triple_entries(self):
        params = DecoherenceParams(0.7, 0.6, 0.7)
        assert aspp_from_params(params, 1, 0) == pytest.approx(0.2401, abs=1e-15)
        assert aspp_from_params(params, 0, 1) == pytest.approx(0.2058, abs=1e-15)
        assert aspp_from_params(params, 1, 1) == pytest.approx(0.100842, abs=1e-15)

    def test_empty_average_is_unity(self):
        assert aspp_from_params(DecoherenceParams(0.0, 0.0, 0.0), 0, 0) == 1.0

    @given(gd=unit, gp=unit, gm=unit, m=st.integers(0, 4), k=st.integers(0, 4))
    def test_closed_form_factorization(self, gd, gp, gm, m, k):
        if m == 0 and k == 0:
            return
        params = DecoherenceParams(gd, gp, gm)
        expected = (gp if k >= 1 else 1.0) * gm**2 * gd ** (2 * m + k)
        assert aspp_from_params(params, m, k) == pytest.approx(expected, abs=1e-12)

    def test_monotone_in_each_parameter(self):
        grid = np.linspace(0.0, 1.0, 11)
        for m, k in ((1, 0), (0, 1), (1, 1), (2, 3)):
            for axis in range(3):
                values = []
                for g in grid:
                    gams = [1.0, 1.0, 1.0]
                    gams[axis] = float(g)
                    values.append(aspp_from_params(DecoherenceParams(*gams), m, k))
                diffs = np.diff(values)
                assert np.all(diffs >= -1e-15)

    def test_negative_indices_rejected(self):
        with pytest.raises(DomainError):
            aspp_from_params(DecoherenceParams.ideal(), -1, 0)


class TestEnsembles:
    def test_pure_qubit_overlap_powers(self):
        theta = 0.6
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([math.cos(theta), math.sin(theta)])
        for m in range(3):
            for k in range(3):
                expected = math.cos(theta) ** (2 * m + k)
                got = aspp_from_ensembles(upper, lower, m, k)
                assert got == pytest.approx(expected, abs=1e-12)

    def test_orthogonal_states_kill_all_powers(self):
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([0.0, 1.0])
        assert aspp_from_ensembles(upper, lower, 1, 0) == 0.0
        assert aspp_from_ensembles(upper, lower, 0, 1) == 0.0
        assert aspp_from_ensembles(upper, lower, 0, 0) == 1.0

    def test_complex_overlap_rejected_for_odd_power(self):
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([1j / math.sqrt(2.0), 1.0 / math.sqrt(2.0)])
        with pytest.raises(EnsembleError):
            aspp_from_ensembles(upper, lower, 0, 1)
        # The modulus power ignores the phase of the overlap.
        assert aspp_from_ensembles(upper, lower, 1, 0) == pytest.approx(0.5)

    def test_weight_and_norm_validation(self):
        with pytest.raises(EnsembleError):
            InternalEnsemble(((0.5, np.array([1.0, 0.0])),))
        with pytest.raises(EnsembleError):
            InternalEnsemble(((1.0, np.array([1.0, 1.0])),))
        with pytest.raises(EnsembleError):
            InternalEnsemble(())

    def test_density_matrix_properties(self, rng):
        ensemble = random_real_ensemble(rng, dim=4)
        rho = ensemble.density_matrix()
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        eigs = np.linalg.eigvalsh(rho)
        assert np.all(eigs >= -1e-12)

    def test_purity_link_to_first_modulus_power(self, rng):
        for _ in range(10):
            upper = random_real_ensemble(rng, dim=4)
            lower = random_real_ensemble(rng, dim=4)
            trace = float(
                np.real(np.trace(upper.density_matrix() @ lower.density_matrix()))
            )
            assert aspp_from_ensembles(upper, lower, 1, 0) == pytest.approx(
                trace, abs=1e-12
            )


class TestPhaseMixture:
    def test_trivial_mixture_passes_everything(self):
        mixture = PhaseMixture.trivial()
        for k in range(5):
            assert mixture.attenuation(k) == pytest.approx(1.0)

    def test_dephasing_attenuates_every_relevant_harmonic_equally(self):
        total = 3
        mixture = PhaseMixture.dephasing(0.6, total)
        assert mixture.attenuation(0) == pytest.approx(1.0, abs=1e-12)
        for k in range(1, 2 * total + 1):
            assert complex(mixture.attenuation(k)) == pytest.approx(
                0.6 + 0.0j, abs=1e-12
            )

    def test_dephasing_extremes(self):
        full = PhaseMixture.dephasing(0.0, 2)
        none = PhaseMixture.dephasing(1.0, 2)
        assert abs(full.attenuation(1)) < 1e-12
        assert none.attenuation(3) == pytest.approx(1.0)

    def test_weights_form_distribution(self):
        mixture = PhaseMixture.dephasing(0.3, 4)
        weights = [w for w, _ in mixture.branches]
        assert min(weights) >= 0.0
        assert sum(weights) == pytest.approx(1.0, abs=1e-12)


class TestConstructions:
    def test_distinguishability_scales_overlap(self, rng):
        upper = random_real_ensemble(rng, dim=3)
        lower = random_real_ensemble(rng, dim=3)
        before = aspp_from_ensembles(upper, lower, 0, 1)
        up, low = apply_distinguishability(upper, lower, 0.6)
        after = aspp_from_ensembles(up, low, 0, 1)
        assert after == pytest.approx(0.6 * before, abs=1e-12)

    def test_mixing_branch_weights(self):
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([1.0, 0.0])
        up, low = apply_mixing(upper, lower, 0.7)
        assert [w for w, _ in up.branches] == pytest.approx([0.7, 0.3])
        assert [w for w, _ in low.branches] == pytest.approx([0.7, 0.3])
        # Only the keep-keep pair overlaps; all fresh pairings are orthogonal.
        assert aspp_from_ensembles(up, low, 1, 0) == pytest.approx(0.49, abs=1e-12)

    def test_ideal_construction_is_identity(self):
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([0.8, 0.6])
        up, low, mixture = decohere_ensembles(
            upper, lower, DecoherenceParams.ideal(), total=3
        )
        assert np.allclose(up.branches[0][1], [1.0, 0.0])
        assert np.allclose(low.branches[0][1], [0.8, 0.6])
        assert mixture.attenuation(2) == pytest.approx(1.0)

    def test_mixed_input_rejected(self):
        mixed = InternalEnsemble(
            (
                (0.5, np.array([1.0, 0.0], dtype=complex)),
                (0.5, np.array([0.0, 1.0], dtype=complex)),
            )
        )
        with pytest.raises(EnsembleError):
            decohere_ensembles(
                mixed, InternalEnsemble.pure([1.0, 0.0]), DecoherenceParams.ideal(), 2
            )

    @settings(max_examples=50, deadline=None)
    @given(gd=unit, gp=unit, gm=unit)
    def test_constructed_ensembles_reproduce_closed_form(self, gd, gp, gm):
        params = DecoherenceParams(gd, gp, gm)
        total = 6
        upper = InternalEnsemble.pure([1.0, 0.0])
        lower = InternalEnsemble.pure([1.0, 0.0])
        up, low, mixture = decohere_ensembles(upper, lower, params, total)
        for m in range(4):
            for k in range(4):
                if m + k == 0 or 2 * m + k > 2 * total:
                    continue
                built = effective_aspp(up, low, mixture, m, k)
                closed = aspp_from_params(params, m, k)
                assert built == pytest.approx(closed, abs=1e-10)

    def test_operation_order_does_not_matter(self):
        gd, gp, gm = 0.8, 0.5, 0.6
        total = 4
        base = InternalEnsemble.pure([1.0, 0.0])

        def build(order):
            upper, lower = base, base
            mixture = PhaseMixture.trivial()
            for step in order:
                if step == "dist":
                    upper, lower = apply_distinguishability(upper, lower, gd)
                elif step == "mix":
                    upper, lower = apply_mixing(upper, lower, gm)
                else:
                    mixture = compose_dephasing(mixture, gp, total)
            table = {}
            for m in range(3):
                for k in range(3):
                    if m + k:
                        table[(m, k)] = effective_aspp(upper, lower, mixture, m, k)
            return table

        reference = build(("dist", "mix", "phase"))
        for order in itertools.permutations(("dist", "mix", "phase")):
            other = build(order)
            for key, value in reference.items():
                assert other[key] == pytest.approx(value, abs=1e-12)


class TestAsppTable:
    def test_anchor_entry_forced(self):
        table = AsppTable({(1, 0): 0.5})
        assert table.value(0, 0) == 1.0
        with pytest.raises(DomainError):
            AsppTable({(0, 0): 0.9})

    def test_missing_lookup_carries_indices(self):
        table = AsppTable({(1, 0): 0.5})
        with pytest.raises(MissingAsppError) as info:
            table.value(2, 0)
        assert (info.value.m, info.value.k) == (2, 0)

    def test_from_params_matches_pointwise(self):
        params = DecoherenceParams(0.7, 0.6, 0.7)
        pairs = [(0, 0), (1, 0), (0, 1), (1, 1)]
        table = AsppTable.from_params(params, pairs)
        for pair in pairs:
            assert table.value(*pair) == aspp_from_params(params, *pair)

    def test_from_ensembles_matches_effective_values(self, rng):
        upper = random_real_ensemble(rng)
        lower = random_real_ensemble(rng)
        mixture = PhaseMixture.dephasing(0.4, 3)
        pairs = [(1, 0), (0, 1), (1, 1), (2, 0)]
        table = AsppTable.from_ensembles(upper, lower, pairs, mixture)
        for pair in pairs:
            assert table.value(*pair) == pytest.approx(
                effective_aspp(upper, lower, mixture, *pair), abs=1e-15
            )


class TestJensenBounds:
    def test_model_tables_are_consistent(self):
        for gd in (0.0, 0.4, 0.9, 1.0):
            params = DecoherenceParams(gd, 0.7, 0.8)
            table = AsppTable.from_params(params, [(m, 0) for m in range(1, 6)])
            assert jensen_bounds_check(table) == ()

    def test_pure_states_saturate_lower_bound(self):
        # t_m = g^(2m) sits exactly on the Jensen floor of every lower moment.
        table = AsppTable({(m, 0): 0.8 ** (2 * m) for m in range(1, 6)})
        assert jensen_bounds_check(table) == ()

    def test_upper_violation_detected(self):
        table = AsppTable({(1, 0): 0.5, (2, 0): 0.6})
        violations = jensen_bounds_check(table)
        assert any(v.bound == "upper" for v in violations)
        worst = max(v.deficit for v in violations)
        assert worst == pytest.approx(0.1, abs=1e-12)

    def test_lower_violation_detected(self):
        table = AsppTable({(1, 0): 0.8, (2, 0): 0.5})
        violations = jensen_bounds_check(table)
        assert any(v.bound == "lower" for v in violations)
        deficit = next(v.deficit for v in violations if v.bound == "lower")
        assert deficit == pytest.approx(0.8**2 - 0.5, abs=1e-12)

    def test_negative_entry_detected(self):
        table = AsppTable({(1, 0): -0.2})
        violations = jensen_bounds_check(table)
        assert any(v.bound == "nonnegative" for v in violations)

    def test_tolerance_suppresses_noise(self):
        table = AsppTable({(1, 0): 0.5, (2, 0): 0.5 + 1e-12})
        assert jensen_bounds_check(table, tolerance=1e-10) == ()

    def test_random_ensembles_never_violate(self, rng):
        for _ in range(20):
            upper = random_real_ensemble(rng)
            lower = random_real_ensemble(rng)
            table = AsppTable.from_ensembles(
                upper, lower, [(m, 0) for m in range(1, 5)]
            )
            assert jensen_bounds_check(table) == ()
