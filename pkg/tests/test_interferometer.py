import math

import numpy as np
import pytest

from ctxscope.contexts import INTERIOR_LABELS, canonical_paths, path_probability, witness_direct
from ctxscope.core import haar_random_states, inner
from ctxscope.interferometer import (
    DuplicateModifierError,
    InvalidModifierTargetError,
    attenuate,
    block,
    counterfactual_gain,
    fringe_coefficients,
    phase_scan,
    phase_shift,
    run,
    run_many,
    transmittance_scan,
    witness_from_outputs,
)
from ctxscope.reference import NAMED_STATES

NF = NAMED_STATES["Nf"]
BF = NAMED_STATES["Bf"]
V0 = NAMED_STATES["V0"]


def blocked_oracle(psi: np.ndarray, label: str) -> np.ndarray:
    """Independent prediction: project out the blocked path, then take
    output magnitudes squared (the unmodified network is the identity)."""
    vec = canonical_paths()[label]
    projected = psi - inner(vec, psi) * vec
    return np.abs(projected) ** 2


class TestBuildNetwork:
    def test_five_stages_with_expected_bases(self, network):
        assert [s.index for s in network.stages] == [1, 2, 3, 4, 5]
        assert network.stages[0].basis == ("1", "D1", "S1")
        assert network.stages[4].basis == ("1", "2", "3")

    def test_telescoping_product_is_identity(self, network):
        product = np.eye(3, dtype=complex)
        for stage in network.stages:
            product = stage.transfer.matrix @ product
        assert np.max(np.abs(product - np.eye(3))) < 1e-12

    def test_reflectivity_sequence(self, network):
        assert network.reflectivities == pytest.approx(
            (1 / 2, 1 / 3, 1 / 4, 1 / 3, 1 / 2), abs=1e-12
        )

    def test_each_stage_leaves_shared_label_untouched(self, network):
        from ctxscope.contexts import context_at

        for stage in network.stages:
            prev = context_at(stage.index - 1)
            shared = (set(prev) & set(stage.basis)).pop()
            i, j = stage.basis.index(shared), prev.index(shared)
            col = np.abs(stage.transfer.matrix[:, j])
            row = np.abs(stage.transfer.matrix[i, :])
            assert col[i] == pytest.approx(1.0, abs=1e-12)
            assert row[j] == pytest.approx(1.0, abs=1e-12)
            assert np.sum(col) == pytest.approx(1.0, abs=1e-12)
            assert np.sum(row) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("rail", range(3))
    def test_input_rails_route_to_matching_output(self, network, rail):
        psi = np.zeros(3, dtype=complex)
        psi[rail] = 1.0
        dist = run(network, psi)
        expected = [0.0, 0.0, 0.0]
        expected[rail] = 1.0
        assert list(dist) == pytest.approx(expected, abs=1e-12)


class TestRun:
    def test_balanced_state_free(self, network):
        assert list(run(network, NF)) == pytest.approx([1 / 3] * 3, abs=1e-12)

    def test_balanced_state_blocked(self, network):
        dist = run(network, NF, [block("f")])
        assert list(dist) == pytest.approx([4 / 27, 4 / 27, 16 / 27], abs=1e-12)
        assert list(dist) == pytest.approx(blocked_oracle(NF, "f"), abs=1e-12)

    def test_boundary_state_blocked(self, network):
        dist = run(network, BF, [block("f")])
        assert list(dist) == pytest.approx([25 / 153, 25 / 153, 100 / 153], abs=1e-12)
        assert list(dist) == pytest.approx(blocked_oracle(BF, "f"), abs=1e-12)

    def test_near_maximal_state_blocked(self, network):
        dist = run(network, V0, [block("f")])
        assert list(dist) == pytest.approx([1 / 9, 1 / 9, 4 / 9], abs=1e-12)
        assert list(dist) == pytest.approx(blocked_oracle(V0, "f"), abs=1e-12)

    def test_zero_phase_is_identity(self, network):
        assert list(run(network, NF, [phase_shift("f", 0.0)])) == pytest.approx(
            list(run(network, NF)), abs=1e-15
        )

    def test_phase_only_runs_preserve_survival(self, network):
        for psi in haar_random_states(20, 42):
            for mods in ([phase_shift("f", 1.3)],
                         [phase_shift("S1", 0.4), phase_shift("P2", 2.0)]):
                assert run(network, psi, mods).survival == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("label", INTERIOR_LABELS)
    def test_blocking_removes_exactly_the_path_probability(self, network, label):
        for psi in haar_random_states(10, 77):
            dist = run(network, psi, [block(label)])
            assert dist.survival == pytest.approx(1.0 - path_probability(psi, label), abs=1e-12)
            assert list(dist) == pytest.approx(blocked_oracle(psi, label), abs=1e-12)

    def test_attenuator_interpolates_block_and_identity(self, network):
        full = run(network, NF, [attenuate("f", 1.0)])
        none = run(network, NF, [attenuate("f", 0.0)])
        assert list(full) == pytest.approx(list(run(network, NF)), abs=1e-12)
        assert list(none) == pytest.approx(list(run(network, NF, [block("f")])), abs=1e-12)

    def test_rejects_input_rail_target(self):
        with pytest.raises(InvalidModifierTargetError):
            block("1")

    def test_rejects_unknown_target(self):
        with pytest.raises(InvalidModifierTargetError):
            phase_shift("X9", 1.0)

    def test_rejects_duplicate_modifiers_on_one_path(self, network):
        with pytest.raises(DuplicateModifierError):
            run(network, NF, [block("f"), phase_shift("f", 1.0)])

    def test_rejects_out_of_range_attenuation(self):
        with pytest.raises(ValueError):
            attenuate("f", 1.5)

    def test_rejects_unnormalized_state(self, network):
        with pytest.raises(ValueError, match="normalized"):
            run(network, [1.0, 1.0, 0.0])

    def test_run_many_matches_run(self, network):
        states = haar_random_states(25, 3)
        batch = run_many(network, states, [block("S2")])
        for i, psi in enumerate(states):
            assert list(run(network, psi, [block("S2")])) == pytest.approx(batch[i], abs=1e-14)


class TestCounterfactualGain:
    def test_frozen_values(self, network):
        assert counterfactual_gain(network, NF, "f", 3) == pytest.approx(7 / 27, abs=1e-12)
        assert counterfactual_gain(network, BF, "f", 3) == pytest.approx(19 / 153, abs=1e-12)
        assert counterfactual_gain(network, V0, "f", 3) == pytest.approx(1 / 3, abs=1e-12)

    def test_gain_can_be_negative(self, network):
        assert counterfactual_gain(network, NF, "f", 1) == pytest.approx(4 / 27 - 1 / 3, abs=1e-12)

    def test_invalid_port(self, network):
        with pytest.raises(ValueError):
            counterfactual_gain(network, NF, "f", 4)


class TestWitnessFromOutputs:
    @pytest.mark.parametrize(
        ("psi", "expected"),
        [(NF, 1 / 9), (BF, -2 / 51), (V0, 2 / 9)],
        ids=["Nf", "Bf", "V0"],
    )
    def test_frozen_values(self, network, psi, expected):
        free = run(network, psi)
        blocked = run(network, psi, [block("f")])
        assert witness_from_outputs(free, blocked) == pytest.approx(expected, abs=1e-12)

    def test_identity_with_interior_witness_over_random_states(self, network):
        states = haar_random_states(10_000, 2718)
        free = run_many(network, states)
        blocked = run_many(network, states, [block("f")])
        from_outputs = (blocked[:, 2] - free[:, 2]) - 0.5 * (blocked[:, 0] + blocked[:, 1])
        direct = np.array([witness_direct(psi) for psi in states[:200]])
        assert from_outputs[:200] == pytest.approx(direct, abs=1e-12)
        from ctxscope.contexts import witness_matrix

        all_direct = np.real(np.einsum("ni,ij,nj->n", states.conj(), witness_matrix(), states))
        assert float(np.max(np.abs(all_direct - from_outputs))) < 1e-12

    def test_gain_dominates_witness(self, network):
        states = haar_random_states(2_000, 99)
        free = run_many(network, states)
        blocked = run_many(network, states, [block("f")])
        gain = blocked[:, 2] - free[:, 2]
        residual = 0.5 * (blocked[:, 0] + blocked[:, 1])
        witness = gain - residual
        assert np.all(residual >= -1e-15)
        assert np.all(gain >= witness - 1e-12)

    def test_gain_without_violation_exists(self, network):
        assert witness_direct(BF) < 0
        assert counterfactual_gain(network, BF, "f", 3) > 0


class TestScans:
    def test_phase_fringe_follows_closed_form(self, network):
        grid = np.linspace(0.0, 2.0 * math.pi, 13)
        data = phase_scan(network, NF, "f", grid)
        expected_p3 = (17.0 - 8.0 * np.cos(grid)) / 27.0
        expected_p1 = (5.0 + 4.0 * np.cos(grid)) / 27.0
        assert data.values[:, 2] == pytest.approx(expected_p3, abs=1e-12)
        assert data.values[:, 0] == pytest.approx(expected_p1, abs=1e-12)
        assert data.values.sum(axis=1) == pytest.approx(np.ones(13), abs=1e-12)

    def test_phase_fringe_spot_values(self, network):
        data = phase_scan(network, NF, "f", [math.pi, math.pi / 2.0])
        assert data.values[0, 2] == pytest.approx(25 / 27, abs=1e-12)
        assert data.values[1, 0] == pytest.approx(5 / 27, abs=1e-12)

    def test_near_maximal_state_fringe(self, network):
        data = phase_scan(network, V0, "f", [0.0])
        assert data.values[0, 2] == pytest.approx(1 / 9, abs=1e-12)

    def test_phase_scan_requires_nonempty_grid(self, network):
        with pytest.raises(ValueError):
            phase_scan(network, NF, "f", [])

    def test_transmittance_endpoints(self, network):
        data = transmittance_scan(network, NF, "f", [0.0, math.pi])
        assert data.values[0] == pytest.approx([4 / 27, 4 / 27, 16 / 27], abs=1e-12)
        assert data.values[1] == pytest.approx([1 / 3, 1 / 3, 1 / 3], abs=1e-12)

    def test_transmittance_survival_formula(self, network):
        thetas = np.linspace(0.0, math.pi, 9)
        data = transmittance_scan(network, NF, "f", thetas)
        power = np.sin(thetas / 2.0) ** 2
        expected = 1.0 - (1.0 - power) * path_probability(NF, "f")
        assert data.values.sum(axis=1) == pytest.approx(expected, abs=1e-12)
        assert data.values.sum(axis=1)[4] == pytest.approx(17 / 18, abs=1e-12)

    def test_transmittance_domain_check(self, network):
        with pytest.raises(ValueError):
            transmittance_scan(network, NF, "f", [-0.1])


class TestFringeCoefficients:
    @pytest.mark.parametrize(
        ("name", "offsets", "amplitudes"),
        [
            ("Nf", (5 / 27, 5 / 27, 17 / 27), (4 / 27, 4 / 27, -8 / 27)),
            ("Bf", (26 / 153, 26 / 153, 101 / 153), (10 / 153, 10 / 153, -20 / 153)),
            ("V0", (2 / 9, 2 / 9, 5 / 9), (2 / 9, 2 / 9, -4 / 9)),
        ],
    )
    def test_exact_model_coefficients(self, network, name, offsets, amplitudes):
        offs, amps = fringe_coefficients(network, NAMED_STATES[name])
        assert offs == pytest.approx(offsets, abs=1e-12)
        assert amps == pytest.approx(amplitudes, abs=1e-12)
