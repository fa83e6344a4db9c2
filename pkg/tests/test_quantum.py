import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqh.quantum import (
    AnsatzSpec,
    Observable,
    PauliTerm,
    SampleDistribution,
    StateVector,
    argmax_state,
    evaluate_ansatz,
    expectation,
    marginals,
    sample,
)

RY = lambda t: np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]], dtype=complex)
RZ = lambda t: np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex)
I2 = np.eye(2, dtype=complex)
# big-endian CX with control = qubit 0, target = qubit 1
CX01 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class TestAnsatz:
    def test_parameter_count(self):
        assert AnsatzSpec(3, reps=2).parameter_count == 18
        assert AnsatzSpec(1, reps=0).parameter_count == 2

    def test_identity_rotations_keep_ground_state(self):
        state = evaluate_ansatz(AnsatzSpec(1, reps=0), [0.0, 0.0])
        np.testing.assert_allclose(state.amplitudes, [1.0, 0.0], atol=1e-12)

    def test_ry_pi_flips_qubit(self):
        state = evaluate_ansatz(AnsatzSpec(1, reps=0), [np.pi, 0.0])
        assert abs(state.amplitudes[1]) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_matches_dense_matrix_oracle(self):
        # independent oracle: multiply explicit 4x4 gate matrices
        spec = AnsatzSpec(2, reps=1, entanglement="linear")
        params = np.random.default_rng(7).uniform(-np.pi, np.pi, spec.parameter_count)
        unitary = np.eye(4, dtype=complex)
        for layer in range(2):
            base = 4 * layer
            unitary = np.kron(RY(params[base + 0]), I2) @ unitary
            unitary = np.kron(I2, RY(params[base + 1])) @ unitary
            unitary = np.kron(RZ(params[base + 2]), I2) @ unitary
            unitary = np.kron(I2, RZ(params[base + 3])) @ unitary
            if layer == 0:
                unitary = CX01 @ unitary
        expected = unitary @ np.array([1, 0, 0, 0], dtype=complex)
        state = evaluate_ansatz(spec, params)
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)

    def test_parameter_count_mismatch_raises(self):
        with pytest.raises(ValueError):
            evaluate_ansatz(AnsatzSpec(2, reps=1), [0.0] * 7)

    def test_entangler_pairs(self):
        assert AnsatzSpec(3, entanglement="linear").entangler_pairs() == [(0, 1), (1, 2)]
        assert AnsatzSpec(3, entanglement="circular").entangler_pairs() == [
            (0, 1), (1, 2), (2, 0),
        ]
        assert AnsatzSpec(3, entanglement="full").entangler_pairs() == [
            (0, 1), (0, 2), (1, 2),
        ]

    @given(
        n=st.integers(1, 4),
        reps=st.integers(0, 2),
        ent=st.sampled_from(["linear", "circular", "full"]),
        seed=st.integers(0, 2**31),
    )
    @settings(max_examples=40, deadline=None)
    def test_normalization_preserved(self, n, reps, ent, seed):
        spec = AnsatzSpec(n, reps, ent)
        params = np.random.default_rng(seed).uniform(-4 * np.pi, 4 * np.pi, spec.parameter_count)
        state = evaluate_ansatz(spec, params)
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) < 1e-10


class TestExpectation:
    def test_identity_observable(self):
        state = evaluate_ansatz(AnsatzSpec(2, reps=1), np.linspace(0.1, 0.8, 8))
        obs = Observable(2, [PauliTerm(1.0, "II")])
        assert expectation(state, obs) == pytest.approx(1.0, abs=1e-12)

    def test_z_on_ground_state(self):
        state = StateVector(1, [1.0, 0.0])
        assert expectation(state, Observable(1, [PauliTerm(1.0, "Z")])) == 1.0

    def test_marginal_relation(self, three_qubit_state):
        # ⟨Z_0⟩ = 1 - 2·P(q0=1) = 1 - 2·(13/16)
        obs = Observable(3, [PauliTerm(1.0, "ZII")])
        assert expectation(three_qubit_state, obs) == pytest.approx(-5 / 8, abs=1e-12)

    def test_x_term_on_plus_state(self):
        state = evaluate_ansatz(AnsatzSpec(1, reps=0), [np.pi / 2, 0.0])
        assert expectation(state, Observable(1, [PauliTerm(1.0, "X")])) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_dimension_mismatch(self):
        state = StateVector(1, [1.0, 0.0])
        with pytest.raises(ValueError):
            expectation(state, Observable(2, [PauliTerm(1.0, "ZZ")]))

    @given(seed=st.integers(0, 2**31), a=st.floats(-3, 3), b=st.floats(-3, 3))
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, seed, a, b):
        spec = AnsatzSpec(3, reps=1)
        params = np.random.default_rng(seed).uniform(-np.pi, np.pi, spec.parameter_count)
        state = evaluate_ansatz(spec, params)
        h1 = Observable(3, [PauliTerm(1.0, "ZIZ"), PauliTerm(0.5, "IXI")])
        h2 = Observable(3, [PauliTerm(-2.0, "ZZI"), PauliTerm(1.0, "III")])
        combined = Observable(
            3,
            [PauliTerm(a * t.coefficient, t.axes) for t in h1.terms]
            + [PauliTerm(b * t.coefficient, t.axes) for t in h2.terms],
        )
        left = expectation(state, combined)
        right = a * expectation(state, h1) + b * expectation(state, h2)
        assert abs(left - right) < 1e-9

    @given(n=st.integers(1, 6), seed=st.integers(0, 2**31))
    @settings(max_examples=20, deadline=None)
    def test_diagonal_matches_enumeration(self, n, seed):
        rng = np.random.default_rng(seed)
        spec = AnsatzSpec(n, reps=1)
        state = evaluate_ansatz(spec, rng.uniform(-np.pi, np.pi, spec.parameter_count))
        terms = []
        for _ in range(3):
            axes = "".join(rng.choice(list("IZ"), n))
            terms.append(PauliTerm(float(rng.uniform(-2, 2)), axes))
        obs = Observable(n, terms)
        probs = np.abs(state.amplitudes) ** 2
        brute = 0.0
        for s in range(2**n):
            eig = 0.0
            for term in terms:
                value = term.coefficient
                for i, ax in enumerate(term.axes):
                    if ax == "Z" and (s >> (n - 1 - i)) & 1:
                        value = -value
                eig += value
            brute += probs[s] * eig
        assert abs(expectation(state, obs) - brute) < 1e-9


class TestSampling:
    def test_basis_state_is_deterministic(self):
        amps = np.zeros(4, dtype=complex)
        amps[2] = 1.0  # |10⟩
        dist = sample(StateVector(2, amps), shots=1024, seed=5)
        assert dist.probabilities == {"10": 1.0}

    def test_exact_mode(self, three_qubit_state):
        dist = sample(three_qubit_state, shots=0)
        assert dist.probabilities == pytest.approx(
            {"100": 3 / 4, "011": 3 / 16, "101": 1 / 16}
        )

    def test_uniform_concentration(self):
        state = StateVector(2, np.full(4, 0.5, dtype=complex))
        dist = sample(state, shots=10**6, seed=11)
        assert np.all(np.abs(dist.probs - 0.25) < 0.005)

    def test_total_variation_bound(self):
        spec = AnsatzSpec(3, reps=1)
        params = np.random.default_rng(3).uniform(-np.pi, np.pi, spec.parameter_count)
        state = evaluate_ansatz(spec, params)
        shots = 10**6
        dist = sample(state, shots=shots, seed=13)
        tv = 0.5 * np.sum(np.abs(dist.probs - state.probabilities()))
        assert tv < 4 / np.sqrt(shots)

    def test_negative_shots_rejected(self):
        with pytest.raises(ValueError):
            sample(StateVector(1, [1.0, 0.0]), shots=-1)

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=20, deadline=None)
    def test_exact_marginals_match_reduced_probabilities(self, seed):
        spec = AnsatzSpec(4, reps=1)
        params = np.random.default_rng(seed).uniform(-np.pi, np.pi, spec.parameter_count)
        state = evaluate_ansatz(spec, params)
        got = marginals(sample(state, 0))
        probs = state.probabilities()
        for i in range(4):
            direct = sum(p for s, p in enumerate(probs) if (s >> (4 - 1 - i)) & 1)
            assert abs(got[i] - direct) < 1e-12


class TestMarginals:
    def test_worked_three_qubit_example(self, three_qubit_state):
        got = marginals(sample(three_qubit_state, 0))
        np.testing.assert_allclose(got, [13 / 16, 3 / 16, 1 / 4], atol=1e-12)

    def test_all_zero_state(self):
        dist = SampleDistribution.from_probabilities({"00": 1.0})
        np.testing.assert_array_equal(marginals(dist), [0.0, 0.0])

    def test_symmetric_superposition(self):
        dist = SampleDistribution.from_probabilities({"01": 0.5, "10": 0.5})
        np.testing.assert_allclose(marginals(dist), [0.5, 0.5])


class TestArgmax:
    def test_worked_example(self, three_qubit_state):
        assert argmax_state(sample(three_qubit_state, 0)) == "100"

    def test_tie_break_lexicographic(self):
        dist = SampleDistribution.from_probabilities({"0": 0.5, "1": 0.5})
        assert argmax_state(dist) == "0"

    def test_empty_distribution_rejected(self):
        with pytest.raises(ValueError):
            SampleDistribution.from_probabilities({})


class TestSampleDistribution:
    def test_probability_sum_enforced(self):
        with pytest.raises(ValueError):
            SampleDistribution.from_probabilities({"0": 0.5, "1": 0.4})

    def test_bad_key_rejected(self):
        with pytest.raises(ValueError):
            SampleDistribution.from_probabilities({"0x": 1.0})
