"""Minimal n-qubit statevector simulator for hardware-efficient circuits.

Bit ordering is big-endian throughout: qubit 0 is the leftmost character of a
bitstring and the most significant bit of a basis-state index.  All functions
are pure; sampling takes an explicit seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
PROB_SUM_TOL = 1e-9

ENTANGLEMENTS = ("linear", "circular", "full")


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def bit_index(bits: str) -> int:
    return int(bits, 2)


@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitudes over the 2^n computational basis."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"statevector norm² = {norm!r}, not 1")
        object.__setattr__(self, "amplitudes", amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class AnsatzSpec:
    """Alternating RY+RZ rotation layers with CX entangling blocks.

    The circuit applies reps+1 rotation layers with an entangling block after
    each one except the last.  Parameters are laid out layer-major: within
    layer L, indices [2nL, 2nL+n) hold the RY angles by qubit and
    [2nL+n, 2nL+2n) the RZ angles.  This layout is load-bearing: chord
    progressions reuse raw parameter vectors across runs.
    """

    n_qubits: int
    reps: int = 1
    entanglement: str = "linear"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.reps < 0:
            raise ValueError("reps must be >= 0")
        if self.entanglement not in ENTANGLEMENTS:
            raise ValueError(f"unknown entanglement {self.entanglement!r}")

    @property
    def parameter_count(self) -> int:
        return 2 * self.n_qubits * (self.reps + 1)

    def entangler_pairs(self) -> list[tuple[int, int]]:
        n = self.n_qubits
        if self.entanglement == "full":
            return [(i, j) for i in range(n) for j in range(i + 1, n)]
        pairs = [(i, i + 1) for i in range(n - 1)]
        if self.entanglement == "circular" and n > 1:
            pairs.append((n - 1, 0))
        return pairs


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def _apply_1q(psi: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    # psi has shape (2,)*n with axis q = qubit q
    out = np.tensordot(gate, psi, axes=([1], [qubit]))
    return np.moveaxis(out, 0, qubit)


def _apply_cx(psi: np.ndarray, control: int, target: int) -> np.ndarray:
    n = psi.ndim
    out = psi.copy()
    i10 = [slice(None)] * n
    i11 = [slice(None)] * n
    i10[control], i10[target] = 1, 0
    i11[control], i11[target] = 1, 1
    out[tuple(i10)], out[tuple(i11)] = psi[tuple(i11)], psi[tuple(i10)]
    return out


def evaluate_ansatz(spec: AnsatzSpec, params) -> StateVector:
    """Run the parameterized circuit on |0…0⟩ and return the statevector."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != spec.parameter_count:
        raise ValueError(
            f"expected {spec.parameter_count} parameters, got {params.shape[0]}"
        )
    n = spec.n_qubits
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    pairs = spec.entangler_pairs()
    for layer in range(spec.reps + 1):
        base = 2 * n * layer
        for q in range(n):
            psi = _apply_1q(psi, _ry(params[base + q]), q)
        for q in range(n):
            psi = _apply_1q(psi, _rz(params[base + n + q]), q)
        if layer < spec.reps:
            for control, target in pairs:
                psi = _apply_cx(psi, control, target)
    return StateVector(n, psi.reshape(-1))


@dataclass(frozen=True)
class PauliTerm:
    """One weighted tensor product over {I, Z, X}; leftmost axis = qubit 0."""

    coefficient: float
    axes: str

    def __post_init__(self):
        if set(self.axes) - set("IZX"):
            raise ValueError(f"axes must be over I/Z/X, got {self.axes!r}")

    @property
    def is_diagonal(self) -> bool:
        return "X" not in self.axes


@dataclass(frozen=True)
class Observable:
    n_qubits: int
    terms: tuple[PauliTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if len(term.axes) != self.n_qubits:
                raise ValueError(
                    f"term {term.axes!r} does not act on {self.n_qubits} qubits"
                )

    def diagonal_part(self) -> np.ndarray:
        """Eigenvalues of the Z/I terms on each basis state (length 2^n)."""
        dim = 2**self.n_qubits
        diag = np.zeros(dim)
        for term in self.terms:
            if not term.is_diagonal:
                continue
            eig = np.full(dim, term.coefficient)
            for i, ax in enumerate(term.axes):
                if ax == "Z":
                    eig *= _z_eigenvalues(self.n_qubits, i)
            diag += eig
        return diag

    def x_terms(self) -> tuple[PauliTerm, ...]:
        return tuple(t for t in self.terms if not t.is_diagonal)


def _z_eigenvalues(n: int, qubit: int) -> np.ndarray:
    bits = (np.arange(2**n) >> (n - 1 - qubit)) & 1
    return 1.0 - 2.0 * bits


def _apply_pauli_string(amps: np.ndarray, axes: str) -> np.ndarray:
    n = len(axes)
    psi = amps.reshape((2,) * n)
    for i, ax in enumerate(axes):
        if ax == "X":
            psi = np.flip(psi, axis=i)
        elif ax == "Z":
            idx = [slice(None)] * n
            idx[i] = 1
            psi = psi.copy()
            psi[tuple(idx)] *= -1.0
    return psi.reshape(-1)


def expectation(state: StateVector, obs: Observable) -> float:
    """Exact ⟨ψ|H|ψ⟩; X-bearing terms are applied to a copy of the state."""
    if state.n_qubits != obs.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, observable {obs.n_qubits}"
        )
    value = complex(np.dot(state.probabilities(), obs.diagonal_part()))
    for term in obs.x_terms():
        value += term.coefficient * np.vdot(
            state.amplitudes, _apply_pauli_string(state.amplitudes, term.axes)
        )
    if abs(value.imag) >= PROB_SUM_TOL:
        raise ValueError(f"expectation has imaginary residue {value.imag!r}")
    return float(value.real)


@dataclass(frozen=True)
class SampleDistribution:
    """Probabilities over basis bitstrings, stored densely by basis index.

    shots == 0 marks exact mode: the probabilities are |amplitude|² rather
    than an empirical multinomial estimate.
    """

    n_qubits: int
    shots: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if probs.shape[0] != 2**self.n_qubits:
            raise ValueError(
                f"expected {2**self.n_qubits} probabilities, got {probs.shape[0]}"
            )
        if np.any(probs < -1e-12):
            raise ValueError("negative probability")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_probabilities(
        cls, mapping: dict[str, float], shots: int = 0
    ) -> "SampleDistribution":
        if not mapping:
            raise ValueError("empty distribution")
        n = len(next(iter(mapping)))
        probs = np.zeros(2**n)
        for bits, p in mapping.items():
            if len(bits) != n or set(bits) - {"0", "1"}:
                raise ValueError(f"bad bitstring key {bits!r}")
            probs[bit_index(bits)] = p
        return cls(n, shots, probs)

    @property
    def probabilities(self) -> dict[str, float]:
        """Map of nonzero-probability bitstrings (zeros are omitted)."""
        n = self.n_qubits
        return {
            bitstring(i, n): float(p) for i, p in enumerate(self.probs) if p > 0.0
        }


def sample(state: StateVector, shots: int, seed: int = 0) -> SampleDistribution:
    """Multinomial draw from |amplitude|²; shots == 0 returns the exact law."""
    if shots < 0:
        raise ValueError("shots must be >= 0")
    probs = state.probabilities()
    probs = probs / probs.sum()
    if shots == 0:
        return SampleDistribution(state.n_qubits, 0, probs)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return SampleDistribution(state.n_qubits, shots, counts / shots)


def marginals(dist: SampleDistribution) -> np.ndarray:
    """Per-qubit P(|1⟩): element i sums probabilities of strings with bit i set."""
    n = dist.n_qubits
    tensor = dist.probs.reshape((2,) * n)
    out = np.empty(n)
    for i in range(n):
        other = tuple(j for j in range(n) if j != i)
        out[i] = tensor.sum(axis=other)[1]
    return out


def argmax_state(dist: SampleDistribution) -> str:
    """Most probable bitstring; ties resolve to the lexicographically smallest."""
    # big-endian indexing makes lexicographic order equal numeric order,
    # and np.argmax returns the first maximal index
    return bitstring(int(np.argmax(dist.probs)), dist.n_qubits)
