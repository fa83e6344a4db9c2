"""QUBO problems, their spin-model compilation, and chord-design builders.

Conventions, fixed here and relied on everywhere else:

* A cost ``Q(n) = Σ_i a_i n_i + Σ_{i<j} b_ij n_i n_j`` sums each unordered
  pair once with the symmetric coefficient ``b_ij``.
* The spin image uses eigenvalues ``z_i = 1 - 2 n_i`` (bit 0 → +1, bit 1 → -1)
  and satisfies ``spin_energy(compile(q), x) = 4 · Q(x)`` exactly for every
  assignment x — a single global affine map with scale 4 and shift 0.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .quantum import Observable, PauliTerm, bitstring

AFFINE_SCALE = 4.0  # spin energy per unit of QUBO cost

CHROMATIC_LABELS = (
    "c", "c#", "d", "d#", "e", "f", "f#", "g", "g#", "a", "a#", "b",
)

DEFAULT_BUDGET = 128
BRUTE_FORCE_MAX_QUBITS = 20
_TIE_TOL = 1e-9


def _as_bits(assignment, n: int) -> np.ndarray:
    if isinstance(assignment, str):
        if len(assignment) != n or set(assignment) - {"0", "1"}:
            raise ValueError(f"bad assignment {assignment!r} for n={n}")
        return np.array([int(ch) for ch in assignment])
    bits = np.asarray(assignment, dtype=int).reshape(-1)
    if bits.shape[0] != n:
        raise ValueError(f"assignment length {bits.shape[0]} != {n}")
    return bits


@dataclass
class QuboProblem:
    """Labeled symmetric coefficient matrix: linear a_i, quadratic b_ij."""

    labels: list[str]
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.labels = list(self.labels)
        n = len(self.labels)
        if n == 0:
            raise ValueError("empty label list")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be unique")
        self.a = np.asarray(self.a, dtype=float).reshape(-1)
        self.b = np.asarray(self.b, dtype=float)
        if self.a.shape != (n,) or self.b.shape != (n, n):
            raise ValueError("coefficient shapes do not match labels")
        if not np.allclose(self.b, self.b.T, atol=1e-12):
            raise ValueError("b must be symmetric")
        if np.any(np.abs(np.diag(self.b)) > 1e-12):
            raise ValueError("b must have zero diagonal")

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass
class IsingModel:
    """Spin energy Σ α_i z_i + Σ_{i<j} β_ij z_i z_j + offset, with z = 1-2n.

    h_x is the transverse-field magnitude of the full operator (Pauli-X rows
    with coefficient -h_x); it does not enter the diagonal energy.
    """

    alpha: np.ndarray
    beta: np.ndarray  # strictly upper-triangular couplings
    h_x: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        self.beta = np.asarray(self.beta, dtype=float)
        n = self.alpha.shape[0]
        if self.beta.shape != (n, n):
            raise ValueError("beta shape does not match alpha")
        if np.any(np.abs(np.tril(self.beta)) > 0):
            raise ValueError("beta must be strictly upper-triangular")
        if self.h_x < 0:
            raise ValueError("h_x must be >= 0")

    @property
    def n(self) -> int:
        return self.alpha.shape[0]


@dataclass
class HamiltonianSequence:
    """Ordered QUBO problems sharing labels, with per-entry iteration budgets."""

    entries: list[QuboProblem]
    budgets: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("empty sequence")
        if not self.budgets:
            self.budgets = [DEFAULT_BUDGET] * len(self.entries)
        if len(self.budgets) != len(self.entries):
            raise ValueError("budgets length must match entries")
        first = self.entries[0]
        for entry in self.entries[1:]:
            if entry.labels != first.labels:
                raise ValueError("all entries must share labels")

    @property
    def n(self) -> int:
        return self.entries[0].n

    @property
    def labels(self) -> list[str]:
        return self.entries[0].labels


def qubo_value(q: QuboProblem, assignment) -> float:
    """Evaluate the cost at a bit assignment (string or 0/1 sequence)."""
    bits = _as_bits(assignment, q.n)
    upper = np.triu(q.b, k=1)
    return float(q.a @ bits + bits @ upper @ bits)


def qubo_to_ising(q: QuboProblem) -> IsingModel:
    """Compile to the spin model; diagonal energies equal 4·Q state-by-state."""
    alpha = -2.0 * q.a - q.b.sum(axis=1)
    beta = np.triu(q.b, k=1)
    offset = 2.0 * float(q.a.sum()) + float(beta.sum())
    return IsingModel(alpha=alpha, beta=beta, h_x=0.0, offset=offset)


def ising_energy(m: IsingModel, assignment) -> float:
    """Diagonal energy of a basis state (h_x plays no role here)."""
    bits = _as_bits(assignment, m.n)
    z = 1.0 - 2.0 * bits
    return float(m.alpha @ z + z @ m.beta @ z + m.offset)


def ising_to_observable(m: IsingModel) -> Observable:
    """Expand into weighted Pauli strings: I, Z, ZZ, then X rows for h_x."""
    n = m.n
    terms: list[PauliTerm] = []
    if m.offset != 0.0:
        terms.append(PauliTerm(m.offset, "I" * n))
    for i in range(n):
        if m.alpha[i] != 0.0:
            terms.append(PauliTerm(float(m.alpha[i]), _axes(n, {i: "Z"})))
    for i in range(n):
        for j in range(i + 1, n):
            if m.beta[i, j] != 0.0:
                terms.append(
                    PauliTerm(float(m.beta[i, j]), _axes(n, {i: "Z", j: "Z"}))
                )
    if m.h_x != 0.0:
        for i in range(n):
            terms.append(PauliTerm(-float(m.h_x), _axes(n, {i: "X"})))
    return Observable(n, tuple(terms))


def _axes(n: int, placed: dict[int, str]) -> str:
    return "".join(placed.get(i, "I") for i in range(n))


class GroundResult(NamedTuple):
    energy: float
    states: set[str]


def _all_assignments(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))) & 1).astype(float)


def brute_force_ground(problem) -> GroundResult:
    """Exhaustive minimum over basis states, returning every minimizer.

    Accepts a QuboProblem or a diagonal IsingModel.  Degeneracy is first
    class: ties within 1e-9 of the minimum are all reported.
    """
    if isinstance(problem, IsingModel):
        if problem.h_x != 0.0:
            raise ValueError("brute force enumerates diagonal energies only")
        n = problem.n
        if n > BRUTE_FORCE_MAX_QUBITS:
            raise ValueError(f"n={n} exceeds brute-force limit")
        z = 1.0 - 2.0 * _all_assignments(n)
        energies = z @ problem.alpha + ((z @ problem.beta) * z).sum(axis=1)
        energies += problem.offset
    elif isinstance(problem, QuboProblem):
        n = problem.n
        if n > BRUTE_FORCE_MAX_QUBITS:
            raise ValueError(f"n={n} exceeds brute-force limit")
        bits = _all_assignments(n)
        upper = np.triu(problem.b, k=1)
        energies = bits @ problem.a + ((bits @ upper) * bits).sum(axis=1)
    else:
        raise TypeError(f"cannot enumerate {type(problem).__name__}")
    best = float(energies.min())
    winners = np.flatnonzero(energies <= best + _TIE_TOL)
    return GroundResult(best, {bitstring(int(i), n) for i in winners})


def chord_qubo(labels, chord, mode: str = "linear", abar: float = 0.0) -> QuboProblem:
    """Cost function whose ground state plays exactly the chord's notes.

    linear mode rewards chord notes (a = -1) and penalizes the rest (a = +1).
    coupled mode puts +1 couplings across the chord boundary and -1 within
    either side, on every spin pair, with the corrective linear term
    a_k = -½ Σ_l b_kl + ā.  At ā = 0 the chord state and its bit-complement
    are exactly degenerate; ā > 0 favors the chord, ā < 0 the complement.
    """
    labels = list(labels)
    if not labels:
        raise ValueError("empty label list")
    n = len(labels)
    chord = set(chord)
    if not chord <= set(range(n)):
        raise ValueError("chord indices out of range")
    if mode == "linear":
        a = np.ones(n)
        for k in chord:
            a[k] = -1.0
        return QuboProblem(labels, a, np.zeros((n, n)))
    if mode != "coupled":
        raise ValueError(f"unknown mode {mode!r}")
    b = np.empty((n, n))
    member = np.array([k in chord for k in range(n)])
    b[:] = np.where(member[:, None] != member[None, :], 1.0, -1.0)
    np.fill_diagonal(b, 0.0)
    a = -0.5 * b.sum(axis=1) + abar
    return QuboProblem(labels, a, b)


def chord_bitstring(n: int, chord) -> str:
    return "".join("1" if i in set(chord) else "0" for i in range(n))


def adiabatic_sequence(
    q_init: QuboProblem, q_final: QuboProblem, steps: int, budgets=None
) -> HamiltonianSequence:
    """Linear interpolation (1-t)·initial + t·final over t = k/(steps-1)."""
    if q_init.labels != q_final.labels:
        raise ValueError("endpoint problems must share labels")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    entries = []
    for k in range(steps):
        t = k / (steps - 1)
        entries.append(
            QuboProblem(
                q_init.labels,
                (1.0 - t) * q_init.a + t * q_final.a,
                (1.0 - t) * q_init.b + t * q_final.b,
            )
        )
    return HamiltonianSequence(entries, list(budgets) if budgets else [])


def parse_h_setup(text: str) -> HamiltonianSequence:
    """Parse one or more CSV blocks into a Hamiltonian sequence.

    Each block is a header line ``h<k>,label_1,…,label_n`` followed by n rows
    of ``label_i,v_1,…,v_n``.  The matrix is symmetrized by averaging with its
    transpose; the diagonal carries the linear coefficients.
    """
    if not text.strip():
        raise ValueError("empty h_setup text")
    rows = [row for row in csv.reader(io.StringIO(text)) if any(c.strip() for c in row)]
    entries: list[QuboProblem] = []
    pos = 0
    while pos < len(rows):
        header = [c.strip() for c in rows[pos]]
        labels = header[1:]
        n = len(labels)
        if n == 0:
            raise ValueError(f"block header {header!r} carries no labels")
        if entries and labels != entries[0].labels:
            raise ValueError(
                f"block {len(entries) + 1} labels {labels!r} differ from "
                f"{entries[0].labels!r}"
            )
        if len(rows) - (pos + 1) < n:
            raise ValueError(
                f"block {len(entries) + 1} needs {n} rows, found {len(rows) - pos - 1}"
            )
        matrix = np.empty((n, n))
        for i in range(n):
            row = [c.strip() for c in rows[pos + 1 + i]]
            if len(row) != n + 1:
                raise ValueError(
                    f"row {row!r}: expected {n + 1} cells, got {len(row)}"
                )
            if row[0] != labels[i]:
                raise ValueError(
                    f"row label {row[0]!r} does not match header label {labels[i]!r}"
                )
            for j, cell in enumerate(row[1:]):
                try:
                    matrix[i, j] = float(cell)
                except ValueError:
                    raise ValueError(f"non-numeric cell {cell!r} in row {row[0]!r}")
        sym = 0.5 * (matrix + matrix.T)
        a = np.diag(sym).copy()
        b = sym.copy()
        np.fill_diagonal(b, 0.0)
        entries.append(QuboProblem(labels, a, b))
        pos += n + 1
    return HamiltonianSequence(entries)


def serialize_h_setup(seq: HamiltonianSequence) -> str:
    """Inverse of parse_h_setup (floats use shortest round-trip repr)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for k, q in enumerate(seq.entries):
        writer.writerow([f"h{k + 1}", *q.labels])
        matrix = q.b.copy()
        matrix[np.diag_indices(q.n)] = q.a
        for i in range(q.n):
            writer.writerow([q.labels[i], *[repr(float(v)) for v in matrix[i]]])
    return out.getvalue()


def with_transverse_field(m: IsingModel, h_x: float) -> IsingModel:
    return replace(m, h_x=float(h_x))
