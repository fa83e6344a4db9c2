"""The hybrid optimization loop and its per-evaluation record stream.

One "iteration" is one cost-function evaluation: every evaluation samples the
prepared state, computes the energy, and emits an IterationRecord, so the
optimizer's probing pattern is fully visible downstream.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import optimizers
from .quantum import (
    AnsatzSpec,
    Observable,
    SampleDistribution,
    _apply_pauli_string,
    argmax_state,
    evaluate_ansatz,
    marginals,
    sample,
)
from .qubo import (
    HamiltonianSequence,
    ising_to_observable,
    qubo_to_ising,
    with_transverse_field,
)

CONFIG_KEYS = (
    "reps",
    "entanglement",
    "optimizer_name",
    "sequence_length",
    "size",
    "description",
    "iterations",
    "nextpathid",
)
EXTENSION_KEYS = ("shots", "seed")
ENERGY_TOL = 1e-9


class RunCancelled(Exception):
    """Raised from a record callback to abort the run; partial data survives."""


@dataclass
class VqeConfig:
    """Session configuration, serialized with the canonical key names.

    shots == 0 selects exact mode (deterministic, default for tests); any
    positive value draws that many multinomial shots per evaluation.
    """

    size: int
    iterations: list[int] = field(default_factory=lambda: [128])
    reps: int = 1
    entanglement: str = "linear"
    optimizer_name: str = "cobyla"
    sequence_length: int = 1
    description: str = ""
    nextpathid: str = "1"
    shots: int = 0
    seed: int = 7
    h_x: float = 0.0
    initial_point: str = "zeros"
    optimizer_options: dict = field(default_factory=dict)
    osc_target: str | None = None  # host:port for live OSC emission
    api_url: str | None = None  # remote book service to POST datasets to
    serve: str | None = None  # host:port to host the book/session API on

    def __post_init__(self):
        self.iterations = [int(v) for v in self.iterations]
        if self.optimizer_name not in optimizers.OPTIMIZER_NAMES:
            raise ValueError(f"unknown optimizer {self.optimizer_name!r}")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.initial_point not in ("zeros", "random"):
            raise ValueError(f"unknown initial_point {self.initial_point!r}")

    def to_dict(self) -> dict:
        data = {key: getattr(self, key) for key in CONFIG_KEYS}
        for key in EXTENSION_KEYS:
            data[key] = getattr(self, key)
        # further extensions only when they deviate from the defaults, so a
        # plain config file round-trips with exactly the canonical keys
        if self.h_x:
            data["h_x"] = self.h_x
        if self.initial_point != "zeros":
            data["initial_point"] = self.initial_point
        if self.optimizer_options:
            data["optimizer_options"] = self.optimizer_options
        for key in ("osc_target", "api_url", "serve"):
            if getattr(self, key) is not None:
                data[key] = getattr(self, key)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "VqeConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VqeConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class IterationRecord:
    """Snapshot of one cost evaluation."""

    index: int
    params: np.ndarray
    energy: float
    distribution: SampleDistribution
    marginals: np.ndarray
    argmax: str


@dataclass
class ExperimentResult:
    """Everything one runvqe produced, ready for sonification or persistence."""

    config: VqeConfig
    sequence: HamiltonianSequence
    operators: list[str]
    records: list[IterationRecord]
    final_params: np.ndarray
    segment_boundaries: list[int]
    id: str = ""
    created_at: str = ""
    aborted: bool = False


def format_observable(obs: Observable) -> str:
    return " + ".join(f"({t.coefficient:+g})*{t.axes}" for t in obs.terms)


def _initial_parameters(cfg: VqeConfig, ansatz: AnsatzSpec) -> np.ndarray:
    if cfg.initial_point == "random":
        rng = np.random.default_rng(cfg.seed)
        return rng.uniform(-np.pi, np.pi, size=ansatz.parameter_count)
    return np.zeros(ansatz.parameter_count)


def run_vqe(
    obs: Observable,
    ansatz: AnsatzSpec,
    cfg: VqeConfig,
    initial_params,
    on_record: Callable[[IterationRecord], None] | None = None,
    budget: int | None = None,
    seed: int | None = None,
    index_offset: int = 0,
) -> tuple[list[IterationRecord], np.ndarray]:
    """Minimize one observable, emitting a record per cost evaluation."""
    if obs.n_qubits != ansatz.n_qubits:
        raise ValueError(
            f"observable acts on {obs.n_qubits} qubits, ansatz on {ansatz.n_qubits}"
        )
    budget = cfg.iterations[0] if budget is None else budget
    if budget < 1:
        raise ValueError("iteration budget must be >= 1")
    seed = cfg.seed if seed is None else seed
    x_terms = obs.x_terms()
    if x_terms and cfg.shots > 0:
        raise ValueError("transverse-field observables require exact mode (shots=0)")
    diagonal = obs.diagonal_part()
    records: list[IterationRecord] = []

    def cost(params: np.ndarray) -> float:
        state = evaluate_ansatz(ansatz, params)
        shot_seed = (seed * (1 << 20) + index_offset + len(records)) % (1 << 63)
        dist = sample(state, cfg.shots, seed=shot_seed)
        energy = float(dist.probs @ diagonal)
        for term in x_terms:
            energy += term.coefficient * float(
                np.vdot(
                    state.amplitudes,
                    _apply_pauli_string(state.amplitudes, term.axes),
                ).real
            )
        record = IterationRecord(
            index=index_offset + len(records),
            params=np.array(params),
            energy=energy,
            distribution=dist,
            marginals=marginals(dist),
            argmax=argmax_state(dist),
        )
        records.append(record)
        if on_record is not None:
            on_record(record)
        return energy

    outcome = optimizers.run_minimizer(
        cfg.optimizer_name, cost, initial_params, budget,
        seed=seed, options=cfg.optimizer_options,
    )
    return records, outcome.params


def run_sequence(
    seq: HamiltonianSequence,
    cfg: VqeConfig,
    on_record: Callable[[IterationRecord], None] | None = None,
    initial_params=None,
) -> ExperimentResult:
    """Chain the sequence: each entry starts from the previous final params.

    Entry 0 starts from the zero vector ("silence") unless the config asks
    for a seeded random point or explicit initial parameters are given.
    A RunCancelled raised by on_record stops the run and flags the result.
    """
    if cfg.sequence_length != len(seq.entries):
        raise ValueError(
            f"sequence_length={cfg.sequence_length} but {len(seq.entries)} entries"
        )
    if len(cfg.iterations) != len(seq.entries):
        raise ValueError("iterations list must cover every entry")
    if cfg.size != seq.n:
        raise ValueError(f"config size {cfg.size} != problem size {seq.n}")
    seq.budgets = list(cfg.iterations)
    ansatz = AnsatzSpec(seq.n, cfg.reps, cfg.entanglement)
    params = (
        np.asarray(initial_params, dtype=float)
        if initial_params is not None
        else _initial_parameters(cfg, ansatz)
    )
    all_records: list[IterationRecord] = []
    boundaries: list[int] = []
    operators: list[str] = []
    aborted = False
    for k, problem in enumerate(seq.entries):
        model = with_transverse_field(qubo_to_ising(problem), cfg.h_x)
        obs = ising_to_observable(model)
        operators.append(format_observable(obs))
        boundaries.append(len(all_records))

        def collect(record: IterationRecord) -> None:
            all_records.append(record)
            if on_record is not None:
                on_record(record)

        try:
            _, params = run_vqe(
                obs,
                ansatz,
                cfg,
                params,
                on_record=collect,
                budget=cfg.iterations[k],
                seed=cfg.seed + k,
                index_offset=len(all_records),
            )
        except RunCancelled:
            aborted = True
            break
    if not all_records:
        raise RunCancelled("run cancelled before any evaluation")
    return ExperimentResult(
        config=cfg,
        sequence=seq,
        operators=operators,
        records=all_records,
        final_params=np.array(params),
        segment_boundaries=boundaries,
        aborted=aborted,
    )
