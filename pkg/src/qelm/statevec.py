"""Exact statevector simulation of bound circuits and Pauli expectation readout.

Convention: qubit 0 is the least significant bit of the basis-state index, so
amplitude index sum(bit_q * 2**q) addresses the configuration (bit_0, bit_1, ...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import BoundCircuit, CircuitSpec, bind_input, block_unitary
from .features import FeatureMatrix

DEFAULT_QUBIT_CAP = 16

PAULI = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

WEIGHT2_LABELS = tuple(a + b for a in "XYZ" for b in "XYZ")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude length must be 2**n_qubits")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class PauliObservable:
    """A weight-1 or weight-2 Pauli, e.g. X on qubit 3 or ZZ on the (5, 6) bond."""

    label: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.label) != len(self.qubits) or len(self.label) not in (1, 2):
            raise ValueError("observable must be weight-1 or weight-2")
        if any(ch not in PAULI for ch in self.label):
            raise ValueError(f"unsupported Pauli label {self.label!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("observable qubits must be distinct")

    @property
    def weight(self) -> int:
        return len(self.qubits)

    @property
    def name(self) -> str:
        if self.weight == 1:
            return f"{self.label}@{self.qubits[0]}"
        return f"{self.label}@{self.qubits[0]}-{self.qubits[1]}"


def weight1_observables(n_qubits: int) -> list[PauliObservable]:
    """X, Y, Z on every qubit."""
    return [PauliObservable(l, (q,)) for q in range(n_qubits) for l in "XYZ"]


def weight2_observables(
    n_qubits: int, labels: Sequence[str] = ("XX", "YY", "ZZ")
) -> list[PauliObservable]:
    """Two-qubit Paulis on every nearest-neighbour ring bond."""
    return [
        PauliObservable(l, (q, (q + 1) % n_qubits))
        for q in range(n_qubits)
        for l in labels
    ]


def tuning_observables(n_qubits: int) -> list[PauliObservable]:
    """Default readout set: all weight-1 Paulis plus XX, YY, ZZ correlators."""
    return weight1_observables(n_qubits) + weight2_observables(n_qubits)


def full_observables(n_qubits: int) -> list[PauliObservable]:
    """Replication set: all weight-1 plus the full 9-label weight-2 bond set."""
    return weight1_observables(n_qubits) + weight2_observables(n_qubits, WEIGHT2_LABELS)


_BELL_PAIR = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)


def init_bell_chain(n_qubits: int, max_qubits: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """Product of Bell pairs (|00> + |11>)/sqrt(2) on qubits (0,1), (2,3), ..."""
    if n_qubits < 2 or n_qubits % 2:
        raise ValueError("Bell chain needs an even qubit count of at least 2")
    if n_qubits > max_qubits:
        raise ValueError(
            f"{n_qubits} qubits exceeds the cap of {max_qubits}; raise max_qubits explicitly"
        )
    amps = _BELL_PAIR
    for _ in range(n_qubits // 2 - 1):
        amps = np.kron(_BELL_PAIR, amps)
    return StateVector(n_qubits, amps)


def _apply_single(amps: np.ndarray, gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    view = amps.reshape(-1, 2, 1 << qubit)
    return np.einsum("ab,xbz->xaz", gate, view).reshape(-1)


def _apply_pair(amps: np.ndarray, gate: np.ndarray, qa: int, qb: int, n: int) -> np.ndarray:
    # gate rows/cols indexed by 2*o_a + o_b
    t = amps.reshape([2] * n)
    axes = (n - 1 - qa, n - 1 - qb)
    t = np.moveaxis(t, axes, (0, 1))
    g4 = gate.reshape(2, 2, 2, 2)
    t = np.einsum("abcd,cd...->ab...", g4, t)
    t = np.moveaxis(t, (0, 1), axes)
    return np.ascontiguousarray(t).reshape(-1)


def apply_circuit(state: StateVector, bound: BoundCircuit) -> StateVector:
    """Propagate the state through every layer of a bound circuit."""
    if state.n_qubits != bound.n_qubits:
        raise ValueError("state and circuit disagree on qubit count")
    amps = state.amplitudes
    n = state.n_qubits
    for layer in bound.layers:
        for (qa, qb), params in zip(layer.pairs, layer.blocks):
            amps = _apply_pair(amps, block_unitary(params), qa, qb, n)
    return StateVector(n, amps)


def _check_support(obs: PauliObservable, n: int) -> None:
    if any(q < 0 or q >= n for q in obs.qubits):
        raise ValueError(f"observable {obs.name} outside the {n}-qubit register")
    if obs.weight == 2:
        qa, qb = obs.qubits
        if (qa - qb) % n not in (1, n - 1):
            raise ValueError(f"weight-2 support {obs.qubits} is not a ring bond")


def expect(state: StateVector, obs: PauliObservable) -> float:
    """Exact expectation value of a Pauli observable."""
    _check_support(obs, state.n_qubits)
    amps = state.amplitudes
    phi = amps
    for label, qubit in zip(obs.label, obs.qubits):
        phi = _apply_single(phi, PAULI[label], qubit, state.n_qubits)
    return float(np.real(np.vdot(amps, phi)))


def expectations(state: StateVector, observables: Iterable[PauliObservable]) -> np.ndarray:
    """Expectation values of many observables, sharing single-Pauli applications.

    Uses <psi|P_a Q_b|psi> = <P_a psi|Q_b psi> for commuting supports, so each
    (qubit, label) pair is applied to the state only once.
    """
    amps = state.amplitudes
    n = state.n_qubits
    cache: dict[tuple[int, str], np.ndarray] = {}

    def pauli_vec(qubit: int, label: str) -> np.ndarray:
        key = (qubit, label)
        if key not in cache:
            cache[key] = _apply_single(amps, PAULI[label], qubit, n)
        return cache[key]

    observables = list(observables)
    out = np.empty(len(observables))
    for i, obs in enumerate(observables):
        _check_support(obs, n)
        if obs.weight == 1:
            v = np.vdot(amps, pauli_vec(obs.qubits[0], obs.label[0]))
        else:
            v = np.vdot(
                pauli_vec(obs.qubits[0], obs.label[0]),
                pauli_vec(obs.qubits[1], obs.label[1]),
            )
        out[i] = v.real
    return out


def run_circuit(spec: CircuitSpec, u: np.ndarray, max_qubits: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """Bell-chain init, bind the input, and propagate."""
    state = init_bell_chain(spec.n_qubits, max_qubits=max_qubits)
    return apply_circuit(state, bind_input(spec, u))


def feature_row(
    spec: CircuitSpec,
    u: np.ndarray,
    observables: Sequence[PauliObservable],
    max_qubits: int = DEFAULT_QUBIT_CAP,
) -> np.ndarray:
    """Bias 1 followed by the exact expectation of every observable."""
    state = run_circuit(spec, u, max_qubits=max_qubits)
    return np.concatenate([[1.0], expectations(state, observables)])


def feature_matrix(
    spec: CircuitSpec,
    inputs: np.ndarray,
    observables: Sequence[PauliObservable],
    max_qubits: int = DEFAULT_QUBIT_CAP,
) -> FeatureMatrix:
    """Feature rows for a batch of inputs, with observable names attached."""
    observables = list(observables)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2:
        raise ValueError("inputs must be a (samples, d) array")
    values = np.empty((inputs.shape[0], 1 + len(observables)))
    for i, u in enumerate(inputs):
        values[i] = feature_row(spec, u, observables, max_qubits=max_qubits)
    return FeatureMatrix(values, tuple(o.name for o in observables))
