"""Independent oracles used by the test suite.

Everything here is deliberately written against plain dense linear algebra
(no code under test beyond dataclass containers), so that agreement between
a module and its oracle is meaningful.
"""
from __future__ import annotations

import numpy as np

from qelm.circuit import BoundCircuit
from qelm.statevec import StateVector

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_DENSE = {"X": X, "Y": Y, "Z": Z}


def taylor_expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring over a plain Taylor series."""
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, 1)
    squarings = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    small = a / (2**squarings)
    term = np.eye(a.shape[0], dtype=complex)
    total = term.copy()
    for k in range(1, 60):
        term = term @ small / k
        total += term
        if np.abs(term).max() < 1e-20:
            break
    for _ in range(squarings):
        total = total @ total
    return total


def block_unitary_oracle(coupling: float, longitudinal: float, kick: float) -> np.ndarray:
    """exp(-i b (X1+X2)) exp(-i (J Z Z + h (Z1+Z2))) via the Taylor oracle."""
    zz = np.kron(Z, Z)
    z1 = np.kron(Z, I2) + np.kron(I2, Z)
    x1 = np.kron(X, I2) + np.kron(I2, X)
    return taylor_expm(-1j * kick * x1) @ taylor_expm(-1j * (coupling * zz + longitudinal * z1))


def embed_pair_gate(gate4: np.ndarray, qa: int, qb: int, n: int) -> np.ndarray:
    """Lift a two-qubit gate to the full register (qubit 0 = least significant bit).

    The gate's 4-dim index is 2*o_a + o_b, matching the block convention.
    """
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=complex)
    clear = ~((1 << qa) | (1 << qb))
    for s in range(dim):
        oa = (s >> qa) & 1
        ob = (s >> qb) & 1
        base = s & clear
        col = 2 * oa + ob
        for oa2 in range(2):
            for ob2 in range(2):
                row_state = base | (oa2 << qa) | (ob2 << qb)
                full[row_state, s] += gate4[2 * oa2 + ob2, col]
    return full


def dense_circuit_matrix(bound: BoundCircuit, block_gate) -> np.ndarray:
    """Full 2^N x 2^N matrix of a bound circuit; block_gate(params) -> 4x4."""
    n = bound.n_qubits
    total = np.eye(1 << n, dtype=complex)
    for layer in bound.layers:
        for (qa, qb), params in zip(layer.pairs, layer.blocks):
            total = embed_pair_gate(block_gate(params), qa, qb, n) @ total
    return total


def pauli_dense(label: str, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Dense matrix of a Pauli string on the full register."""
    full = np.eye(1 << n, dtype=complex)
    for ch, q in zip(label, qubits):
        factors = [I2] * n
        factors[q] = PAULI_DENSE[ch]
        op = factors[-1]
        for f in reversed(factors[:-1]):
            op = np.kron(op, f)
        full = full @ op
    return full


def dense_expect(state: StateVector, label: str, qubits: tuple[int, ...]) -> float:
    op = pauli_dense(label, qubits, state.n_qubits)
    return float(np.real(np.vdot(state.amplitudes, op @ state.amplitudes)))


def random_state(n_qubits: int, seed: int) -> StateVector:
    """Normalized state with i.i.d. complex normal amplitudes."""
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return StateVector(n_qubits, amps / np.linalg.norm(amps))


def gd_ridge(features: np.ndarray, targets: np.ndarray, lam: float, tol: float = 1e-12,
             max_iters: int = 200_000) -> np.ndarray:
    """Ridge weights via steepest descent with exact line search.

    Matches the production objective: squared error plus lam * ||w||^2 with
    the bias weight (column 0) left unpenalized.
    """
    r = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    penalty = np.full(r.shape[1], lam)
    penalty[0] = 0.0
    gram = r.T @ r + np.diag(penalty)
    rhs = r.T @ y
    w = np.zeros(r.shape[1] if y.ndim == 1 else (r.shape[1], y.shape[1]))
    for _ in range(max_iters):
        grad = gram @ w - rhs
        gnorm = float(np.sum(grad * grad))
        if gnorm < tol * tol:
            break
        step = gnorm / float(np.sum(grad * (gram @ grad)))
        w = w - step * grad
    return w


def brute_force_front(values: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Boolean non-dominated mask by O(n^2) pairwise comparison.

    directions: +1 to maximize, -1 to minimize, per objective.
    """
    v = np.asarray(values, dtype=float) * np.asarray(directions, dtype=float)
    n = v.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j and np.all(v[j] >= v[i]) and np.any(v[j] > v[i]):
                keep[i] = False
                break
    return keep


def brute_force_ranks(values: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Front index per trial by repeatedly peeling the brute-force front."""
    values = np.asarray(values, dtype=float)
    ranks = np.full(values.shape[0], -1)
    remaining = np.arange(values.shape[0])
    level = 0
    while remaining.size:
        mask = brute_force_front(values[remaining], directions)
        ranks[remaining[mask]] = level
        remaining = remaining[~mask]
        level += 1
    return ranks


def schmidt_fidelity_cap(state: StateVector, cut: int, chi: int) -> float:
    """Best possible overlap^2 when rank-chi truncating a single cut.

    Eckart-Young: sum of the chi largest squared singular values across the
    bipartition (qubits < cut) | (qubits >= cut).
    """
    n = state.n_qubits
    mat = state.amplitudes.reshape(2 ** (n - cut), 2**cut)
    sq = np.sort(np.linalg.svd(mat, compute_uv=False) ** 2)[::-1]
    return float(np.sum(sq[:chi]) / np.sum(sq))
