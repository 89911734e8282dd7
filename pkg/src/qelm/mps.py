"""Matrix-product-state compression probe.

Converts statevectors to left-canonical MPS form by successive SVDs with a
hard bond-dimension cap, and finds the smallest cap that keeps fidelity above
a floor. Used as a classical-simulability objective during tuning.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevec import StateVector

# relative floor below which singular values count as exact zeros
_SV_TOL = 1e-12

DEFAULT_FIDELITY_FLOOR = 1.0 - 5e-4


@dataclass
class MPSState:
    """Left-canonical site tensors (chi_left, 2, chi_right) with unit norm."""

    n_qubits: int
    tensors: list[np.ndarray]

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return tuple(t.shape[2] for t in self.tensors[:-1])

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims) if self.bond_dims else 1


def to_mps(state: StateVector, chi_max: int) -> MPSState:
    """Split the state site by site, keeping at most chi_max singular values per cut."""
    if chi_max < 1:
        raise ValueError("chi_max must be at least 1")
    n = state.n_qubits
    # reorder axes so site s corresponds to qubit s
    t = state.amplitudes.reshape([2] * n).transpose(tuple(range(n - 1, -1, -1)))
    tensors: list[np.ndarray] = []
    chi = 1
    m = t.reshape(2, -1)
    for _ in range(n - 1):
        u, s, vt = np.linalg.svd(m, full_matrices=False)
        if s[0] <= 0.0:
            keep = 1
        else:
            keep = min(chi_max, int(np.sum(s > s[0] * _SV_TOL)))
        tensors.append(u[:, :keep].reshape(chi, 2, keep))
        m = (s[:keep, None] * vt[:keep]).reshape(keep * 2, -1)
        chi = keep
    last = m.reshape(chi, 2, 1)
    norm = np.linalg.norm(last)
    if norm > 0:
        last = last / norm
    tensors.append(last)
    return MPSState(n, tensors)


def reconstruct(mps: MPSState) -> StateVector:
    """Contract the MPS back to a dense statevector."""
    v = mps.tensors[0].reshape(2, -1)
    for t in mps.tensors[1:]:
        v = np.einsum("ac,cdb->adb", v, t).reshape(v.shape[0] * 2, -1)
    n = mps.n_qubits
    amps = v.reshape([2] * n).transpose(tuple(range(n - 1, -1, -1))).reshape(-1)
    return StateVector(n, amps)


def fidelity(mps: MPSState, state: StateVector) -> float:
    """|<mps|state>|^2 with both sides normalized."""
    if mps.n_qubits != state.n_qubits:
        raise ValueError("qubit counts differ")
    overlap = np.vdot(reconstruct(mps).amplitudes, state.amplitudes)
    return float(np.abs(overlap) ** 2)


def min_bond_dimension(
    state: StateVector, fidelity_floor: float = DEFAULT_FIDELITY_FLOOR
) -> int:
    """Smallest chi whose truncated MPS keeps fidelity at or above the floor."""
    if not 0.0 < fidelity_floor <= 1.0:
        raise ValueError("fidelity floor must be in (0, 1]")
    lo, hi = 1, 1 << (state.n_qubits // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if fidelity(to_mps(state, mid), state) >= fidelity_floor:
            hi = mid
        else:
            lo = mid + 1
    return lo
