"""Finite-shot readout with randomized local Pauli bases.

Each shot draws an independent uniform X/Y/Z basis per qubit and a joint
outcome from the Born distribution of the rotated state. On top of the raw
records sit the shadow estimator for weight-1/2 Paulis, local frequency
tables for 1- and 2-qubit subsets, and a Gaussian feature-noise shortcut.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._seeding import as_generator
from .features import FeatureMatrix
from .statevec import PauliObservable, StateVector

BASIS_LABELS = "XYZ"
CELL_LABELS = ("X+", "X-", "Y+", "Y-", "Z+", "Z-")

# default shot-noise scale for the Gaussian emulation shortcut
DEFAULT_NOISE_SIGMA = 10.0 ** -1.5

_SQ2 = 1.0 / math.sqrt(2.0)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_HSDG = _H @ np.diag([1.0, -1.0j])
# rotation taking the measured basis onto the computational Z axis
_ROT = np.stack([_H, _HSDG, np.eye(2, dtype=complex)])

# sampler tuning: stop shared-prefix branching at this live-group count, and
# switch to per-shot batches once the remaining dimension is this small
_GROUP_CAP = 300
_TAIL_CHUNK_ELEMS = 1 << 21


class NoMatchingShotsError(ValueError):
    """No shot matched the observable's basis pattern on its support."""


@dataclass
class ShotRecords:
    """Per-shot measured bases (0=X, 1=Y, 2=Z) and outcomes (+1/-1)."""

    bases: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        self.bases = np.asarray(self.bases, dtype=np.int8)
        self.outcomes = np.asarray(self.outcomes, dtype=np.int8)
        if self.bases.shape != self.outcomes.shape or self.bases.ndim != 2:
            raise ValueError("bases and outcomes must be matching (shots, qubits) arrays")

    @property
    def n_shots(self) -> int:
        return self.bases.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.bases.shape[1]

    def first(self, n: int) -> "ShotRecords":
        """Prefix of the shot stream; shots are i.i.d. so prefixes stay unbiased."""
        if not 1 <= n <= self.n_shots:
            raise ValueError("prefix length out of range")
        return ShotRecords(self.bases[:n], self.outcomes[:n])


RECORDS_MAGIC = b"QSHOT\x01"


def save_records(path, records: ShotRecords) -> None:
    """Pack records as one byte per (shot, qubit): 2*basis + (outcome < 0)."""
    cells = (records.bases.astype(np.uint8) * 2 + (records.outcomes < 0)).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(RECORDS_MAGIC)
        f.write(struct.pack("<IH", records.n_shots, records.n_qubits))
        f.write(cells.tobytes())


def load_records(path) -> ShotRecords:
    with open(path, "rb") as f:
        magic = f.read(len(RECORDS_MAGIC))
        if magic != RECORDS_MAGIC:
            raise ValueError("not a shot-record file")
        n_shots, n_qubits = struct.unpack("<IH", f.read(6))
        cells = np.frombuffer(f.read(), dtype=np.uint8).reshape(n_shots, n_qubits)
    bases = (cells // 2).astype(np.int8)
    outcomes = np.where(cells % 2 == 0, 1, -1).astype(np.int8)
    return ShotRecords(bases, outcomes)


def _sample_tail(
    phi: np.ndarray,
    idx: np.ndarray,
    q_top: int,
    bases: np.ndarray,
    outcomes: np.ndarray,
    rng: np.random.Generator,
) -> None:
    """Vectorized per-shot conditional sampling of qubits q_top..0 from a shared state."""
    dim = phi.size
    rows = max(1, _TAIL_CHUNK_ELEMS // dim)
    for lo in range(0, idx.size, rows):
        sub = idx[lo : lo + rows]
        states = np.tile(phi, (sub.size, 1))
        d = dim
        for q in range(q_top, -1, -1):
            h = d // 2
            a = states[:, :h]
            c = states[:, h:d]
            rot = _ROT[bases[sub, q]]
            top = rot[:, 0, 0, None] * a + rot[:, 0, 1, None] * c
            bot = rot[:, 1, 0, None] * a + rot[:, 1, 1, None] * c
            p_top = np.einsum("ij,ij->i", top.real, top.real) + np.einsum(
                "ij,ij->i", top.imag, top.imag
            )
            p_bot = np.einsum("ij,ij->i", bot.real, bot.real) + np.einsum(
                "ij,ij->i", bot.imag, bot.imag
            )
            flip = rng.random(sub.size) < p_bot / (p_top + p_bot)
            outcomes[sub, q] = np.where(flip, -1, 1)
            states = np.where(flip[:, None], bot, top)
            states /= np.sqrt(np.where(flip, p_bot, p_top))[:, None]
            d = h
    return None


def sample_shots(state: StateVector, n_shots: int, seed) -> ShotRecords:
    """Draw joint shot records from the randomized-basis measurement of a state.

    Sampling proceeds qubit by qubit via the conditional chain rule. Early
    qubits share rotated-state prefixes across shots (basis/outcome branches),
    late qubits run in vectorized per-shot batches; both paths draw from one
    generator in a fixed order, so results are reproducible given the seed.
    """
    if n_shots < 1:
        raise ValueError("need at least one shot")
    n = state.n_qubits
    norm = state.norm()
    if not math.isclose(norm, 1.0, abs_tol=1e-9):
        raise ValueError("state must be normalized")
    rng = as_generator(seed)
    bases = rng.integers(0, 3, size=(n_shots, n), dtype=np.int8)
    outcomes = np.empty((n_shots, n), dtype=np.int8)

    groups: list[tuple[np.ndarray, np.ndarray]] = [
        (state.amplitudes.astype(complex), np.arange(n_shots))
    ]
    q = n - 1
    dim = 1 << n
    while q >= 0 and dim > 2 and len(groups) * 6 <= _GROUP_CAP:
        half = dim // 2
        next_groups: list[tuple[np.ndarray, np.ndarray]] = []
        for phi, idx in groups:
            lane = bases[idx, q]
            for b in range(3):
                sel = idx[lane == b]
                if sel.size == 0:
                    continue
                rot = _ROT[b]
                top = rot[0, 0] * phi[:half] + rot[0, 1] * phi[half:]
                bot = rot[1, 0] * phi[:half] + rot[1, 1] * phi[half:]
                p_top = float(np.real(np.vdot(top, top)))
                p_bot = float(np.real(np.vdot(bot, bot)))
                flip = rng.random(sel.size) < p_bot / (p_top + p_bot)
                outcomes[sel, q] = np.where(flip, -1, 1)
                sel_top = sel[~flip]
                sel_bot = sel[flip]
                if sel_top.size:
                    next_groups.append((top / math.sqrt(p_top), sel_top))
                if sel_bot.size:
                    next_groups.append((bot / math.sqrt(p_bot), sel_bot))
        groups = next_groups
        q -= 1
        dim = half
    for phi, idx in groups:
        _sample_tail(phi, idx, q, bases, outcomes, rng)
    return ShotRecords(bases, outcomes)


def shadow_estimate(records: ShotRecords, obs: PauliObservable) -> float:
    """Unbiased estimate of <obs> from randomized-basis records.

    Averages 3^w * product(outcomes) over basis-matching shots, normalized by
    the total shot count (non-matching shots contribute zero).
    """
    codes = [BASIS_LABELS.index(ch) for ch in obs.label]
    mask = np.ones(records.n_shots, dtype=bool)
    for qubit, code in zip(obs.qubits, codes):
        if qubit < 0 or qubit >= records.n_qubits:
            raise ValueError(f"observable {obs.name} outside the record register")
        mask &= records.bases[:, qubit] == code
    matched = int(mask.sum())
    if matched == 0:
        raise NoMatchingShotsError(f"no shot matched bases of {obs.name}")
    prod = records.outcomes[mask, obs.qubits[0]].astype(np.int64)
    for qubit in obs.qubits[1:]:
        prod = prod * records.outcomes[mask, qubit]
    return float(3 ** obs.weight) * float(prod.sum()) / records.n_shots


@dataclass
class LocalFrequencies:
    """Empirical (basis, outcome) cell counts for a 1- or 2-qubit subset.

    Cell order per qubit is (X+, X-, Y+, Y-, Z+, Z-); a pair uses the tensor
    square of that order with the subset's first qubit as the major index.
    """

    subset: tuple[int, ...]
    counts: np.ndarray
    n_shots: int

    def __post_init__(self):
        self.subset = tuple(int(q) for q in self.subset)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        expected = 6 ** len(self.subset)
        if self.counts.shape != (expected,):
            raise ValueError(f"expected {expected} cells for subset {self.subset}")
        if self.counts.sum() != self.n_shots:
            raise ValueError("cell counts must sum to the shot count")

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_shots


def _cell_codes(records: ShotRecords, qubit: int) -> np.ndarray:
    return records.bases[:, qubit].astype(np.int64) * 2 + (records.outcomes[:, qubit] < 0)


def local_frequencies(
    records: ShotRecords, subsets: Sequence[tuple[int, ...]]
) -> list[LocalFrequencies]:
    """Frequency tables for a collection of disjoint 1- or 2-qubit subsets."""
    seen: set[int] = set()
    for subset in subsets:
        if len(subset) not in (1, 2):
            raise ValueError("subsets must have one or two qubits")
        for qubit in subset:
            if qubit in seen:
                raise ValueError(f"subsets overlap on qubit {qubit}")
            seen.add(qubit)
    out = []
    for subset in subsets:
        if len(subset) == 1:
            codes = _cell_codes(records, subset[0])
            counts = np.bincount(codes, minlength=6)
        else:
            codes = _cell_codes(records, subset[0]) * 6 + _cell_codes(records, subset[1])
            counts = np.bincount(codes, minlength=36)
        out.append(LocalFrequencies(tuple(subset), counts, records.n_shots))
    return out


def reduced_density(state: StateVector, subset: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a 1- or 2-qubit subset (first qubit = major index)."""
    n = state.n_qubits
    subset = tuple(int(q) for q in subset)
    if len(subset) not in (1, 2) or len(set(subset)) != len(subset):
        raise ValueError("subset must name one or two distinct qubits")
    if any(q < 0 or q >= n for q in subset):
        raise ValueError("subset outside the register")
    t = state.amplitudes.reshape([2] * n)
    axes = tuple(n - 1 - q for q in subset)
    t = np.moveaxis(t, axes, tuple(range(len(subset))))
    t = t.reshape((2 ** len(subset), -1))
    rho = t @ t.conj().T
    return rho


def cell_probabilities(state: StateVector, subset: Sequence[int]) -> np.ndarray:
    """Exact expected frequencies of the randomized-basis cells for a subset."""
    rho = reduced_density(state, subset)
    if rho.shape == (2, 2):
        probs = np.empty(6)
        for b in range(3):
            rot = _ROT[b]
            diag = np.real(np.diag(rot @ rho @ rot.conj().T))
            probs[2 * b : 2 * b + 2] = diag / 3.0
        return probs
    probs = np.empty(36)
    for b0 in range(3):
        for b1 in range(3):
            rot = np.kron(_ROT[b0], _ROT[b1])
            diag = np.real(np.diag(rot @ rho @ rot.conj().T)) / 9.0
            for o0 in range(2):
                for o1 in range(2):
                    probs[(2 * b0 + o0) * 6 + (2 * b1 + o1)] = diag[2 * o0 + o1]
    return probs


def gaussian_noise_features(fm: FeatureMatrix, sigma: float, seed) -> FeatureMatrix:
    """Add i.i.d. N(0, sigma^2) to every non-bias feature entry."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    values = fm.values.copy()
    if sigma > 0:
        rng = as_generator(seed)
        values[:, 1:] += rng.normal(0.0, sigma, size=values[:, 1:].shape)
    return FeatureMatrix(values, fm.names)
