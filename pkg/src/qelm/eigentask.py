"""Local eigentask analysis of randomized-basis frequency data.

For each measured subset, the dataset-average single-shot multinomial
covariance V and second-moment matrix G define a generalized eigenproblem
V h = beta^2 G h. Its solutions (eigentasks) are the linear readout features
ordered by noise-to-signal ratio beta^2 / S; low-NSR eigentasks survive shot
noise, high-NSR ones are cut. The module also provides the resolvable
expressive capacity of a basis and the feature scalings used at readout.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .features import FeatureMatrix

DEFAULT_RANK_TOL = 1e-10
DEFAULT_LAMBDA = 1.0

SCALING_MODES = ("unit", "nsr", "signal")

EIGENTASK_SCHEMA = "qelm.eigentasks/1"
CELL_ORDER_NOTE = "basis-major X+,X-,Y+,Y-,Z+,Z-; pairs: first qubit major"


def estimate_vg(freqs: np.ndarray, shots: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Estimate (V, G) for one subset from per-input frequency vectors.

    ``freqs`` is (inputs, cells). With ``shots`` given, the rows are treated as
    S-shot empirical frequencies and both moments are de-biased: V picks up the
    S/(S-1) multinomial correction and G subtracts V/S. With ``shots=None`` the
    rows are exact probabilities and no correction applies.
    """
    p = np.asarray(freqs, dtype=float)
    if p.ndim != 2 or p.shape[0] < 2:
        raise ValueError("need at least two input rows of frequencies")
    if not np.all(np.isfinite(p)) or np.any(p < -1e-12):
        raise ValueError("frequencies must be finite and non-negative")
    if not np.allclose(p.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("each frequency row must sum to 1")
    second = p.T @ p / p.shape[0]
    v = np.diag(p.mean(axis=0)) - second
    if shots is not None:
        if shots < 2:
            raise ValueError("finite-shot correction needs at least 2 shots")
        v = v * (shots / (shots - 1.0))
        g = second - v / shots
    else:
        g = second
    v = 0.5 * (v + v.T)
    g = 0.5 * (g + g.T)
    return v, g


@dataclass
class EigentaskBasis:
    """Eigentasks of one subset: NSR spectrum and G-orthonormal coefficients.

    ``nsr`` holds the beta^2 values in ascending order; ``coefficients`` holds
    the matching vectors as rows over the frequency cells. ``constant_index``
    marks the all-ones direction (zero shot noise, carries no signal about the
    input), or None when it has been filtered out.
    """

    subset: tuple[int, ...]
    nsr: np.ndarray
    coefficients: np.ndarray
    constant_index: int | None
    shots: int | None = None

    def __post_init__(self):
        self.subset = tuple(int(q) for q in self.subset)
        self.nsr = np.asarray(self.nsr, dtype=float)
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape[0] != self.nsr.shape[0]:
            raise ValueError("one coefficient row per eigentask required")
        if np.any(np.diff(self.nsr) < -1e-9):
            raise ValueError("NSR values must be ascending")

    @property
    def rank(self) -> int:
        return self.nsr.shape[0]

    @property
    def nontrivial_indices(self) -> np.ndarray:
        idx = np.arange(self.rank)
        if self.constant_index is None:
            return idx
        return idx[idx != self.constant_index]

    def nontrivial_nsr(self) -> np.ndarray:
        return self.nsr[self.nontrivial_indices]

    def retained_indices(self, shots: int, lam: float) -> np.ndarray:
        """Nontrivial eigentasks with beta^2 / shots strictly below lambda."""
        if lam <= 0:
            raise ValueError("lambda cutoff must be positive")
        idx = self.nontrivial_indices
        return idx[self.nsr[idx] / shots < lam]


def solve_eigentasks(
    v: np.ndarray,
    g: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
    subset: Sequence[int] = (),
    shots: int | None = None,
    max_rank: int | None = None,
) -> EigentaskBasis:
    """Solve V h = beta^2 G h on the numerical range of G.

    G eigendirections below rank_tol * max eigenvalue are null cells of the
    measurement and are discarded before inversion; the returned vectors are
    G-orthonormal with beta^2 ascending. ``max_rank`` additionally caps the
    retained range at the largest eigenvalues: sampled frequencies leak
    variance into directions the measurement cannot actually express, and the
    cap is how callers that know the structural rank (4 per qubit of the
    subset) cut that leakage off.
    """
    v = np.asarray(v, dtype=float)
    g = np.asarray(g, dtype=float)
    if v.shape != g.shape or v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("V and G must be square matrices of equal size")
    evals, evecs = np.linalg.eigh(0.5 * (g + g.T))
    top = float(evals.max(initial=0.0))
    if top <= 0.0:
        raise ValueError("G is numerically zero; no signal to analyze")
    keep = evals > rank_tol * top
    if max_rank is not None and int(keep.sum()) > max_rank:
        order = np.argsort(evals)  # ascending; keep the max_rank largest
        keep = np.zeros_like(keep)
        keep[order[-max_rank:]] = True
    if not np.any(keep):
        raise ValueError("G has no eigenvalues above the rank tolerance")
    basis = evecs[:, keep] / np.sqrt(evals[keep])
    reduced = basis.T @ v @ basis
    beta2, y = np.linalg.eigh(0.5 * (reduced + reduced.T))
    beta2 = np.clip(beta2, 0.0, None)
    coeffs = (basis @ y).T
    # the all-ones direction is an exact zero-noise eigentask of frequency data
    ones = np.ones(g.shape[0])
    overlap = np.abs(coeffs @ (g @ ones))
    constant_index = int(np.argmax(overlap))
    return EigentaskBasis(
        subset=tuple(subset),
        nsr=beta2,
        coefficients=coeffs,
        constant_index=constant_index,
        shots=shots,
    )


def apply_cutoff(basis: EigentaskBasis, shots: int, lam: float) -> EigentaskBasis:
    """Keep only the nontrivial eigentasks with beta^2 / shots < lambda."""
    idx = basis.retained_indices(shots, lam)
    return replace(
        basis,
        nsr=basis.nsr[idx],
        coefficients=basis.coefficients[idx],
        constant_index=None,
        shots=shots,
    )


@dataclass(frozen=True)
class RECReport:
    """Resolvable expressive capacity at a shot budget and cutoff."""

    shots: int
    lam: float
    n_total: int
    n_retained: int
    total_capacity: float
    cutoff_capacity: float


def rec(
    bases: "EigentaskBasis | Sequence[EigentaskBasis]", shots: int, lam: float = DEFAULT_LAMBDA
) -> RECReport:
    """Sum 1 / (1 + beta^2 / S) over nontrivial eigentasks, total and retained."""
    if isinstance(bases, EigentaskBasis):
        bases = [bases]
    if shots < 1:
        raise ValueError("shot budget must be positive")
    if lam <= 0:
        raise ValueError("lambda cutoff must be positive")
    beta2 = np.concatenate([b.nontrivial_nsr() for b in bases]) if bases else np.empty(0)
    weights = 1.0 / (1.0 + beta2 / shots)
    kept = beta2 / shots < lam
    return RECReport(
        shots=shots,
        lam=lam,
        n_total=int(beta2.size),
        n_retained=int(kept.sum()),
        total_capacity=float(weights.sum()),
        cutoff_capacity=float(weights[kept].sum()),
    )


def eigentask_values(freqs: np.ndarray, basis: EigentaskBasis, indices=None) -> np.ndarray:
    """Project frequency rows onto selected eigentasks (default: all nontrivial)."""
    p = np.asarray(freqs, dtype=float)
    if indices is None:
        indices = basis.nontrivial_indices
    return p @ basis.coefficients[indices].T


def basis_to_dict(basis: EigentaskBasis) -> dict:
    return {
        "schema": EIGENTASK_SCHEMA,
        "cell_order": CELL_ORDER_NOTE,
        "subset": list(basis.subset),
        "shots": basis.shots,
        "constant_index": basis.constant_index,
        "nsr": [float(x) for x in basis.nsr],
        "coefficients": [[float(x) for x in row] for row in basis.coefficients],
    }


def basis_from_dict(doc: dict) -> EigentaskBasis:
    if doc.get("schema") != EIGENTASK_SCHEMA:
        raise ValueError(f"unsupported eigentask schema: {doc.get('schema')!r}")
    return EigentaskBasis(
        subset=tuple(doc["subset"]),
        nsr=np.array(doc["nsr"], dtype=float),
        coefficients=np.array(doc["coefficients"], dtype=float),
        constant_index=doc["constant_index"],
        shots=doc["shots"],
    )


@dataclass
class FeatureScaling:
    """Per-feature affine scaling frozen on the training split.

    unit:   (r - mean) / sigma
    nsr:    unit, then multiplied by beta^(-1) / max beta^(-1)
    signal: unit, then multiplied by sigma / max sigma
    Zero-variance features are dropped with a warning under every mode.
    """

    mode: str
    kept: np.ndarray
    mean: np.ndarray
    sigma: np.ndarray
    multiplier: np.ndarray

    def apply(self, fm: FeatureMatrix) -> FeatureMatrix:
        raw = fm.values[:, 1:][:, self.kept]
        scaled = (raw - self.mean) / self.sigma * self.multiplier
        values = np.concatenate([fm.values[:, :1], scaled], axis=1)
        names = tuple(fm.names[i] for i in np.flatnonzero(self.kept))
        return FeatureMatrix(values, names)


def fit_scaling(fm: FeatureMatrix, mode: str, nsr: np.ndarray | None = None) -> FeatureScaling:
    """Fit a scaling on training features; reuse via FeatureScaling.apply."""
    if mode not in SCALING_MODES:
        raise ValueError(f"unknown scaling mode {mode!r}")
    raw = fm.values[:, 1:]
    mean = raw.mean(axis=0)
    sigma = raw.std(axis=0)
    # a constant column can show std ~ 1e-16 from accumulated rounding
    kept = sigma > 1e-9 * np.maximum(1.0, np.abs(mean))
    if not np.all(kept):
        warnings.warn(
            f"dropping {int((~kept).sum())} zero-variance feature(s) before scaling",
            stacklevel=2,
        )
    if mode == "nsr":
        if nsr is None or len(nsr) != raw.shape[1]:
            raise ValueError("nsr mode needs one beta^2 value per feature")
        inv_beta = 1.0 / np.sqrt(np.maximum(np.asarray(nsr, dtype=float)[kept], 1e-300))
        multiplier = inv_beta / inv_beta.max() if inv_beta.size else inv_beta
    elif mode == "signal":
        sig = sigma[kept]
        multiplier = sig / sig.max() if sig.size else sig
    else:
        multiplier = np.ones(int(kept.sum()))
    return FeatureScaling(
        mode=mode, kept=kept, mean=mean[kept], sigma=sigma[kept], multiplier=multiplier
    )


def scale_features(
    fm: FeatureMatrix,
    mode: str,
    scaling: FeatureScaling | None = None,
    nsr: np.ndarray | None = None,
) -> tuple[FeatureMatrix, FeatureScaling]:
    """Scale features, fitting on this matrix unless a frozen scaling is given."""
    if scaling is None:
        scaling = fit_scaling(fm, mode, nsr=nsr)
    elif scaling.mode != mode:
        raise ValueError("scaling was fitted under a different mode")
    return scaling.apply(fm), scaling
