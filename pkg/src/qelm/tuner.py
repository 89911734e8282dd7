"""Multi-objective random search over the reservoir hyperparameters.

Each trial draws (a_in, b0, db, h0, dh, J0, dJ) uniformly inside the bounds,
then scores the setting on up to four objectives averaged over independent
realizations and over the configured architectures:

  narma_score_noiseless  cumulative test R^2 over NARMA orders 1..N/2
  narma_score_noisy      same with Gaussian readout noise emulating shots
  bond_dimension         median MPS bond dimension needed at high fidelity
  variability            mean input-variance of the observable expectations

The trial store is one JSON file per trial plus an index, written
incrementally so an interrupted search resumes where it stopped.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

import numpy as np

from ._seeding import rng_at, subseed
from .circuit import HyperParams, LayerSchedule, sample_circuit
from .measurement import DEFAULT_NOISE_SIGMA, gaussian_noise_features
from .mps import DEFAULT_FIDELITY_FLOOR, min_bond_dimension
from .readout import DEFAULT_RIDGE_REGRESSION, fit_ridge, r_squared
from .statevec import feature_matrix, run_circuit, tuning_observables
from .tasks import gen_narma, narma_targets, narma_windows

DEFAULT_ARCHITECTURES = ((8, 4), (10, 8))
DEFAULT_REALIZATIONS = 10
OBJECTIVE_NAMES = (
    "narma_score_noiseless",
    "narma_score_noisy",
    "bond_dimension",
    "variability",
)
H0_FLOOR = 0.1
TRIAL_STORE_SCHEMA = "qelm.trials/1"

# sampler bounds: (low, high], generous around the operating point
DEFAULT_BOUNDS = {
    "input_strength": (0.0, 1.0),
    "kick_mean": (-1.5, 1.5),
    "kick_std": (0.0, 0.2),
    "field_mean": (H0_FLOOR, 1.5),
    "field_std": (0.0, 0.2),
    "coupling_mean": (-1.5, 1.5),
    "coupling_std": (0.0, 0.2),
}


def narma_score(
    hp: HyperParams,
    n_qubits: int,
    n_layers: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> float:
    """Cumulative test R^2 over NARMA orders 1..N/2 for one reservoir draw.

    One input sequence per call, shared across orders; targets are recomputed
    per order from the same raw inputs. Negative per-order R^2 counts as-is.
    """
    schedule = LayerSchedule.standard(n_qubits, n_layers=n_layers)
    spec = sample_circuit(hp, schedule)
    obs = tuning_observables(n_qubits)
    window = n_qubits // 2
    base = gen_narma(1, window=window, seed=seed)
    ds0 = narma_windows(base)
    fm_train = feature_matrix(spec, ds0.train[0], obs)
    fm_test = feature_matrix(spec, ds0.test[0], obs)
    if noise_sigma > 0.0:
        fm_train = gaussian_noise_features(fm_train, noise_sigma, subseed(seed, 20, 0))
        fm_test = gaussian_noise_features(fm_test, noise_sigma, subseed(seed, 20, 1))
    score = 0.0
    for order in range(1, window + 1):
        y = narma_targets(base.inputs, order)
        seq = dataclasses.replace(base, order=order, targets=y)
        ds = narma_windows(seq)
        model = fit_ridge(fm_train, ds.train[1], DEFAULT_RIDGE_REGRESSION)
        score += r_squared(ds.test[1], model.predict(fm_test))
    return float(score)


def variability(
    hp: HyperParams,
    n_qubits: int,
    n_layers: int,
    n_samples: int = 64,
    seed: int = 0,
) -> float:
    """Mean over the default observables of Var_u[<R_i>], u ~ Unif(-1,1)^d.

    Monte-Carlo estimate with n_samples input draws; the bias pseudo-feature
    is constant and excluded.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples to estimate a variance")
    schedule = LayerSchedule.standard(n_qubits, n_layers=n_layers)
    spec = sample_circuit(hp, schedule)
    obs = tuning_observables(n_qubits)
    rng = rng_at(seed, 21)
    inputs = rng.uniform(-1.0, 1.0, size=(n_samples, schedule.capacity))
    fm = feature_matrix(spec, inputs, obs)
    # shifted two-pass variance: an input-independent reservoir must come out
    # exactly zero, not as axis-reduction rounding dust
    d = fm.values[:, 1:] - fm.values[0, 1:]
    d -= d.mean(axis=0)
    return float(np.mean(d * d))


def bond_objective(
    hp: HyperParams,
    n_qubits: int,
    n_layers: int,
    seed: int = 0,
    n_windows: int = 10,
    fidelity_floor: float = DEFAULT_FIDELITY_FLOOR,
) -> float:
    """Median over NARMA-driven windows of the minimal adequate bond dimension."""
    schedule = LayerSchedule.standard(n_qubits, n_layers=n_layers)
    spec = sample_circuit(hp, schedule)
    window = n_qubits // 2
    seq = gen_narma(1, window=window, seed=seed)
    ds = narma_windows(seq)
    windows = ds.windows
    picks = np.linspace(0, windows.shape[0] - 1, n_windows).astype(int)
    dims = []
    for i in picks:
        state = run_circuit(spec, windows[i])
        dims.append(min_bond_dimension(state, fidelity_floor))
    return float(np.median(dims))


@dataclass
class TrialRecord:
    """One evaluated hyperparameter setting with per-realization raw values."""

    trial_id: int
    hp: HyperParams
    objectives: dict
    raw: dict
    n_realizations: int
    architectures: tuple
    status: str = "COMPLETE"
    pareto_rank: int | None = None

    def to_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "hp": dataclasses.asdict(self.hp),
            "objectives": self.objectives,
            "raw": self.raw,
            "n_realizations": self.n_realizations,
            "architectures": [list(a) for a in self.architectures],
            "status": self.status,
            "pareto_rank": self.pareto_rank,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        return cls(
            trial_id=d["trial_id"],
            hp=HyperParams(**d["hp"]),
            objectives=d["objectives"],
            raw=d["raw"],
            n_realizations=d["n_realizations"],
            architectures=tuple(tuple(a) for a in d["architectures"]),
            status=d["status"],
            pareto_rank=d.get("pareto_rank"),
        )


def sample_hyperparams(seed, bounds: dict | None = None) -> HyperParams:
    """Draw one candidate uniformly inside the bounds; h0 <= 0.1 is rejected."""
    bounds = dict(DEFAULT_BOUNDS if bounds is None else bounds)
    if bounds["field_mean"][0] < H0_FLOOR:
        raise ValueError(f"field_mean lower bound must be >= {H0_FLOOR}")
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        draw = {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in bounds.items()}
        if draw["field_mean"] > H0_FLOOR and draw["input_strength"] > 0.0:
            return HyperParams(rng_seed=0, **draw)
    raise RuntimeError("could not draw valid hyperparameters inside the bounds")


def evaluate_trial(
    hp: HyperParams,
    seed,
    objectives=OBJECTIVE_NAMES,
    architectures=DEFAULT_ARCHITECTURES,
    n_realizations: int = DEFAULT_REALIZATIONS,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
) -> tuple[dict, dict]:
    """Score one setting: mean over realizations and architectures per objective.

    Each realization resamples the block parameters and the input sequence.
    Returns (objective means, raw per-architecture per-realization values).
    """
    raw = {name: {f"{n}q{l}l": [] for (n, l) in architectures} for name in objectives}
    for r in range(n_realizations):
        hp_r = dataclasses.replace(
            hp, rng_seed=int(np.random.default_rng(subseed(seed, 22, r)).integers(2**31))
        )
        data_seed = subseed(seed, 23, r)
        for n_qubits, n_layers in architectures:
            key = f"{n_qubits}q{n_layers}l"
            arch_seed = subseed(data_seed, n_qubits)
            if "narma_score_noiseless" in objectives:
                raw["narma_score_noiseless"][key].append(
                    narma_score(hp_r, n_qubits, n_layers, 0.0, arch_seed)
                )
            if "narma_score_noisy" in objectives:
                raw["narma_score_noisy"][key].append(
                    narma_score(hp_r, n_qubits, n_layers, noise_sigma, arch_seed)
                )
            if "bond_dimension" in objectives:
                raw["bond_dimension"][key].append(
                    bond_objective(hp_r, n_qubits, n_layers, arch_seed)
                )
            if "variability" in objectives:
                raw["variability"][key].append(
                    variability(hp_r, n_qubits, n_layers, seed=arch_seed)
                )
    means = {
        name: float(np.mean([v for vals in raw[name].values() for v in vals]))
        for name in objectives
    }
    return means, raw


class TrialStore:
    """Directory of trial_NNNN.json files plus an index, append-only."""

    def __init__(self, root):
        self.root = str(root)

    def _trial_path(self, trial_id: int) -> str:
        return os.path.join(self.root, f"trial_{trial_id:04d}.json")

    @property
    def index_path(self) -> str:
        return os.path.join(self.root, "index.json")

    def write_trial(self, record: TrialRecord) -> None:
        os.makedirs(self.root, exist_ok=True)
        payload = {"schema": TRIAL_STORE_SCHEMA, **record.to_dict()}
        tmp = self._trial_path(record.trial_id) + ".tmp"
        with open(tmp, "w") as f:
            json.dump(payload, f, indent=1, sort_keys=True)
            f.write("\n")
        os.replace(tmp, self._trial_path(record.trial_id))

    def write_index(self, meta: dict) -> None:
        os.makedirs(self.root, exist_ok=True)
        with open(self.index_path, "w") as f:
            json.dump({"schema": TRIAL_STORE_SCHEMA, **meta}, f, indent=1, sort_keys=True)
            f.write("\n")

    def read_index(self) -> dict | None:
        if not os.path.exists(self.index_path):
            return None
        with open(self.index_path) as f:
            data = json.load(f)
        if data.get("schema") != TRIAL_STORE_SCHEMA:
            raise ValueError(f"unknown trial store schema {data.get('schema')!r}")
        return data

    def load_trials(self) -> "list[TrialRecord]":
        if not os.path.isdir(self.root):
            return []
        records = []
        for name in sorted(os.listdir(self.root)):
            if not (name.startswith("trial_") and name.endswith(".json")):
                continue
            with open(os.path.join(self.root, name)) as f:
                data = json.load(f)
            if data.pop("schema", None) != TRIAL_STORE_SCHEMA:
                raise ValueError(f"{name}: unknown trial schema")
            records.append(TrialRecord.from_dict(data))
        return records


def run_search(
    store_dir,
    n_trials: int,
    seed: int = 0,
    bounds: dict | None = None,
    objectives=OBJECTIVE_NAMES,
    architectures=DEFAULT_ARCHITECTURES,
    n_realizations: int = DEFAULT_REALIZATIONS,
    resume: bool = True,
) -> "list[TrialRecord]":
    """Uniform random search; each trial is persisted before the next starts.

    Deterministic per (bounds, seed, n_trials): trial k derives every random
    stream from subseed(seed, k), so a resumed run reproduces an uninterrupted
    one exactly. A partially written trial is marked INCOMPLETE and redone.
    """
    store = TrialStore(store_dir)
    existing = {r.trial_id: r for r in store.load_trials()} if resume else {}
    store.write_index(
        {
            "seed": seed,
            "n_trials": n_trials,
            "objectives": list(objectives),
            "architectures": [list(a) for a in architectures],
            "n_realizations": n_realizations,
            "bounds": {k: list(v) for k, v in (bounds or DEFAULT_BOUNDS).items()},
        }
    )
    records = []
    for k in range(n_trials):
        prior = existing.get(k)
        if prior is not None and prior.status == "COMPLETE":
            records.append(prior)
            continue
        hp = sample_hyperparams(subseed(seed, 24, k), bounds)
        record = TrialRecord(
            trial_id=k,
            hp=hp,
            objectives={},
            raw={},
            n_realizations=n_realizations,
            architectures=tuple(architectures),
            status="INCOMPLETE",
        )
        store.write_trial(record)
        means, raw = evaluate_trial(
            hp,
            subseed(seed, 25, k),
            objectives=objectives,
            architectures=architectures,
            n_realizations=n_realizations,
        )
        record = dataclasses.replace(record, objectives=means, raw=raw, status="COMPLETE")
        store.write_trial(record)
        records.append(record)
    ranked = assign_pareto_ranks(records, default_directions(objectives))
    for r in ranked:
        store.write_trial(r)
    return ranked


def default_directions(objectives=OBJECTIVE_NAMES) -> dict:
    """Preferred direction per objective. Everything is maximized: scores for
    accuracy, bond dimension to stay clear of classically easy regimes, and
    variability because input-insensitive (concentrated) features are dead."""
    directions = {
        "narma_score_noiseless": "max",
        "narma_score_noisy": "max",
        "bond_dimension": "max",
        "variability": "max",
    }
    return {k: directions[k] for k in objectives}


def _dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True when a is at least as good everywhere and better somewhere."""
    return bool(np.all(a >= b) and np.any(a > b))


def pareto_front(
    trials: "list[TrialRecord]", directions: dict | None = None
) -> "list[TrialRecord]":
    """Non-dominated subset under the given per-objective directions."""
    return [t for t in assign_pareto_ranks(trials, directions) if t.pareto_rank == 0]


def assign_pareto_ranks(
    trials: "list[TrialRecord]", directions: dict | None = None
) -> "list[TrialRecord]":
    """Peel non-dominated fronts: rank 0 is the front, rank 1 the next, etc."""
    complete = [t for t in trials if t.status == "COMPLETE"]
    if not complete:
        return list(trials)
    names = sorted(complete[0].objectives)
    directions = directions or default_directions(tuple(names))
    sign = np.array([1.0 if directions[n] == "max" else -1.0 for n in names])
    points = np.array([[t.objectives[n] for n in names] for t in complete]) * sign
    ranks = np.full(len(complete), -1)
    current = 0
    remaining = list(range(len(complete)))
    while remaining:
        front = [
            i
            for i in remaining
            if not any(_dominates(points[j], points[i]) for j in remaining if j != i)
        ]
        for i in front:
            ranks[i] = current
        remaining = [i for i in remaining if i not in front]
        current += 1
    out = []
    by_id = {id(t): r for t, r in zip(complete, ranks)}
    for t in trials:
        if id(t) in by_id:
            out.append(dataclasses.replace(t, pareto_rank=int(by_id[id(t)])))
        else:
            out.append(t)
    return out
