"""End-to-end benchmark runs tying the reservoir, measurement, feature
selection, and readout together.

Three experiment families:

  narma_experiment            R^2 versus task order, exact and shot-sampled
  classification_experiment   ablation grid and learning curves on a
                              satellite-image table
  eigentask_sweep             metrics versus the NSR cutoff threshold

Finite-shot features come from local frequency tables: weight-1 Pauli means
and non-overlapping nearest-neighbour weight-2 correlators are linear in the
table cells, and local eigentasks are fitted on and applied to the same
tables.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ._seeding import rng_at, subseed
from .circuit import CircuitSpec, HyperParams, LayerSchedule, sample_circuit
from .eigentask import (
    DEFAULT_LAMBDA,
    EigentaskBasis,
    FeatureScaling,
    estimate_vg,
    eigentask_values,
    fit_scaling,
    rec,
    solve_eigentasks,
)
from .features import FeatureMatrix, stack_features
from .measurement import local_frequencies, sample_shots
from .readout import (
    DEFAULT_RIDGE_CLASSIFICATION,
    DEFAULT_RIDGE_REGRESSION,
    bootstrap_ci,
    classification_metrics,
    fit_classifier,
    fit_ridge,
    majority_baseline,
    r_squared,
)
from .statevec import DEFAULT_QUBIT_CAP, feature_matrix, full_observables, run_circuit
from .tasks import (
    TabularDataset,
    build_classification_input,
    gen_narma,
    narma_targets,
    narma_windows,
    split_tabular,
)

FEATURE_TYPES = ("x", "pauli", "eigentask", "eigentask-cut")
ABLATION_SCALINGS = ("unit", "scaled")
DEFAULT_SHOT_CHECKPOINTS = (100, 1_000, 10_000)
DEFAULT_TRAIN_SIZES = (100, 200, 400)

_SIGN = np.array([1.0, -1.0])
# estimate matrices over the 6/36 cell tables; a basis matches 1/3 of the
# shots per qubit, hence the 3^w prefactor
_W1_EST = 3.0 * np.kron(np.eye(3), _SIGN)
_W2_EST = 9.0 * np.einsum(
    "pi,qj->pqij", np.kron(np.eye(3), _SIGN), np.kron(np.eye(3), _SIGN)
).reshape(9, 36)


@dataclass
class SampleTables:
    """Local frequency tables for a batch of samples at one shot budget.

    singles: (T, N, 6) per-qubit cell frequencies
    pairs:   (T, n_bonds, 36) per-bond joint cell frequencies
    bonds are listed non-overlapping (even) bonds first, then odd bonds.
    """

    shots: int
    singles: np.ndarray
    pairs: np.ndarray
    bonds: tuple

    @property
    def n_samples(self) -> int:
        return self.singles.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.singles.shape[1]

    @property
    def even_bonds(self) -> slice:
        return slice(0, self.n_qubits // 2)

    def rows(self, index) -> "SampleTables":
        index = np.asarray(index)
        return SampleTables(self.shots, self.singles[index], self.pairs[index], self.bonds)


def ring_bonds(n_qubits: int) -> tuple:
    """All nearest-neighbour bonds on the ring, even (non-overlapping) first."""
    even = [(q, q + 1) for q in range(0, n_qubits, 2)]
    odd = [(q, (q + 1) % n_qubits) for q in range(1, n_qubits, 2)]
    return tuple(even + odd)


def measure_sample_tables(
    spec: CircuitSpec,
    inputs: np.ndarray,
    shots: int,
    seed,
    checkpoints=None,
    max_qubits: int = DEFAULT_QUBIT_CAP,
    workers: int = 1,
) -> "list[SampleTables]":
    """Simulate each input, sample shots once, and tabulate at each checkpoint.

    Checkpoints are prefixes of a single shot stream per sample, so a smaller
    budget is exactly the first shots of the larger one. Samples are
    independent; with workers > 1 they are processed by a thread pool (each
    sample's shot stream is seeded by its index, so the result does not
    depend on scheduling).
    """
    budgets = sorted(set([shots] + list(checkpoints or [])))
    if budgets[-1] != shots:
        raise ValueError("checkpoints cannot exceed the shot budget")
    n = spec.schedule.n_qubits
    bonds = ring_bonds(n)
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    t = inputs.shape[0]
    singles = {s: np.empty((t, n, 6)) for s in budgets}
    pairs = {s: np.empty((t, len(bonds), 36)) for s in budgets}
    single_subsets = [(q,) for q in range(n)]
    even, odd = bonds[: n // 2], bonds[n // 2 :]

    def one_sample(i: int) -> None:
        state = run_circuit(spec, inputs[i], max_qubits=max_qubits)
        records = sample_shots(state, shots, subseed(seed, i))
        for s in budgets:
            rec_s = records.first(s)
            for j, table in enumerate(local_frequencies(rec_s, single_subsets)):
                singles[s][i, j] = table.frequencies
            for j, table in enumerate(local_frequencies(rec_s, list(even))):
                pairs[s][i, j] = table.frequencies
            for j, table in enumerate(local_frequencies(rec_s, list(odd))):
                pairs[s][i, j + len(even)] = table.frequencies

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one_sample, range(t)))
    else:
        for i in range(t):
            one_sample(i)
    return [SampleTables(s, singles[s], pairs[s], bonds) for s in budgets]


def pauli_table_features(
    tables: SampleTables,
    weight: int = 1,
    labels: str = "XYZ",
    all_bonds: bool = False,
) -> FeatureMatrix:
    """Pauli expectation estimates from frequency tables.

    Weight 1 gives one column per (qubit, label); weight 2 adds the two-qubit
    correlators over the requested labels on the non-overlapping bonds (or on
    every ring bond with ``all_bonds``).
    """
    if weight not in (1, 2):
        raise ValueError("weight must be 1 or 2")
    picks = [("XYZ".index(c)) for c in labels]
    t, n = tables.n_samples, tables.n_qubits
    est1 = tables.singles @ _W1_EST[picks].T  # (T, N, len(labels))
    cols = [est1.reshape(t, -1)]
    names = [f"{c}@{q}" for q in range(n) for c in labels]
    if weight == 2:
        bond_stop = len(tables.bonds) if all_bonds else n // 2
        rows = [3 * p + q for p in picks for q in picks]
        est2 = tables.pairs[:, :bond_stop] @ _W2_EST[rows].T
        cols.append(est2.reshape(t, -1))
        names += [
            f"{a}{b}@{i}-{j}"
            for (i, j) in tables.bonds[:bond_stop]
            for a in labels
            for b in labels
        ]
    values = np.concatenate([np.ones((t, 1))] + cols, axis=1)
    return FeatureMatrix(values, tuple(names))


def fit_table_eigentasks(tables: SampleTables, weight: int) -> "list[EigentaskBasis]":
    """Solve local eigentasks per subset from training tables.

    Weight 1 fits one basis per qubit; weight 2 one per non-overlapping bond.
    """
    if weight not in (1, 2):
        raise ValueError("weight must be 1 or 2")
    bases = []
    if weight == 1:
        for q in range(tables.n_qubits):
            v, g = estimate_vg(tables.singles[:, q], shots=tables.shots)
            bases.append(
                solve_eigentasks(v, g, subset=(q,), shots=tables.shots, max_rank=4)
            )
    else:
        for j, bond in enumerate(tables.bonds[: tables.n_qubits // 2]):
            v, g = estimate_vg(tables.pairs[:, j], shots=tables.shots)
            bases.append(
                solve_eigentasks(v, g, subset=bond, shots=tables.shots, max_rank=16)
            )
    return bases


def eigentask_table_features(
    tables: SampleTables,
    bases: "list[EigentaskBasis]",
    lam: float | None = None,
) -> tuple[FeatureMatrix, np.ndarray]:
    """Eigentask features from tables, with the matching per-column NSR values.

    With ``lam`` set, only eigentasks resolvable at the tables' shot budget
    (beta^2 / S < lam) are kept.
    """
    t = tables.n_samples
    cols, names, nsr = [], [], []
    for basis in bases:
        if len(basis.subset) == 1:
            freqs = tables.singles[:, basis.subset[0]]
            tag = f"et@{basis.subset[0]}"
        else:
            j = tables.bonds.index(tuple(basis.subset))
            freqs = tables.pairs[:, j]
            tag = f"et@{basis.subset[0]}-{basis.subset[1]}"
        if lam is None:
            indices = basis.nontrivial_indices
        else:
            indices = basis.retained_indices(tables.shots, lam)
        if indices.size == 0:
            continue
        cols.append(eigentask_values(freqs, basis, indices))
        names += [f"{tag}:{k}" for k in range(indices.size)]
        nsr.extend(basis.nsr[indices])
    if cols:
        values = np.concatenate([np.ones((t, 1))] + cols, axis=1)
    else:
        values = np.ones((t, 1))
    return FeatureMatrix(values, tuple(names)), np.array(nsr)


@dataclass
class NarmaPoint:
    """R^2 for one task order, exact features and optionally sampled ones."""

    order: int
    r2_train: float
    r2_test: float
    r2_train_shots: float | None = None
    r2_test_shots: float | None = None


def narma_experiment(
    orders,
    n_qubits: int = 8,
    n_layers: int | None = None,
    seed: int = 0,
    shots: int | None = None,
    hyperparams: HyperParams | None = None,
    t_init: int = 100,
    t_train: int = 250,
    t_test: int = 250,
    ridge_lambda: float = DEFAULT_RIDGE_REGRESSION,
    max_qubits: int = DEFAULT_QUBIT_CAP,
    workers: int = 1,
) -> "list[NarmaPoint]":
    """R^2 versus NARMA order on one reservoir draw and one input sequence.

    All orders share the input sequence and hence the feature matrices;
    only the targets are recomputed, so the readout refit is the whole
    per-order cost. With ``shots`` set, a second feature pipeline estimates
    the same observables from sampled randomized measurements.
    """
    hp = hyperparams or HyperParams.tuned(rng_seed=seed)
    schedule = LayerSchedule.standard(n_qubits, n_layers=n_layers)
    spec = sample_circuit(hp, schedule)
    window = schedule.capacity
    base = gen_narma(1, t_init, t_train, t_test, window=window, seed=seed)
    ds = narma_windows(base)
    obs = full_observables(n_qubits)
    fm_train = feature_matrix(spec, ds.train[0], obs, max_qubits=max_qubits)
    fm_test = feature_matrix(spec, ds.test[0], obs, max_qubits=max_qubits)
    fm_train_shots = fm_test_shots = None
    if shots is not None:
        t_all = measure_sample_tables(
            spec, ds.windows, shots, subseed(seed, 40), max_qubits=max_qubits, workers=workers
        )[-1]
        fm_all = pauli_table_features(t_all, weight=2, all_bonds=True)
        fm_train_shots = fm_all.rows(np.arange(ds.n_train))
        fm_test_shots = fm_all.rows(np.arange(ds.n_train, ds.n_train + ds.n_test))
    points = []
    for order in orders:
        y = narma_targets(base.inputs, order)
        seq = dataclasses.replace(base, order=order, targets=y)
        split = narma_windows(seq)
        y_train, y_test = split.train[1], split.test[1]
        model = fit_ridge(fm_train, y_train, ridge_lambda)
        point = NarmaPoint(
            order=order,
            r2_train=r_squared(y_train, model.predict(fm_train)),
            r2_test=r_squared(y_test, model.predict(fm_test)),
        )
        if fm_train_shots is not None:
            model_s = fit_ridge(fm_train_shots, y_train, ridge_lambda)
            point.r2_train_shots = r_squared(y_train, model_s.predict(fm_train_shots))
            point.r2_test_shots = r_squared(y_test, model_s.predict(fm_test_shots))
        points.append(point)
    return points


@dataclass
class AblationCell:
    """One readout variant: feature family x weight x scaling."""

    features: str
    weight: int
    scaling: str
    f1_macro: float
    accuracy: float
    n_features: int
    f1_lo: float | None = None
    f1_hi: float | None = None


@dataclass
class CurvePoint:
    """One learning-curve sample: metric against train size or shot budget."""

    x: int
    f1_macro: float
    accuracy: float
    f1_lo: float | None = None
    f1_hi: float | None = None


@dataclass
class ClassificationResult:
    """Per-seed classification outputs: baselines, ablation grid, curves."""

    seed: int
    n_qubits: int
    shots: int
    train_size: int
    test_size: int
    majority_f1: float
    majority_accuracy: float
    raw_ridge_f1: float
    raw_ridge_accuracy: float
    cells: "list[AblationCell]"
    train_curve: "list[CurvePoint]"
    shot_curve: "list[CurvePoint]"


def _resolve_scaling(features: str, scaling: str) -> str:
    """Ablation 'scaled' means NSR weighting for eigentasks and relative
    variability (signal) weighting for direct Pauli estimates."""
    if scaling == "unit":
        return "unit"
    return "nsr" if features.startswith("eigentask") else "signal"


def _cell_features(
    tables: SampleTables,
    features: str,
    weight: int,
    bases: "list[EigentaskBasis]" = None,
    lam: float = DEFAULT_LAMBDA,
) -> tuple[FeatureMatrix, np.ndarray | None]:
    if features == "x":
        return pauli_table_features(tables, weight=weight, labels="X"), None
    if features == "pauli":
        return pauli_table_features(tables, weight=weight), None
    cutoff = lam if features == "eigentask-cut" else None
    return eigentask_table_features(tables, bases, lam=cutoff)


def _fit_cell(
    train_tables: SampleTables,
    test_tables: SampleTables,
    labels_train: np.ndarray,
    labels_test: np.ndarray,
    features: str,
    weight: int,
    scaling: str,
    et_bases: "list[EigentaskBasis]" = None,
    lam: float = DEFAULT_LAMBDA,
    ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION,
) -> tuple[AblationCell, np.ndarray]:
    fm_train, nsr = _cell_features(train_tables, features, weight, et_bases, lam)
    fm_test, _ = _cell_features(test_tables, features, weight, et_bases, lam)
    mode = _resolve_scaling(features, scaling)
    frozen = fit_scaling(fm_train, mode, nsr=nsr if mode == "nsr" else None)
    model = fit_classifier(frozen.apply(fm_train), labels_train, ridge_lambda)
    predicted = model.predict_labels(frozen.apply(fm_test))
    report = classification_metrics(labels_test, predicted)
    cell = AblationCell(
        features=features,
        weight=weight,
        scaling=scaling,
        f1_macro=report.values["f1_macro"],
        accuracy=report.values["accuracy"],
        n_features=fm_train.n_features,
    )
    return cell, predicted


def _metric_ci(labels_test, predicted, metric, n_resamples, seed):
    """Percentile CI over test-row resampling of a fixed prediction vector."""
    labels_test = np.asarray(labels_test)
    predicted = np.asarray(predicted)

    def eval_fn(rng):
        idx = rng.integers(0, labels_test.size, labels_test.size)
        return classification_metrics(labels_test[idx], predicted[idx]).values[metric]

    return bootstrap_ci(eval_fn, n_resamples, seed)


def ablation_table(
    train_tables: SampleTables,
    test_tables: SampleTables,
    labels_train: np.ndarray,
    labels_test: np.ndarray,
    lambda_cutoff: float = DEFAULT_LAMBDA,
    ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION,
    ci_resamples: int = 0,
    seed: int = 0,
) -> "list[AblationCell]":
    """The 16-cell readout comparison: feature family x weight x scaling."""
    et_bases = {w: fit_table_eigentasks(train_tables, w) for w in (1, 2)}
    cells = []
    for features in FEATURE_TYPES:
        for weight in (1, 2):
            for scaling in ABLATION_SCALINGS:
                cell, predicted = _fit_cell(
                    train_tables,
                    test_tables,
                    labels_train,
                    labels_test,
                    features,
                    weight,
                    scaling,
                    et_bases=et_bases[weight],
                    lam=lambda_cutoff,
                    ridge_lambda=ridge_lambda,
                )
                if ci_resamples:
                    cell.f1_lo, cell.f1_hi = _metric_ci(
                        labels_test,
                        predicted,
                        "f1_macro",
                        ci_resamples,
                        subseed(seed, 50, len(cells)),
                    )
                cells.append(cell)
    return cells


def _stratified_subset(labels: np.ndarray, size: int, rng) -> np.ndarray:
    from .tasks import _stratified_pick

    return _stratified_pick(np.asarray(labels), size, rng)


def train_size_curve(
    train_tables: SampleTables,
    test_tables: SampleTables,
    labels_train: np.ndarray,
    labels_test: np.ndarray,
    sizes=DEFAULT_TRAIN_SIZES,
    ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION,
    ci_resamples: int = 0,
    seed: int = 0,
) -> "list[CurvePoint]":
    """F1 versus training-set size on weight-1 Pauli features, unit scaling.

    Confidence intervals resample the training subset (with replacement) and
    refit the readout, keeping the test split fixed.
    """
    fm_train = pauli_table_features(train_tables, weight=1)
    fm_test = pauli_table_features(test_tables, weight=1)
    labels_train = np.asarray(labels_train)
    points = []
    for size in sizes:
        idx = _stratified_subset(labels_train, size, rng_at(seed, 51, size))
        fm_sub, y_sub = fm_train.rows(idx), labels_train[idx]

        def fit_eval(fm_fit, y_fit):
            frozen = fit_scaling(fm_fit, "unit")
            model = fit_classifier(frozen.apply(fm_fit), y_fit, ridge_lambda)
            predicted = model.predict_labels(frozen.apply(fm_test))
            return classification_metrics(labels_test, predicted)

        report = fit_eval(fm_sub, y_sub)
        point = CurvePoint(
            x=size,
            f1_macro=report.values["f1_macro"],
            accuracy=report.values["accuracy"],
        )
        if ci_resamples:

            def eval_fn(rng):
                boot = rng.integers(0, size, size)
                if np.unique(y_sub[boot]).size < 2:
                    return report.values["f1_macro"]
                return fit_eval(fm_sub.rows(boot), y_sub[boot]).values["f1_macro"]

            point.f1_lo, point.f1_hi = bootstrap_ci(
                eval_fn, ci_resamples, subseed(seed, 52, size)
            )
        points.append(point)
    return points


def shot_budget_curve(
    tables_by_budget: "list[SampleTables]",
    n_train: int,
    labels_train: np.ndarray,
    labels_test: np.ndarray,
    ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION,
    ci_resamples: int = 0,
    seed: int = 0,
) -> "list[CurvePoint]":
    """F1 versus shot budget on weight-1 Pauli features, unit scaling.

    Confidence intervals resample each sample's per-qubit cell table as a
    multinomial at the same budget, regenerating features for train and test.
    """
    labels_train = np.asarray(labels_train)
    labels_test = np.asarray(labels_test)
    points = []
    for tables in tables_by_budget:

        def fit_eval(t: SampleTables):
            fm = pauli_table_features(t, weight=1)
            fm_train = fm.rows(np.arange(n_train))
            fm_test = fm.rows(np.arange(n_train, t.n_samples))
            frozen = fit_scaling(fm_train, "unit")
            model = fit_classifier(frozen.apply(fm_train), labels_train, ridge_lambda)
            predicted = model.predict_labels(frozen.apply(fm_test))
            return classification_metrics(labels_test, predicted)

        report = fit_eval(tables)
        point = CurvePoint(
            x=tables.shots,
            f1_macro=report.values["f1_macro"],
            accuracy=report.values["accuracy"],
        )
        if ci_resamples:

            def eval_fn(rng):
                resampled = rng.multinomial(tables.shots, tables.singles) / tables.shots
                boot = SampleTables(tables.shots, resampled, tables.pairs, tables.bonds)
                return fit_eval(boot).values["f1_macro"]

            point.f1_lo, point.f1_hi = bootstrap_ci(
                eval_fn, ci_resamples, subseed(seed, 53, tables.shots)
            )
        points.append(point)
    return points


def classification_experiment(
    dataset: TabularDataset,
    n_qubits: int = 12,
    shots: int = 10_000,
    seed: int = 0,
    train_size: int | None = None,
    train_sizes=DEFAULT_TRAIN_SIZES,
    shot_checkpoints=DEFAULT_SHOT_CHECKPOINTS,
    lambda_cutoff: float = DEFAULT_LAMBDA,
    ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION,
    hyperparams: HyperParams | None = None,
    ci_resamples: int = 0,
    max_qubits: int = DEFAULT_QUBIT_CAP,
    workers: int = 1,
) -> ClassificationResult:
    """One full classification run at a fixed seed.

    The seed controls the train/test split, the reservoir draw, and the
    measurement shots. Each sample is simulated once and measured once; all
    feature variants and shot checkpoints reuse that stream.
    """
    if train_size is None:
        train_size = dataset.n_rows // 2
    train, test = split_tabular(dataset, train_size, seed=seed)
    hp = hyperparams or HyperParams.tuned(
        rng_seed=int(rng_at(seed, 60).integers(2**31))
    )
    d = 2 * train.features.shape[1]
    schedule = LayerSchedule.for_input(n_qubits, d)
    spec = sample_circuit(hp, schedule)
    inputs = np.array(
        [
            build_classification_input(row)
            for split in (train, test)
            for row in split.normalized()
        ]
    )
    checkpoints = sorted(set(list(shot_checkpoints) + [shots]))
    checkpoints = [c for c in checkpoints if c <= shots]
    tables_by_budget = measure_sample_tables(
        spec,
        inputs,
        shots,
        subseed(seed, 61),
        checkpoints=checkpoints,
        max_qubits=max_qubits,
        workers=workers,
    )
    full = tables_by_budget[-1]
    n_train = train.n_rows
    train_full = full.rows(np.arange(n_train))
    test_full = full.rows(np.arange(n_train, full.n_samples))
    majority = classification_metrics(
        test.labels, majority_baseline(train.labels, test.labels)
    )
    raw_train = FeatureMatrix(
        np.concatenate([np.ones((n_train, 1)), train.normalized()], axis=1),
        tuple(f"band{i}" for i in range(train.features.shape[1])),
    )
    raw_test = FeatureMatrix(
        np.concatenate([np.ones((test.n_rows, 1)), test.normalized()], axis=1),
        raw_train.names,
    )
    raw_model = fit_classifier(raw_train, train.labels, ridge_lambda)
    raw_report = classification_metrics(test.labels, raw_model.predict_labels(raw_test))
    cells = ablation_table(
        train_full,
        test_full,
        train.labels,
        test.labels,
        lambda_cutoff=lambda_cutoff,
        ridge_lambda=ridge_lambda,
        ci_resamples=ci_resamples,
        seed=subseed(seed, 62),
    )
    curve_train = train_size_curve(
        train_full,
        test_full,
        train.labels,
        test.labels,
        sizes=[s for s in train_sizes if s <= n_train],
        ridge_lambda=ridge_lambda,
        ci_resamples=ci_resamples,
        seed=subseed(seed, 63),
    )
    curve_shots = shot_budget_curve(
        tables_by_budget,
        n_train,
        train.labels,
        test.labels,
        ridge_lambda=ridge_lambda,
        ci_resamples=ci_resamples,
        seed=subseed(seed, 64),
    )
    return ClassificationResult(
        seed=seed,
        n_qubits=n_qubits,
        shots=shots,
        train_size=n_train,
        test_size=test.n_rows,
        majority_f1=majority.values["f1_macro"],
        majority_accuracy=majority.values["accuracy"],
        raw_ridge_f1=raw_report.values["f1_macro"],
        raw_ridge_accuracy=raw_report.values["accuracy"],
        cells=cells,
        train_curve=curve_train,
        shot_curve=curve_shots,
    )


@dataclass
class SweepPoint:
    """Eigentask metrics at one cutoff threshold."""

    lam: float
    n_retained: int
    c_lambda: float
    c_total: float
    f1_macro: float
    accuracy: float


def eigentask_sweep(
    train_tables: SampleTables,
    test_tables: SampleTables,
    labels_train: np.ndarray,
    labels_test: np.ndarray,
    lambdas,
    weight: int = 2,
    ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION,
) -> "list[SweepPoint]":
    """Retained counts, capacity, and test metrics across cutoff thresholds."""
    bases = fit_table_eigentasks(train_tables, weight)
    points = []
    for lam in lambdas:
        fm_train, nsr = eigentask_table_features(train_tables, bases, lam=lam)
        fm_test, _ = eigentask_table_features(test_tables, bases, lam=lam)
        report = rec(bases, train_tables.shots, lam=lam)
        if fm_train.n_features == 0:
            f1, acc = 0.0, 0.0
        else:
            frozen = fit_scaling(fm_train, "nsr", nsr=nsr)
            model = fit_classifier(frozen.apply(fm_train), labels_train, ridge_lambda)
            predicted = model.predict_labels(frozen.apply(fm_test))
            metrics = classification_metrics(labels_test, predicted)
            f1, acc = metrics.values["f1_macro"], metrics.values["accuracy"]
        points.append(
            SweepPoint(
                lam=float(lam),
                n_retained=report.n_retained,
                c_lambda=report.cutoff_capacity,
                c_total=report.total_capacity,
                f1_macro=f1,
                accuracy=acc,
            )
        )
    return points
