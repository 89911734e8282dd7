"""Command-line interface.

Each command materializes a run directory: the resolved configuration, a
manifest (seed, package version, input digests, plot markers), and versioned
CSV outputs. Reruns with the same configuration and seed are byte-identical,
which is the contract the plotting side relies on.

Exit codes: 0 success, 1 usage or input error, 2 internal error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import traceback

import numpy as np

from . import __version__
from ._seeding import subseed
from .circuit import HyperParams, LayerSchedule, sample_circuit
from .eigentask import DEFAULT_LAMBDA
from .experiments import (
    classification_experiment,
    eigentask_sweep,
    measure_sample_tables,
    narma_experiment,
    pauli_table_features,
    eigentask_table_features,
    fit_table_eigentasks,
)
from .features import save_features_csv
from .readout import MIN_BOOTSTRAP_RESAMPLES
from .eigentask import fit_scaling
from .tasks import (
    build_classification_input,
    load_landsat,
    split_tabular,
    synth_landsat,
    write_landsat,
)
from .tuner import (
    DEFAULT_ARCHITECTURES,
    DEFAULT_REALIZATIONS,
    OBJECTIVE_NAMES,
    TrialStore,
    assign_pareto_ranks,
    default_directions,
    run_search,
)

CONFIG_SCHEMA = "qelm.config/1"
MANIFEST_SCHEMA = "qelm.manifest/1"
CSV_SCHEMAS = {
    "r2_vs_order": "qelm.r2_vs_order/1",
    "ablation": "qelm.ablation/1",
    "learning_curve": "qelm.learning_curve/1",
    "lambda_sweep": "qelm.lambda_sweep/1",
    "retained": "qelm.retained/1",
    "rec": "qelm.rec/1",
    "pareto": "qelm.pareto/1",
}


def _workers() -> int:
    raw = os.environ.get("QELM_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"QELM_WORKERS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("QELM_WORKERS must be at least 1")
    return value


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, kind: str, header, rows) -> None:
    """Versioned CSV: schema comment line, header, repr-formatted floats."""
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema: {CSV_SCHEMAS[kind]}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, payload: dict) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def start_run(args, command: str, markers: dict | None = None, inputs: dict | None = None) -> str:
    """Create the run directory and write config.json + manifest.json."""
    out = args.out
    os.makedirs(out, exist_ok=True)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    _write_json(
        os.path.join(out, "config.json"),
        {"schema": CONFIG_SCHEMA, "command": command, **config},
    )
    _write_json(
        os.path.join(out, "manifest.json"),
        {
            "schema": MANIFEST_SCHEMA,
            "command": command,
            "version": __version__,
            "seed": getattr(args, "seed", None),
            "markers": markers or {},
            "inputs": inputs or {},
        },
    )
    return out


def _load_dataset(args) -> tuple:
    if args.data is not None:
        ds = load_landsat(args.data, subsample=args.subsample, seed=args.seed)
        meta = {
            "path": str(args.data),
            "sha256": file_sha256(args.data),
            "rows": ds.n_rows,
        }
    else:
        rows = args.subsample or 860
        ds = synth_landsat(rows, seed=args.seed)
        meta = {"source": "synthetic", "rows": rows}
    return ds, meta


def cmd_narma(args) -> int:
    schedule = LayerSchedule.standard(args.qubits, n_layers=args.layers)
    window = schedule.capacity
    orders = args.orders or list(range(1, window + 1))
    start_run(args, "narma", markers={"window": window})
    points = narma_experiment(
        orders,
        n_qubits=args.qubits,
        n_layers=args.layers,
        seed=args.seed,
        shots=args.shots,
        workers=_workers(),
    )
    if args.shots is not None:
        header = ("order", "r2_train", "r2_test", "r2_train_shots", "r2_test_shots")
        rows = [
            (p.order, p.r2_train, p.r2_test, p.r2_train_shots, p.r2_test_shots)
            for p in points
        ]
    else:
        header = ("order", "r2_train", "r2_test")
        rows = [(p.order, p.r2_train, p.r2_test) for p in points]
    write_csv(os.path.join(args.out, "r2_vs_order.csv"), "r2_vs_order", header, rows)
    return 0


def _selected_features(tables, args, et_bases=None):
    if args.features in ("x", "pauli"):
        if args.scaling == "nsr":
            raise ValueError("nsr scaling requires eigentask features")
        labels = "X" if args.features == "x" else "XYZ"
        return pauli_table_features(tables, weight=args.weight, labels=labels), None
    lam = args.lambda_cutoff if args.features == "eigentask-cut" else None
    return eigentask_table_features(tables, et_bases, lam=lam)


def cmd_classify(args) -> int:
    ds, meta = _load_dataset(args)
    start_run(
        args,
        "classify",
        markers={"lambda": args.lambda_cutoff},
        inputs={"dataset": meta},
    )
    result = classification_experiment(
        ds,
        n_qubits=args.qubits,
        shots=args.shots,
        seed=args.seed,
        train_size=args.train_size,
        lambda_cutoff=args.lambda_cutoff,
        ci_resamples=args.bootstrap,
        workers=_workers(),
    )
    ablation_rows = [
        (c.features, c.weight, c.scaling, c.f1_macro, c.f1_lo, c.f1_hi, c.accuracy, c.n_features)
        for c in result.cells
    ]
    ablation_rows.append(
        ("baseline-majority", 0, "-", result.majority_f1, None, None, result.majority_accuracy, 0)
    )
    ablation_rows.append(
        (
            "baseline-ridge-raw",
            0,
            "-",
            result.raw_ridge_f1,
            None,
            None,
            result.raw_ridge_accuracy,
            ds.features.shape[1],
        )
    )
    write_csv(
        os.path.join(args.out, "ablation.csv"),
        "ablation",
        ("features", "weight", "scaling", "f1_macro", "f1_lo", "f1_hi", "accuracy", "n_features"),
        ablation_rows,
    )
    curve_header = ("axis", "x", "f1_macro", "f1_lo", "f1_hi", "accuracy")
    write_csv(
        os.path.join(args.out, "learning_train.csv"),
        "learning_curve",
        curve_header,
        [("train_size", p.x, p.f1_macro, p.f1_lo, p.f1_hi, p.accuracy) for p in result.train_curve],
    )
    write_csv(
        os.path.join(args.out, "learning_shots.csv"),
        "learning_curve",
        curve_header,
        [("shots", p.x, p.f1_macro, p.f1_lo, p.f1_hi, p.accuracy) for p in result.shot_curve],
    )
    _emit_selected_features(args, ds)
    return 0


def _emit_selected_features(args, ds) -> None:
    """Write the train/test feature matrices of the requested readout variant."""
    train, test = split_tabular(ds, args.train_size or ds.n_rows // 2, seed=args.seed)
    hp = HyperParams.tuned(
        rng_seed=int(np.random.default_rng(subseed(args.seed, 60)).integers(2**31))
    )
    schedule = LayerSchedule.for_input(args.qubits, 2 * train.features.shape[1])
    spec = sample_circuit(hp, schedule)
    inputs = np.array(
        [build_classification_input(r) for split in (train, test) for r in split.normalized()]
    )
    tables = measure_sample_tables(
        spec, inputs, args.shots, subseed(args.seed, 61), workers=_workers()
    )[-1]
    train_tables = tables.rows(np.arange(train.n_rows))
    test_tables = tables.rows(np.arange(train.n_rows, tables.n_samples))
    et_bases = None
    if args.features.startswith("eigentask"):
        et_bases = fit_table_eigentasks(train_tables, args.weight)
    fm_train, nsr = _selected_features(train_tables, args, et_bases)
    fm_test, _ = _selected_features(test_tables, args, et_bases)
    frozen = fit_scaling(fm_train, args.scaling, nsr=nsr if args.scaling == "nsr" else None)
    save_features_csv(os.path.join(args.out, "features_train.csv"), frozen.apply(fm_train))
    save_features_csv(os.path.join(args.out, "features_test.csv"), frozen.apply(fm_test))


def cmd_eigentasks(args) -> int:
    ds, meta = _load_dataset(args)
    start_run(
        args,
        "eigentasks",
        markers={"lambda": DEFAULT_LAMBDA},
        inputs={"dataset": meta},
    )
    lambdas = args.lambdas or np.geomspace(0.1, 10.0, 20).tolist()
    train, test = split_tabular(ds, args.train_size or ds.n_rows // 2, seed=args.seed)
    hp = HyperParams.tuned(
        rng_seed=int(np.random.default_rng(subseed(args.seed, 60)).integers(2**31))
    )
    schedule = LayerSchedule.for_input(args.qubits, 2 * train.features.shape[1])
    spec = sample_circuit(hp, schedule)
    inputs = np.array(
        [build_classification_input(r) for split in (train, test) for r in split.normalized()]
    )
    tables = measure_sample_tables(
        spec, inputs, args.shots, subseed(args.seed, 61), workers=_workers()
    )[-1]
    train_tables = tables.rows(np.arange(train.n_rows))
    test_tables = tables.rows(np.arange(train.n_rows, tables.n_samples))
    points = eigentask_sweep(
        train_tables,
        test_tables,
        train.labels,
        test.labels,
        lambdas,
        weight=args.weight,
    )
    write_csv(
        os.path.join(args.out, "lambda_sweep.csv"),
        "lambda_sweep",
        ("lam", "f1_macro", "accuracy"),
        [(p.lam, p.f1_macro, p.accuracy) for p in points],
    )
    write_csv(
        os.path.join(args.out, "retained_counts.csv"),
        "retained",
        ("lam", "n_retained"),
        [(p.lam, p.n_retained) for p in points],
    )
    write_csv(
        os.path.join(args.out, "rec_curve.csv"),
        "rec",
        ("lam", "c_lambda", "c_total"),
        [(p.lam, p.c_lambda, p.c_total) for p in points],
    )
    return 0


def _parse_architectures(text: str) -> tuple:
    pairs = []
    for token in text.split(","):
        n, layers = token.lower().split("x")
        pairs.append((int(n), int(layers)))
    return tuple(pairs)


def cmd_tune(args) -> int:
    architectures = _parse_architectures(args.architectures)
    objectives = tuple(args.objectives.split(","))
    unknown = set(objectives) - set(OBJECTIVE_NAMES)
    if unknown:
        raise ValueError(f"unknown objectives: {sorted(unknown)}")
    start_run(args, "tune")
    run_search(
        os.path.join(args.out, "trials"),
        args.trials,
        seed=args.seed,
        objectives=objectives,
        architectures=architectures,
        n_realizations=args.realizations,
        resume=not args.no_resume,
    )
    return 0


def cmd_pareto(args) -> int:
    store = TrialStore(args.store)
    trials = store.load_trials()
    if not trials:
        raise ValueError(f"no trials found in {args.store}")
    complete = [t for t in trials if t.status == "COMPLETE"]
    names = sorted(complete[0].objectives) if complete else []
    ranked = assign_pareto_ranks(trials, default_directions(tuple(names)))
    start_run(args, "pareto")
    hp_fields = (
        "input_strength",
        "kick_mean",
        "kick_std",
        "field_mean",
        "field_std",
        "coupling_mean",
        "coupling_std",
    )
    rows = [
        (t.trial_id, t.pareto_rank)
        + tuple(t.objectives[n] for n in names)
        + tuple(getattr(t.hp, f) for f in hp_fields)
        for t in ranked
        if t.status == "COMPLETE"
    ]
    write_csv(
        os.path.join(args.out, "pareto_front.csv"),
        "pareto",
        ("trial_id", "pareto_rank") + tuple(names) + hp_fields,
        rows,
    )
    return 0


def cmd_synth_data(args) -> int:
    ds = synth_landsat(args.rows, seed=args.seed)
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    write_landsat(args.out, ds)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="root seed for every random stream")
    p.add_argument("--out", required=True, help="run directory for config, manifest, CSVs")


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", default=None, help="satellite table file (omit for synthetic data)")
    p.add_argument("--subsample", type=int, default=None, help="stratified subsample size")
    p.add_argument("--train-size", type=int, default=None, help="training rows (default: half)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qelm",
        description="Quantum extreme learning machine workbench",
    )
    parser.add_argument("--version", action="version", version=f"qelm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("narma", help="R^2 versus NARMA task order")
    _add_common(p)
    p.add_argument("--qubits", type=int, default=8)
    p.add_argument("--layers", type=int, default=None, help="layer count (default: N/2)")
    p.add_argument("--orders", type=lambda s: [int(x) for x in s.split(",")], default=None)
    p.add_argument("--shots", type=int, default=None, help="add a sampled-feature variant")
    p.set_defaults(func=cmd_narma)

    p = sub.add_parser("classify", help="ablation grid and learning curves")
    _add_common(p)
    _add_dataset_flags(p)
    p.add_argument("--qubits", type=int, default=12)
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--lambda-cutoff", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--features", choices=("x", "pauli", "eigentask", "eigentask-cut"), default="pauli")
    p.add_argument("--scaling", choices=("unit", "signal", "nsr"), default="unit")
    p.add_argument("--weight", type=int, choices=(1, 2), default=1)
    p.add_argument(
        "--bootstrap",
        type=int,
        default=0,
        help=f"bootstrap resamples for CIs (0 = off, else >= {MIN_BOOTSTRAP_RESAMPLES})",
    )
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eigentasks", help="cutoff sweep: retained counts, capacity, metrics")
    _add_common(p)
    _add_dataset_flags(p)
    p.add_argument("--qubits", type=int, default=12)
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--weight", type=int, choices=(1, 2), default=2)
    p.add_argument(
        "--lambdas", type=lambda s: [float(x) for x in s.split(",")], default=None
    )
    p.set_defaults(func=cmd_eigentasks)

    p = sub.add_parser("tune", help="multi-objective random hyperparameter search")
    _add_common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--realizations", type=int, default=DEFAULT_REALIZATIONS)
    p.add_argument(
        "--architectures",
        default=",".join(f"{n}x{l}" for n, l in DEFAULT_ARCHITECTURES),
        help="comma list of NxLAYERS pairs",
    )
    p.add_argument("--objectives", default=",".join(OBJECTIVE_NAMES))
    p.add_argument("--no-resume", action="store_true", help="re-evaluate existing trials")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("pareto", help="extract the Pareto front from a trial store")
    _add_common(p)
    p.add_argument("--store", required=True, help="trial store directory from a tune run")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("synth-data", help="write a synthetic satellite table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=860)
    p.add_argument("--out", required=True, help="output file in whitespace table format")
    p.set_defaults(func=cmd_synth_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that is a user error in our scheme
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
