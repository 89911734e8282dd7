import csv
import json

import pytest


def write_csv(path, schema, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema: {schema}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_manifest(run, markers):
    with open(run / "manifest.json", "w") as f:
        json.dump({"schema": "qelm.manifest/1", "markers": markers}, f)


@pytest.fixture
def run_dir(tmp_path):
    """A fixture run directory holding one table of every renderable kind."""
    run = tmp_path / "run"
    run.mkdir()
    write_manifest(run, {"window": 4})

    write_csv(
        run / "r2_vs_order.csv",
        "qelm.r2_vs_order/1",
        ("order", "r2_train", "r2_test"),
        [(n, 0.995 - 0.01 * n, 0.99 - 0.2 * n) for n in (1, 2, 3, 4)],
    )
    write_csv(
        run / "learning_train.csv",
        "qelm.learning_curve/1",
        ("axis", "x", "f1_macro", "f1_lo", "f1_hi", "accuracy"),
        [
            ("train_size", 100, 0.61, 0.55, 0.66, 0.70),
            ("train_size", 200, 0.68, 0.63, 0.72, 0.76),
            ("train_size", 400, 0.72, 0.68, 0.75, 0.80),
        ],
    )
    write_csv(
        run / "learning_shots.csv",
        "qelm.learning_curve/1",
        ("axis", "x", "f1_macro", "f1_lo", "f1_hi", "accuracy"),
        [
            ("shots", 100, 0.40, "", "", 0.52),
            ("shots", 1000, 0.58, "", "", 0.66),
            ("shots", 10000, 0.71, "", "", 0.78),
        ],
    )

    cells = []
    value = 0.50
    for features in ("x", "pauli", "eigentask", "eigentask-cut"):
        for weight in (1, 2):
            for scaling in ("unit", "scaled"):
                value += 0.01
                cells.append(
                    (features, weight, scaling, round(value, 3),
                     round(value - 0.04, 3), round(value + 0.04, 3),
                     round(value + 0.05, 3), 12 * weight)
                )
    cells.append(("baseline-majority", 0, "-", 0.08, "", "", 0.24, 0))
    cells.append(("baseline-ridge-raw", 0, "-", 0.35, "", "", 0.44, 36))
    write_csv(
        run / "ablation.csv",
        "qelm.ablation/1",
        ("features", "weight", "scaling", "f1_macro", "f1_lo", "f1_hi", "accuracy", "n_features"),
        cells,
    )

    lams = (0.1, 0.5, 1.0, 3.0, 10.0)
    write_csv(
        run / "lambda_sweep.csv",
        "qelm.lambda_sweep/1",
        ("lam", "f1_macro", "accuracy"),
        [(l, 0.5 + 0.02 * i, 0.6 + 0.02 * i) for i, l in enumerate(lams)],
    )
    write_csv(
        run / "retained_counts.csv",
        "qelm.retained/1",
        ("lam", "n_retained"),
        [(l, 10 + 8 * i) for i, l in enumerate(lams)],
    )
    write_csv(
        run / "rec_curve.csv",
        "qelm.rec/1",
        ("lam", "c_lambda", "c_total"),
        [(l, 8.0 + 6.0 * i, 40.0) for i, l in enumerate(lams)],
    )

    hp = (0.2, 0.707, 0.031, 0.683, 0.034, 0.237, 0.038)
    write_csv(
        run / "pareto_front.csv",
        "qelm.pareto/1",
        ("trial_id", "pareto_rank", "bond_dimension", "narma_score_noiseless",
         "narma_score_noisy", "variability",
         "input_strength", "kick_mean", "kick_std", "field_mean", "field_std",
         "coupling_mean", "coupling_std"),
        [
            (0, 0, 6.0, 3.2, 1.4, 0.020) + hp,
            (1, 0, 5.0, 3.5, 1.2, 0.015) + hp,
            (2, 1, 4.0, 2.8, 1.0, 0.012) + hp,
            (3, 1, 3.0, 2.5, 0.9, 0.010) + hp,
            (4, 2, 2.0, 2.0, 0.7, 0.008) + hp,
            (5, 0, 4.5, 3.0, 1.5, 0.022) + hp,
        ],
    )
    return run
