"""Command-line renderer: one run directory in, figure files out.

Discovers which tables a run directory contains and renders every figure
kind they support. Read-only over the run directory; images land in a
separate output directory (default ``<run>/figures``).

Exit codes: 0 success, 1 usage or input error, 2 internal error.
"""
import argparse
import json
import os
import sys
import traceback

from .figures import FigureSpec, render
from .tables import MANIFEST_SCHEMA


def _load_manifest(run_dir):
    path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(path):
        return {}
    with open(path) as f:
        manifest = json.load(f)
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise ValueError(
            f"{path}: unknown manifest schema {manifest.get('schema')!r}"
        )
    return manifest


def discover(run_dir, out_dir) -> list:
    """Figure specs for every renderable table in the run directory."""
    manifest = _load_manifest(run_dir)

    def have(name):
        return os.path.exists(os.path.join(run_dir, name))

    def path(name):
        return os.path.join(run_dir, name)

    def stem(name):
        return os.path.join(out_dir, name)

    specs = []
    if have("r2_vs_order.csv"):
        window = manifest.get("markers", {}).get("window")
        if window is None:
            raise ValueError(
                f"{run_dir}: r2_vs_order.csv present but the manifest has no window marker"
            )
        specs.append(
            FigureSpec("r2_vs_order", (path("r2_vs_order.csv"),), stem("r2_vs_order"),
                       marker=float(window))
        )
    for name in ("learning_train", "learning_shots"):
        if have(name + ".csv"):
            specs.append(
                FigureSpec("learning_curve", (path(name + ".csv"),), stem(name))
            )
    if have("ablation.csv"):
        specs.append(FigureSpec("ablation", (path("ablation.csv"),), stem("ablation")))
    if have("lambda_sweep.csv"):
        for required in ("retained_counts.csv", "rec_curve.csv"):
            if not have(required):
                raise ValueError(f"{run_dir}: lambda_sweep.csv present without {required}")
        specs.append(
            FigureSpec(
                "sweep",
                (path("lambda_sweep.csv"), path("retained_counts.csv"), path("rec_curve.csv")),
                stem("sweep"),
            )
        )
    if have("pareto_front.csv"):
        specs.append(FigureSpec("pareto", (path("pareto_front.csv"),), stem("pareto")))
    if not specs:
        raise ValueError(f"{run_dir}: no renderable tables found")
    return specs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qelm-report",
        description="Render figures from a qelm run directory",
    )
    parser.add_argument("--run", required=True, help="run directory with CSV tables")
    parser.add_argument(
        "--out-dir", default=None, help="image directory (default: <run>/figures)"
    )
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    out_dir = args.out_dir or os.path.join(args.run, "figures")
    try:
        specs = discover(args.run, out_dir)
        os.makedirs(out_dir, exist_ok=True)
        for spec in specs:
            for written in render(spec):
                print(written)
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
