"""Build and save the five figure kinds.

Kinds: ``pareto`` (front projections over objective pairs), ``r2_vs_order``
(score against task order with the window-size marker), ``learning_curve``
(metric against training rows or shots, CI band when present), ``ablation``
(readout grid as grouped bars over baseline lines), and ``sweep`` (cutoff
sweep metrics, retained counts, and capacity, with the lambda = 1 marker).

Images are deterministic: bundled style, fixed DPI, pinned SVG hash salt,
no embedded dates. Reruns on identical inputs are byte-identical.
"""
import math
from dataclasses import dataclass
from importlib import resources
from itertools import combinations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .tables import read_table

KINDS = ("pareto", "r2_vs_order", "learning_curve", "ablation", "sweep")

PNG_DPI = 150
_SVG_SALT = "qelm-report"
_STYLE = resources.files(__package__) / "style.mplstyle"

# trailing hyperparameter columns of the pareto table; everything between
# the rank and these is an objective
_HP_FIELDS = (
    "input_strength",
    "kick_mean",
    "kick_std",
    "field_mean",
    "field_std",
    "coupling_mean",
    "coupling_std",
)

_AXIS_LABELS = {"train_size": "training rows", "shots": "measurement shots"}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw and where to put it.

    ``csv_paths`` lists the kind's input tables (three for ``sweep``, one
    otherwise). ``output`` is an extension-free stem; ``.png`` and ``.svg``
    are appended. ``marker`` carries the window size for ``r2_vs_order``
    plots; sweep plots always mark lambda = 1. ``series`` optionally
    restricts which value columns are drawn.
    """

    kind: str
    csv_paths: tuple
    output: str
    marker: float | None = None
    series: tuple = ()


def _pick_series(spec, header, candidates):
    series = spec.series or tuple(c for c in candidates if c in header)
    for name in series:
        if name not in header:
            raise ValueError(f"{spec.csv_paths[0]}: missing column {name!r}")
    return series


def _build_r2_vs_order(spec):
    table = read_table(spec.csv_paths[0], "r2_vs_order")
    if spec.marker is None:
        raise ValueError("r2_vs_order needs the window size for its marker")
    orders = table.floats("order")
    series = _pick_series(
        spec, table.header, ("r2_train", "r2_test", "r2_train_shots", "r2_test_shots")
    )
    fig, ax = plt.subplots()
    for name in series:
        ax.plot(orders, table.floats(name), marker="o", label=name.replace("_", " "))
    ax.axvline(
        spec.marker, linestyle=":", color="0.3", gid="marker-window-size",
        label=f"window size {spec.marker:g}",
    )
    ax.set_xlabel("task order n")
    ax.set_ylabel("R^2")
    ax.legend()
    return fig


def _build_learning_curve(spec):
    table = read_table(spec.csv_paths[0], "learning_curve")
    axes = set(table.column("axis"))
    if len(axes) != 1:
        raise ValueError(f"{table.path}: mixed axis values {sorted(axes)}")
    axis = axes.pop()
    x = table.floats("x")
    series = _pick_series(spec, table.header, ("f1_macro", "accuracy"))
    fig, ax = plt.subplots()
    for name in series:
        ax.plot(x, table.floats(name), marker="o", label=name.replace("_", " "))
    lo, hi = table.maybe_floats("f1_lo"), table.maybe_floats("f1_hi")
    if None not in lo and None not in hi:
        ax.fill_between(x, lo, hi, alpha=0.25, linewidth=0, label="f1 CI")
    if axis == "shots":
        ax.set_xscale("log")
    ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("test score")
    ax.legend()
    return fig


def _build_ablation(spec):
    table = read_table(spec.csv_paths[0], "ablation")
    features = table.column("features")
    weights = table.column("weight")
    scalings = table.column("scaling")
    f1 = table.floats("f1_macro")
    lo, hi = table.maybe_floats("f1_lo"), table.maybe_floats("f1_hi")

    cells = [i for i, name in enumerate(features) if not name.startswith("baseline-")]
    baselines = [i for i in range(len(table)) if i not in cells]
    if not cells:
        raise ValueError(f"{table.path}: no readout cells, only baselines")

    groups = []  # (features, weight) in order of first appearance
    for i in cells:
        key = (features[i], weights[i])
        if key not in groups:
            groups.append(key)
    scaling_order = []
    for i in cells:
        if scalings[i] not in scaling_order:
            scaling_order.append(scalings[i])

    fig, ax = plt.subplots(figsize=(9.0, 4.5))
    span = len(scaling_order) + 1
    cycle = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    seen = set()
    for i in cells:
        g = groups.index((features[i], weights[i]))
        s = scaling_order.index(scalings[i])
        color = cycle[s % len(cycle)]
        err = None
        if lo[i] is not None and hi[i] is not None:
            err = [[f1[i] - lo[i]], [hi[i] - f1[i]]]
        ax.bar(
            g * span + s, f1[i], width=0.9, color=color, yerr=err, capsize=2,
            label=scalings[i] if scalings[i] not in seen else None,
        )
        seen.add(scalings[i])
    for style, i in zip(("--", ":"), baselines):
        ax.axhline(f1[i], linestyle=style, color="0.3", label=features[i])
    centers = [g * span + (len(scaling_order) - 1) / 2 for g in range(len(groups))]
    ax.set_xticks(centers)
    ax.set_xticklabels([f"{name}\nw{weight}" for name, weight in groups])
    ax.set_ylabel("test F1 macro")
    ax.legend(ncols=2)
    return fig


def _build_sweep(spec):
    sweep = read_table(spec.csv_paths[0], "lambda_sweep")
    retained = read_table(spec.csv_paths[1], "retained")
    capacity = read_table(spec.csv_paths[2], "rec")
    lam = sweep.floats("lam")
    if retained.floats("lam") != lam or capacity.floats("lam") != lam:
        raise ValueError("sweep tables disagree on the lambda grid")

    series = _pick_series(spec, sweep.header, ("f1_macro", "accuracy"))
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 6.0))
    for name in series:
        top.plot(lam, sweep.floats(name), marker="o", label=name.replace("_", " "))
    top.axvline(
        1.0, linestyle="--", color="0.3", gid="marker-lambda-1", label="lambda = 1"
    )
    top.set_ylabel("test score")
    top.legend()

    bottom.step(lam, retained.floats("n_retained"), where="post", label="retained")
    bottom.plot(lam, capacity.floats("c_lambda"), marker=".", label="capacity")
    bottom.plot(lam, capacity.floats("c_total"), linestyle=":", label="capacity, no cutoff")
    bottom.axvline(1.0, linestyle="--", color="0.3")
    bottom.set_xscale("log")
    bottom.set_xlabel("cutoff lambda")
    bottom.set_ylabel("count / capacity")
    bottom.legend()
    return fig


def _build_pareto(spec):
    table = read_table(spec.csv_paths[0], "pareto")
    names = spec.series or tuple(
        c for c in table.header[2:] if c not in _HP_FIELDS
    )
    if len(names) < 2:
        raise ValueError(f"{table.path}: need at least two objectives, found {names}")
    for name in names:
        if name not in table.header:
            raise ValueError(f"{table.path}: missing column {name!r}")
    ranks = [int(v) for v in table.column("pareto_rank")]
    values = {name: table.floats(name) for name in names}

    pairs = list(combinations(names, 2))
    ncols = min(3, len(pairs))
    nrows = math.ceil(len(pairs) / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 3.0 * nrows), squeeze=False
    )
    front = [i for i, r in enumerate(ranks) if r == 0]
    rest = [i for i, r in enumerate(ranks) if r != 0]
    for ax, (a, b) in zip(axes.flat, pairs):
        ax.scatter([values[a][i] for i in rest], [values[b][i] for i in rest],
                   s=12, color="0.6", label="dominated")
        ax.scatter([values[a][i] for i in front], [values[b][i] for i in front],
                   s=28, marker="*", color="C3", label="front")
        ax.set_xlabel(a.replace("_", " "))
        ax.set_ylabel(b.replace("_", " "))
    for ax in axes.flat[len(pairs):]:
        ax.set_visible(False)
    axes.flat[0].legend()
    fig.tight_layout()
    return fig


_BUILDERS = {
    "pareto": _build_pareto,
    "r2_vs_order": _build_r2_vs_order,
    "learning_curve": _build_learning_curve,
    "ablation": _build_ablation,
    "sweep": _build_sweep,
}


def build_figure(spec: FigureSpec):
    """Validate inputs and return the matplotlib figure, unsaved."""
    if spec.kind not in _BUILDERS:
        raise ValueError(f"unknown figure kind {spec.kind!r}, expected one of {KINDS}")
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> list:
    """Render one figure to ``<output>.png`` and ``<output>.svg``."""
    with plt.style.context(str(_STYLE)), matplotlib.rc_context({"svg.hashsalt": _SVG_SALT}):
        fig = build_figure(spec)
        png, svg = spec.output + ".png", spec.output + ".svg"
        fig.savefig(png, dpi=PNG_DPI, metadata={"Software": "qelm-report"})
        fig.savefig(svg, metadata={"Date": None})
        plt.close(fig)
    return [png, svg]
