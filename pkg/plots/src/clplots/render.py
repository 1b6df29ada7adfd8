"""Figure rendering: parameter trajectories, decay rates, forgetting/regret.

Rendering is deterministic for fixed inputs: fixed figure geometry, a pinned
svg hash salt, and no embedded timestamps, so re-rendering a file yields
identical bytes.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "clplots"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .io import SchemaError, read_metrics, read_summary, read_trajectory  # noqa: E402

KINDS = ("trajectory", "rates", "forgetting-regret")

MAX_PATH_POINTS = 500
FIGSIZE = (7.0, 5.0)
DPI = 120


def _save(fig, out_path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out_path.suffix.lower() == ".svg" else None
    fig.savefig(out_path, dpi=DPI, metadata=metadata)
    plt.close(fig)


def _subsample(stages, path):
    if len(stages) <= MAX_PATH_POINTS:
        return stages, path
    idx = np.unique(np.linspace(0, len(stages) - 1, MAX_PATH_POINTS).astype(int))
    return stages[idx], path[idx]


def _fit_slope(stages, values):
    """Log-log slope over the trailing half; None when the values are unusable."""
    mask = stages >= stages[-1] / 2
    t, v = stages[mask], values[mask]
    if len(t) < 5 or np.any(v <= 0) or not np.all(np.isfinite(v)):
        return None
    return float(np.polyfit(np.log(t), np.log(v), 1)[0])


def render_trajectory(in_csv, out_path, summary_path=None) -> None:
    """Estimate path in the plane, with target and meta parameters overlaid."""
    stages, path = read_trajectory(in_csv)
    if path.shape[1] != 2:
        raise SchemaError(f"{in_csv}: trajectory plots need d = 2, found d = {path.shape[1]}")
    stages, path = _subsample(stages, path)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(path[:, 0], path[:, 1], "-", color="tab:blue", lw=1.2, alpha=0.8,
            label="estimate path")
    ax.scatter(path[0, 0], path[0, 1], marker="o", color="tab:blue", zorder=5, label="start")
    ax.scatter(path[-1, 0], path[-1, 1], marker="s", color="tab:red", zorder=5, label="final")

    if summary_path is not None:
        summary = read_summary(summary_path)
        stream = summary.get("stream", {})
        target = stream.get("target")
        if target is not None and len(target) == 2:
            ax.scatter([target[0]], [target[1]], marker="*", s=220, color="gold",
                       edgecolor="black", zorder=6, label="target")
        for i, meta in enumerate(stream.get("meta_parameters") or []):
            ax.scatter([meta[0]], [meta[1]], marker="X", s=90, color="tab:green",
                       zorder=6, label="meta parameters" if i == 0 else None)

    ax.set_xlabel("$w_1$")
    ax.set_ylabel("$w_2$")
    ax.set_title("parameter estimate trajectory")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    _save(fig, out_path)


def render_rates(in_csv, out_path) -> None:
    """Log-log decay of the positive gap series, annotated with fitted slopes."""
    cols = read_metrics(in_csv)
    stages = cols["t"].astype(float)
    series = {
        "regret - baseline": cols["regret"] - cols["l_star"],
        "forgetting - baseline": cols["forgetting"] - cols["l_star"],
        "squared estimate error": cols["est_err_sq"],
    }
    fig, ax = plt.subplots(figsize=FIGSIZE)
    drew = False
    for name, values in series.items():
        ok = (values > 0) & np.isfinite(values)
        if ok.sum() < 5:
            continue
        slope = _fit_slope(stages[ok], values[ok])
        label = name if slope is None else f"{name} (slope {slope:+.2f})"
        ax.loglog(stages[ok], values[ok], label=label, lw=1.3)
        drew = True
    if not drew:
        plt.close(fig)
        raise SchemaError(f"{in_csv}: no positive series to draw on log axes")
    ax.set_xlabel("stage $t$")
    ax.set_ylabel("gap")
    ax.set_title("decay rates (trailing-half log-log slopes)")
    ax.legend(loc="best")
    ax.grid(alpha=0.3, which="both")
    _save(fig, out_path)


def render_forgetting_regret(in_csv, out_path) -> None:
    """Forgetting/regret against the optimal-loss baselines over stages."""
    cols = read_metrics(in_csv)
    stages = cols["t"]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(stages, cols["forgetting"], label="forgetting $F_t$", lw=1.3)
    ax.plot(stages, cols["regret"], label="regret $R_t$", lw=1.3)
    ax.plot(stages, cols["l_star"], label="baseline at shared target", ls="--", lw=1.1)
    if np.any(cols["p_star"] != cols["l_star"]):
        ax.plot(stages, cols["p_star"], label="baseline at per-task optima", ls=":", lw=1.1)
    ax.set_xlabel("stage $t$")
    ax.set_ylabel("average loss over seen tasks")
    ax.set_title("forgetting and regret")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    _save(fig, out_path)


def render(kind: str, in_csv, out_path, summary_path=None) -> None:
    """Dispatch on the figure kind; writes the image file."""
    if kind == "trajectory":
        render_trajectory(in_csv, out_path, summary_path=summary_path)
    elif kind == "rates":
        render_rates(in_csv, out_path)
    elif kind == "forgetting-regret":
        render_forgetting_regret(in_csv, out_path)
    else:
        raise SchemaError(f"unknown plot kind {kind!r}; expected one of {KINDS}")
