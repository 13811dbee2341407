"""Figure rendering for the report path; every plot lands next to the
delimited output it illustrates."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_OPTS = dict(dpi=120, bbox_inches="tight", metadata={"Software": "barriers"})


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def flow_figure(trace, path) -> None:
    fig, axes = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
    it = trace.iterations
    axes[0].plot(it, trace.energy, color="tab:blue")
    axes[0].set_ylabel("energy")
    axes[1].semilogy(it, np.maximum(trace.max_tension, 1e-300), color="tab:red")
    axes[1].set_ylabel("max tension")
    axes[2].plot(it, trace.oscillation, color="tab:green")
    axes[2].set_ylabel("oscillation")
    axes[2].set_xlabel("iteration")
    axes[0].set_title(f"flow: {trace.status} after {trace.iters} iterations")
    _finish(fig, path)


def disconnect_figure(points, labels, path) -> None:
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(111, projection="3d")
    ax.scatter(points[:, 0], points[:, 1], points[:, 2], c=labels, s=3, cmap="coolwarm")
    ax.set_title(f"{labels.max() + 1} components (first 3 coordinates)")
    _finish(fig, path)


def margin_histogram(values, threshold, path, xlabel="barrier distance") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=60, color="tab:blue", alpha=0.8)
    ax.axvline(threshold, color="tab:red", linestyle="--", label=f"epsilon = {threshold:g}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    ax.legend()
    _finish(fig, path)


def residual_histogram(residuals, path, title="round-trip residuals") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    vals = np.log10(np.maximum(np.asarray(residuals), 1e-300))
    ax.hist(vals, bins=50, color="tab:purple", alpha=0.8)
    ax.set_xlabel("log10 residual")
    ax.set_ylabel("count")
    ax.set_title(title)
    _finish(fig, path)


def angle_scatter(sums, gaps, epsilon, member, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    member = np.asarray(member, dtype=bool)
    ax.scatter(sums[member], gaps[member], s=8, color="tab:green", label="inside")
    ax.scatter(sums[~member], gaps[~member], s=8, color="tab:red", label="outside")
    ax.axhline(epsilon, color="k", linestyle=":", linewidth=1)
    ax.axvline(np.pi - epsilon, color="k", linestyle=":", linewidth=1)
    ax.set_xlabel("theta1 + theta2")
    ax.set_ylabel("theta1 - theta2")
    ax.legend()
    _finish(fig, path)


def geodesic_figure(ts, distances, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ts, distances, color="tab:blue", label="measured distance")
    ax.plot(ts, ts, color="k", linestyle=":", label="arc length")
    ax.set_xlabel("t")
    ax.set_ylabel("distance from start")
    ax.legend()
    _finish(fig, path)


def audit_heatmap(params, margins, grid, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    if params.shape[1] == 2:
        M = margins.reshape(grid, grid)
        im = ax.imshow(
            M.T,
            origin="lower",
            extent=(params[:, 0].min(), params[:, 0].max(), params[:, 1].min(), params[:, 1].max()),
            aspect="auto",
            cmap="RdYlGn",
        )
        fig.colorbar(im, ax=ax, label="signed margin")
        ax.set_xlabel("u")
        ax.set_ylabel("v")
    else:
        ax.plot(margins, color="tab:blue")
        ax.set_xlabel("grid index")
        ax.set_ylabel("signed margin")
    worst = np.argmin(margins)
    ax.set_title(f"min margin {margins[worst]:.6f}")
    _finish(fig, path)
