"""Static report figures (SVG) rendered from the same data as the CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import MainEffectsTable
from .design import FactorSpace


def save_loss_plot(train_losses, val_losses, path, title: str = "Loss convergence") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    epochs = np.arange(1, len(train_losses) + 1)
    ax.plot(epochs, train_losses, label="train")
    ax.plot(epochs, val_losses, label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE loss")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_main_effects_plot(table: MainEffectsTable, space: FactorSpace, path) -> None:
    """One panel per factor: mean response at each level, winner highlighted."""
    k = table.n_factors
    fig, axes = plt.subplots(1, k, figsize=(2.4 * k, 3.2), sharey=True)
    axes = np.atleast_1d(axes)
    for f, (ax, factor) in enumerate(zip(axes, space.factors)):
        means = table.level_means[f]
        ax.plot(range(3), means, "o-")
        best = int(table.selected_levels[f])
        ax.plot([best], [means[best]], "r*", markersize=12)
        ax.set_xticks(range(3))
        ax.set_xticklabels([str(lvl) for lvl in factor.levels], fontsize=8)
        ax.set_title(factor.name)
        ax.axhline(table.grand_mean, color="gray", linewidth=0.6, linestyle="--")
    axes[0].set_ylabel("mean response")
    fig.suptitle("Main effects")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_scatter_plot(y, y_pred, path, title: str = "Predicted vs actual") -> None:
    y = np.asarray(y).ravel()
    y_pred = np.asarray(y_pred).ravel()
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(y, y_pred, ".", markersize=2, alpha=0.4)
    lo, hi = min(y.min(), y_pred.min()), max(y.max(), y_pred.max())
    ax.plot([lo, hi], [lo, hi], "k-", linewidth=0.8)
    ax.set_xlabel("actual")
    ax.set_ylabel("predicted")
    ax.set_title(title)
    ax.set_aspect("equal", adjustable="box")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
