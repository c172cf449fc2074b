"""Evaluation metrics, main-effects analysis, and optimum selection.

The design response is the pooled R-squared (in percent) over all output
components jointly; per-component metrics cover single stiffness entries.
Optimum selection takes, per factor, the level with the highest mean
response, breaking ties toward the lowest level index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Any

import numpy as np

from .design import FactorSpace, HyperConfig, OrthogonalArray


class MetricsError(ValueError):
    """Raised when a metric is undefined (e.g. R-squared of a constant target)."""


@dataclass(frozen=True)
class EvaluationMetrics:
    """R-squared (percent), MAE, MSE, RMSE."""

    r2: float
    mae: float
    mse: float
    rmse: float

    def as_dict(self) -> dict[str, float]:
        return {"r2": self.r2, "mae": self.mae, "mse": self.mse, "rmse": self.rmse}


def compute_metrics(y, y_pred) -> EvaluationMetrics:
    """Pooled metrics over every sample and output component.

    R2 = (1 - SS_res/SS_tot) * 100 with SS_tot about the mean of all actual
    values; MAE/MSE/RMSE are plain means over all entries.
    """
    y = np.asarray(y, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: actual {y.shape} vs predicted {y_pred.shape}")
    if y.shape[0] < 2:
        raise ValueError(f"need at least 2 observations, got {y.shape[0]}")
    residual = y_pred - y
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise MetricsError("R-squared undefined: actual values are constant")
    mse = float(np.mean(residual**2))
    return EvaluationMetrics(
        r2=(1.0 - ss_res / ss_tot) * 100.0,
        mae=float(np.mean(np.abs(residual))),
        mse=mse,
        rmse=float(np.sqrt(mse)),
    )


def per_component_metrics(y, y_pred, component: int) -> EvaluationMetrics:
    """compute_metrics restricted to one output column."""
    y = np.asarray(y, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if not 0 <= component < y.shape[1]:
        raise ValueError(f"component {component} out of range 0..{y.shape[1] - 1}")
    return compute_metrics(y[:, component], y_pred[:, component])


def sn_larger_better(values) -> float:
    """Larger-is-better signal-to-noise ratio: -10*log10(mean(1/y^2)) in dB."""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0):
        raise ValueError("larger-is-better S/N requires strictly positive responses")
    return float(-10.0 * np.log10(np.mean(1.0 / values**2)))


@dataclass(frozen=True)
class MainEffectsTable:
    """Per-factor, per-level mean responses and the selected level per factor."""

    level_means: np.ndarray  # (n_factors, 3)
    selected_levels: np.ndarray  # (n_factors,)
    sn_means: np.ndarray | None = None  # (n_factors, 3) when S/N analysis is on

    @property
    def n_factors(self) -> int:
        return self.level_means.shape[0]

    @property
    def grand_mean(self) -> float:
        return float(self.level_means.mean())


def main_effects(
    array: OrthogonalArray, responses, with_sn: bool = False
) -> MainEffectsTable:
    """Mean response per (factor, level) over the runs that used that level."""
    responses = np.asarray(responses, dtype=np.float64)
    if responses.shape != (array.n_runs,):
        raise ValueError(
            f"responses length {responses.shape} does not match {array.n_runs} runs"
        )
    means = np.empty((array.n_factors, 3))
    sn = np.empty((array.n_factors, 3)) if with_sn else None
    for f in range(array.n_factors):
        for lvl in range(3):
            pooled = responses[array.rows[:, f] == lvl]
            means[f, lvl] = pooled.mean()
            if with_sn:
                sn[f, lvl] = sn_larger_better(pooled)
    # argmax takes the first maximum, i.e. ties break toward the lowest level
    return MainEffectsTable(means, means.argmax(axis=1), sn)


def select_optimum(table: MainEffectsTable, space: FactorSpace) -> dict[str, Any]:
    """Decode the per-factor winning levels through the factor payloads."""
    if table.n_factors != len(space):
        raise ValueError(
            f"table has {table.n_factors} factors but space has {len(space)}"
        )
    return {
        factor.name: factor.levels[int(lvl)]
        for factor, lvl in zip(space.factors, table.selected_levels)
    }


def select_optimum_config(table: MainEffectsTable, space: FactorSpace) -> HyperConfig:
    """select_optimum for the standard hyperparameter space."""
    return HyperConfig.from_mapping(select_optimum(table, space))


def save_responses(responses, path) -> None:
    """Write the per-run response vector as CSV: ``run,response``."""
    responses = np.asarray(responses, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "response"])
        for i, r in enumerate(responses, start=1):
            writer.writerow([i, repr(float(r))])


def load_responses(path, expected_runs: int | None = None) -> np.ndarray:
    """Read a ``run,response`` CSV back into a run-ordered vector."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["run", "response"]:
            raise ValueError(f"{path}: expected header 'run,response'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                rows.append((int(rec[0]), float(rec[1])))
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{lineno}: cannot parse response row {rec!r}") from None
    rows.sort(key=lambda t: t[0])
    responses = np.array([r for _, r in rows])
    if expected_runs is not None and len(responses) != expected_runs:
        raise ValueError(
            f"{path}: expected {expected_runs} responses, found {len(responses)}"
        )
    return responses


def main_effects_to_csv(
    table: MainEffectsTable, space: FactorSpace, path
) -> None:
    """Export ``factor,level,mean_response[,sn_db]`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["factor", "level", "mean_response"]
        if table.sn_means is not None:
            header.append("sn_db")
        writer.writerow(header)
        for f, factor in enumerate(space.factors):
            for lvl in range(3):
                row = [factor.name, factor.levels[lvl], repr(float(table.level_means[f, lvl]))]
                if table.sn_means is not None:
                    row.append(repr(float(table.sn_means[f, lvl])))
                writer.writerow(row)


# Published per-run train R-squared responses (percent) for the 27-run design,
# in run order. Shipped as a fixture so the analysis stage is testable without
# any training; a CSV copy lives in data/table4_responses.csv.
REFERENCE_RESPONSES: tuple[float, ...] = (
    68.295, 67.398, 57.679, 83.541, 78.183, 46.093, 71.553, 67.558, 31.665,
    79.734, 81.528, 79.261, 93.682, 89.224, 74.192, 92.747, 89.989, 36.973,
    80.197, 78.136, 29.542, 92.436, 92.835, 85.405, 98.680, 92.617, 79.556,
)


def reference_responses_path():
    """Path of the packaged reference-responses CSV fixture."""
    from importlib.resources import files

    return files("oatune").joinpath("data/table4_responses.csv")
