"""Per-configuration training with patience-based early stopping, plus the
harness that executes every run of a design.

Each run is deterministic from a seed derived from (base seed, run index),
so the full design gives identical responses whether runs execute
sequentially or across worker processes, and any single run can be
reproduced in isolation.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import EvaluationMetrics, compute_metrics
from .design import FactorSpace, HyperConfig, OrthogonalArray, decode_hyperconfig
from .network import MLPModel, backward, forward, init_weights, mse_loss
from .optim import TrainingError, apply_step, init_state
from .pipeline import Dataset, MinMaxScaler, N_INPUTS, SplitSpec, fit_minmax, split_dataset

CRITERIA = ("train-r2", "val-r2")


@dataclass(frozen=True)
class TrainSettings:
    """Knobs shared by every run of a design."""

    max_epochs: int = 5000
    patience: int = 200
    batch_size: int = 32
    base_seed: int = 0
    criterion: str = "train-r2"

    def __post_init__(self):
        if self.max_epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ValueError(
                f"max_epochs, patience, batch_size must be >= 1, got {self}"
            )
        if self.base_seed < 0:
            raise ValueError(f"base seed must be nonnegative, got {self.base_seed}")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")


@dataclass(frozen=True)
class SplitData:
    """Normalized train/validation/test matrices shared by all runs."""

    x_train: np.ndarray = field(repr=False)
    y_train: np.ndarray = field(repr=False)
    x_val: np.ndarray = field(repr=False)
    y_val: np.ndarray = field(repr=False)
    x_test: np.ndarray = field(repr=False)
    y_test: np.ndarray = field(repr=False)


def prepare_splits(
    dataset: Dataset, split: SplitSpec, scaler_fit: str = "full"
) -> tuple[SplitData, MinMaxScaler]:
    """Split once, fit the scaler (on the full data by default, train-only in
    leakage-safe mode), and normalize all three subsets."""
    if scaler_fit not in ("full", "train"):
        raise ValueError(f"scaler_fit must be 'full' or 'train', got {scaler_fit!r}")
    idx = split_dataset(len(dataset), split)
    fit_rows = dataset.values if scaler_fit == "full" else dataset.values[idx.train]
    scaler = fit_minmax(fit_rows)
    normalized = scaler.transform(dataset.values)
    parts = []
    for rows in (idx.train, idx.val, idx.test):
        sub = normalized[rows]
        parts.extend([sub[:, :N_INPUTS], sub[:, N_INPUTS:]])
    return SplitData(*parts), scaler


class EarlyStopping:
    """Stop after `patience` epochs without strict validation-loss improvement,
    remembering the best epoch and a snapshot of the best parameters."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = 0
        self.wait = 0
        self.best_params = None

    def update(self, epoch: int, val_loss: float, model: MLPModel | None = None) -> bool:
        """Record one epoch; returns True when training should stop."""
        if not np.isfinite(val_loss):
            raise TrainingError(f"non-finite validation loss at epoch {epoch}")
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.wait = 0
            if model is not None:
                self.best_params = model.copy_params()
            return False
        self.wait += 1
        return self.wait >= self.patience


@dataclass
class TrainResult:
    """Outcome of one run: restored-best model, histories, metrics, response."""

    config: HyperConfig
    seed: tuple[int, int]
    stopped_epoch: int
    best_epoch: int
    train_losses: list[float]
    val_losses: list[float]
    metrics: dict[str, EvaluationMetrics]
    response: float
    failed: bool = False
    wall_time: float = 0.0
    model: MLPModel | None = field(default=None, repr=False)


def run_seed(base_seed: int, run_index: int) -> tuple[int, int]:
    """Seed material for one run; feeds numpy's SeedSequence."""
    return (base_seed, run_index)


def _response_from(metrics: dict[str, EvaluationMetrics], criterion: str) -> float:
    key = "train" if criterion == "train-r2" else "val"
    return metrics[key].r2


def train_model(
    config: HyperConfig,
    data: SplitData,
    settings: TrainSettings,
    seed: tuple[int, int] | int | None = None,
) -> TrainResult:
    """Train one configuration with mini-batch updates and early stopping.

    Divergence (non-finite loss) does not raise: the run comes back flagged
    with response 0 so a full design survives bad cells.
    """
    seed = run_seed(settings.base_seed, 0) if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    start = time.perf_counter()

    n_in = data.x_train.shape[1]
    n_out = data.y_train.shape[1]
    sizes = (n_in,) + (config.neurons,) * config.hidden_layers + (n_out,)
    model = init_weights(sizes, config.activation, rng)
    params = model.weights + model.biases
    state = init_state(config.optimizer, params)
    stopper = EarlyStopping(settings.patience)

    n_train = data.x_train.shape[0]
    train_losses: list[float] = []
    val_losses: list[float] = []
    failed = False
    epoch = 0
    # divergence is a handled outcome (flagged run), so silence the overflow
    # chatter that a runaway learning rate produces on the way there
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, settings.max_epochs + 1):
            perm = rng.permutation(n_train)
            for lo in range(0, n_train, settings.batch_size):
                batch = perm[lo:lo + settings.batch_size]
                grads_w, grads_b, _ = backward(
                    model, data.x_train[batch], data.y_train[batch]
                )
                try:
                    apply_step(state, params, grads_w + grads_b, config.learning_rate)
                except TrainingError:
                    failed = True
                    break
            if failed:
                break
            train_loss = mse_loss(model, data.x_train, data.y_train)
            val_loss = mse_loss(model, data.x_val, data.y_val)
            if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
                failed = True
                break
            train_losses.append(train_loss)
            val_losses.append(val_loss)
            if stopper.update(epoch, val_loss, model):
                break

    if stopper.best_params is not None:
        model.set_params(*stopper.best_params)

    metrics: dict[str, EvaluationMetrics] = {}
    response = 0.0
    if not failed and stopper.best_params is not None:
        metrics = {
            "train": compute_metrics(data.y_train, forward(model, data.x_train)),
            "val": compute_metrics(data.y_val, forward(model, data.x_val)),
            "test": compute_metrics(data.y_test, forward(model, data.x_test)),
        }
        response = _response_from(metrics, settings.criterion)
    else:
        failed = True

    return TrainResult(
        config=config,
        seed=seed if isinstance(seed, tuple) else (int(seed), 0),
        stopped_epoch=len(train_losses) if not failed else epoch,
        best_epoch=stopper.best_epoch,
        train_losses=train_losses,
        val_losses=val_losses,
        metrics=metrics,
        response=response,
        failed=failed,
        wall_time=time.perf_counter() - start,
        model=model,
    )


def _train_indexed(args) -> TrainResult:
    index, config, data, settings = args
    return train_model(config, data, settings, seed=run_seed(settings.base_seed, index))


def run_design(
    array: OrthogonalArray,
    space: FactorSpace,
    data: SplitData,
    settings: TrainSettings,
    workers: int = 1,
) -> tuple[list[TrainResult], np.ndarray]:
    """Execute every run of the design; results stay in run order.

    With workers > 1 the runs execute in separate processes; responses are
    identical to a sequential execution because each run depends only on its
    own derived seed.
    """
    jobs = [
        (i, decode_hyperconfig(array, i, space), data, settings)
        for i in range(array.n_runs)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_train_indexed, jobs))
    else:
        results = [_train_indexed(job) for job in jobs]
    responses = np.array([r.response for r in results])
    return results, responses


def run_log_record(index: int, result: TrainResult) -> dict:
    """One JSON-serializable log record per run."""
    return {
        "run": index + 1,
        "config": result.config.as_dict(),
        "response": result.response,
        "failed": result.failed,
        "stopped_epoch": result.stopped_epoch,
        "best_epoch": result.best_epoch,
        "seed": list(result.seed),
        "wall_time_s": round(result.wall_time, 3),
        "metrics": {k: m.as_dict() for k, m in result.metrics.items()},
    }


def save_loss_history(result: TrainResult, path) -> None:
    """Export the per-epoch losses as ``epoch,train_loss,val_loss``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for e, (tl, vl) in enumerate(zip(result.train_losses, result.val_losses), start=1):
            writer.writerow([e, repr(tl), repr(vl)])
