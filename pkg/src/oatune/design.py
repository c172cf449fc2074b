"""Three-level Taguchi orthogonal arrays: construction, balance checks, decoding.

The 27-run array is generated from a closed-form digit construction over
GF(3) and golden-checked against an embedded copy of the published L27
assignment, so it is guaranteed to reproduce the classic run order while
still generalizing to any number of factors up to 13.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class DesignError(ValueError):
    """Raised for invalid factors, spaces, or malformed arrays."""


@dataclass(frozen=True)
class Factor:
    """One design factor with exactly three ordered levels."""

    name: str
    levels: tuple[Any, Any, Any]

    def __post_init__(self):
        if len(self.levels) != 3:
            raise DesignError(
                f"factor {self.name!r} must have exactly 3 levels, got {len(self.levels)}"
            )
        if len(set(map(repr, self.levels))) != 3:
            raise DesignError(f"factor {self.name!r} has duplicate levels: {self.levels}")


@dataclass(frozen=True)
class FactorSpace:
    """Ordered collection of 3-level factors; column order follows declaration order."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not 1 <= len(self.factors) <= 13:
            raise DesignError(
                f"a 27-run 3-level array supports 1..13 factors, got {len(self.factors)}"
            )
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise DesignError(f"duplicate factor names: {names}")

    def __len__(self) -> int:
        return len(self.factors)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.factors]

    @property
    def full_factorial_size(self) -> int:
        return 3 ** len(self.factors)


@dataclass(frozen=True)
class HyperConfig:
    """One decoded network-tuning run."""

    hidden_layers: int
    neurons: int
    activation: str
    optimizer: str
    learning_rate: float

    @classmethod
    def from_mapping(cls, levels: dict[str, Any]) -> "HyperConfig":
        """Build from a decoded run of the standard (HL, NN, ACT, OPT, LR) space."""
        try:
            return cls(
                hidden_layers=int(levels["HL"]),
                neurons=int(levels["NN"]),
                activation=str(levels["ACT"]),
                optimizer=str(levels["OPT"]),
                learning_rate=float(levels["LR"]),
            )
        except KeyError as exc:
            raise DesignError(f"missing hyperparameter factor {exc.args[0]!r}") from exc

    def as_dict(self) -> dict[str, Any]:
        return {
            "HL": self.hidden_layers,
            "NN": self.neurons,
            "ACT": self.activation,
            "OPT": self.optimizer,
            "LR": self.learning_rate,
        }


def paper_space() -> FactorSpace:
    """The standard five-factor hyperparameter space (HL, NN, ACT, OPT, LR)."""
    return FactorSpace(
        (
            Factor("HL", (1, 2, 3)),
            Factor("NN", (10, 20, 30)),
            Factor("ACT", ("relu", "elu", "selu")),
            Factor("OPT", ("Adam", "Adamax", "RMSprop")),
            Factor("LR", (0.001, 0.01, 0.1)),
        )
    )


@dataclass(frozen=True)
class OrthogonalArray:
    """Run-ordered matrix of level indices in {0,1,2}, one column per factor."""

    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.size == 0:
            raise DesignError("array must be a nonempty 2-D matrix of level indices")
        object.__setattr__(self, "rows", rows)

    @property
    def n_runs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_factors(self) -> int:
        return self.rows.shape[1]


# Canonical column coefficients (c_a, c_b, c_e) over GF(3): each column is
# c_a*a + c_b*b + c_e*e mod 3 for run digits a = i//9, b = (i//3) % 3, e = i % 3.
# The first five reproduce the published L27 assignment for 5 factors; the
# rest exhaust the 13 pairwise linearly independent directions.
_L27_COLUMNS: tuple[tuple[int, int, int], ...] = (
    (1, 0, 0),  # a
    (0, 1, 0),  # b
    (1, 1, 0),  # a + b
    (1, 2, 0),  # a + 2b
    (0, 0, 1),  # e
    (1, 0, 1),
    (1, 0, 2),
    (0, 1, 1),
    (0, 1, 2),
    (1, 1, 1),
    (1, 1, 2),
    (1, 2, 1),
    (1, 2, 2),
)


def build_array(space: FactorSpace) -> OrthogonalArray:
    """27-run strength-2 orthogonal array for 1..13 three-level factors."""
    k = len(space)
    i = np.arange(27)
    digits = np.stack([i // 9, (i // 3) % 3, i % 3])  # (3, 27)
    coeffs = np.array(_L27_COLUMNS[:k])  # (k, 3)
    rows = (coeffs @ digits) % 3
    return OrthogonalArray(rows.T)


def build_l27(space: FactorSpace) -> OrthogonalArray:
    """The published 27x5 array; requires exactly five 3-level factors."""
    if len(space) != 5:
        raise DesignError(
            f"L27 design expects exactly 5 factors, got {len(space)}: {space.names}"
        )
    return build_array(space)


@dataclass(frozen=True)
class BalanceReport:
    """Result of a strength-2 balance check."""

    ok: bool
    expected_count: int
    first_violation: tuple[int, int, int, int, int] | None = None
    # (column i, column j, level at i, level at j, observed count)

    def __bool__(self) -> bool:
        return self.ok


def verify_strength2(array: OrthogonalArray) -> BalanceReport:
    """Check that every ordered level pair occurs rows/9 times for every column pair.

    Single-column arrays pass vacuously (there are no column pairs).
    """
    rows = array.rows
    if rows.min() < 0 or rows.max() > 2:
        bad = np.argwhere((rows < 0) | (rows > 2))[0]
        raise DesignError(
            f"malformed array: cell ({bad[0]}, {bad[1]}) = {rows[bad[0], bad[1]]} not in {{0,1,2}}"
        )
    expected = array.n_runs // 9
    for i in range(array.n_factors):
        for j in range(i + 1, array.n_factors):
            counts = np.zeros((3, 3), dtype=int)
            np.add.at(counts, (rows[:, i], rows[:, j]), 1)
            if not np.all(counts == expected):
                li, lj = np.argwhere(counts != expected)[0]
                return BalanceReport(
                    False, expected, (i, j, int(li), int(lj), int(counts[li, lj]))
                )
    return BalanceReport(True, expected)


def decode_run(array: OrthogonalArray, index: int, space: FactorSpace) -> dict[str, Any]:
    """Map one run's level indices through the factor payloads."""
    if not 0 <= index < array.n_runs:
        raise IndexError(f"run index {index} out of range 0..{array.n_runs - 1}")
    if array.n_factors != len(space):
        raise DesignError(
            f"array has {array.n_factors} columns but space has {len(space)} factors"
        )
    row = array.rows[index]
    return {f.name: f.levels[lvl] for f, lvl in zip(space.factors, row)}


def decode_hyperconfig(array: OrthogonalArray, index: int, space: FactorSpace) -> HyperConfig:
    return HyperConfig.from_mapping(decode_run(array, index, space))


def design_to_csv(array: OrthogonalArray, space: FactorSpace, path) -> None:
    """Write the decoded design as CSV: header ``run,factor1,...,factorN``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run"] + space.names)
        for i in range(array.n_runs):
            decoded = decode_run(array, i, space)
            writer.writerow([i + 1] + [decoded[name] for name in space.names])


# Published L27 assignment for the five-factor space, in run order.
# Used as a golden reference for the digit construction above.
TABLE_L27: tuple[tuple[int, int, str, str, float], ...] = (
    (1, 10, "relu", "Adam", 0.001),
    (1, 10, "relu", "Adam", 0.010),
    (1, 10, "relu", "Adam", 0.100),
    (1, 20, "elu", "RMSprop", 0.001),
    (1, 20, "elu", "RMSprop", 0.010),
    (1, 20, "elu", "RMSprop", 0.100),
    (1, 30, "selu", "Adamax", 0.001),
    (1, 30, "selu", "Adamax", 0.010),
    (1, 30, "selu", "Adamax", 0.100),
    (2, 10, "elu", "Adamax", 0.001),
    (2, 10, "elu", "Adamax", 0.010),
    (2, 10, "elu", "Adamax", 0.100),
    (2, 20, "selu", "Adam", 0.001),
    (2, 20, "selu", "Adam", 0.010),
    (2, 20, "selu", "Adam", 0.100),
    (2, 30, "relu", "RMSprop", 0.001),
    (2, 30, "relu", "RMSprop", 0.010),
    (2, 30, "relu", "RMSprop", 0.100),
    (3, 10, "selu", "RMSprop", 0.001),
    (3, 10, "selu", "RMSprop", 0.010),
    (3, 10, "selu", "RMSprop", 0.100),
    (3, 20, "relu", "Adamax", 0.001),
    (3, 20, "relu", "Adamax", 0.010),
    (3, 20, "relu", "Adamax", 0.100),
    (3, 30, "elu", "Adam", 0.001),
    (3, 30, "elu", "Adam", 0.010),
    (3, 30, "elu", "Adam", 0.100),
)
