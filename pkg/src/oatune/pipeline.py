"""Dataset schema, validation, min-max normalization, splitting, and the
synthetic stand-in generator.

A dataset is a dense (n, 33) float64 matrix: 12 microstructural inputs
followed by the 21 independent stiffness components in upper-triangle order.
The synthetic generator is non-physical test scaffolding: a documented
smooth closed form that respects the input bounds and always produces a
symmetric positive-definite stiffness.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import mechanics

TWO_PI = 2.0 * math.pi

INPUT_COLUMNS = (
    "E_M", "nu_M", "E_F", "nu_F", "d_f", "lambda_f",
    "phi", "a11", "a22", "g1", "g2", "g3",
)
OUTPUT_COLUMNS = (
    "Q11", "Q12", "Q13", "Q14", "Q15", "Q16",
    "Q22", "Q23", "Q24", "Q25", "Q26",
    "Q33", "Q34", "Q35", "Q36",
    "Q44", "Q45", "Q46",
    "Q55", "Q56",
    "Q66",
)
ALL_COLUMNS = INPUT_COLUMNS + OUTPUT_COLUMNS
N_INPUTS = len(INPUT_COLUMNS)
N_OUTPUTS = len(OUTPUT_COLUMNS)

# Inclusive input bounds; a22 and the rotation angles are handled separately.
INPUT_BOUNDS = {
    "E_M": (500.0, 20000.0),
    "nu_M": (0.30, 0.49),
    "E_F": (10000.0, 100000.0),
    "nu_F": (0.2, 0.4),
    "d_f": (4.0, 20.0),
    "lambda_f": (2.0, 100.0),
    "phi": (0.05, 0.3),
    "a11": (0.33, 1.0),
}

# Slack on the orientation-tensor constraints; published experimental points
# carry rounded orientation entries (e.g. a trace of 0.999).
ORIENTATION_TOL = 1e-2


class SchemaError(ValueError):
    """Header does not carry exactly the expected columns."""


class ParseError(ValueError):
    """A CSV cell failed to parse; message carries row and column."""


class ValidationError(ValueError):
    """A row violates the input bounds under strict loading."""


@dataclass(frozen=True)
class Dataset:
    """Dense sample matrix plus a provenance tag (file path or synthetic seed)."""

    values: np.ndarray = field(repr=False)
    provenance: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(ALL_COLUMNS) or values.shape[0] == 0:
            raise ValueError(
                f"dataset must be nonempty with {len(ALL_COLUMNS)} columns, got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def inputs(self) -> np.ndarray:
        return self.values[:, :N_INPUTS]

    @property
    def outputs(self) -> np.ndarray:
        return self.values[:, N_INPUTS:]


def validate_sample(row, omega: float = TWO_PI, tol: float = ORIENTATION_TOL) -> list[str]:
    """Check one row's inputs against the bounds; returns violation messages.

    `row` may be the 12 inputs or a full 33-column sample. The orientation
    constraints (a22 window and a33 >= 0) get `tol` of slack.
    """
    row = np.asarray(row, dtype=np.float64)
    x = dict(zip(INPUT_COLUMNS, row[:N_INPUTS]))
    violations = []
    for name, (lo, hi) in INPUT_BOUNDS.items():
        if not lo <= x[name] <= hi:
            violations.append(f"{name} = {x[name]:g} outside [{lo:g}, {hi:g}]")
    for name in ("g1", "g2", "g3"):
        if not 0.0 <= x[name] <= omega:
            violations.append(f"{name} = {x[name]:g} outside [0, {omega:g}]")
    a11, a22 = x["a11"], x["a22"]
    a22_lo = max(0.0, 1.0 - 2.0 * a11)
    if a22 > a11 + tol:
        violations.append(f"a22 > a11: {a22:g} > {a11:g}")
    if a22 < a22_lo - tol:
        violations.append(f"a22 = {a22:g} below max(0, 1 - 2*a11) = {a22_lo:g}")
    a33 = 1.0 - a11 - a22
    if a33 < -tol:
        violations.append(f"a33 = 1 - a11 - a22 = {a33:g} is negative")
    return violations


def load_dataset(path, strict: bool = False, omega: float = TWO_PI) -> Dataset:
    """Parse a 33-column CSV; with strict on, every row must pass validate_sample."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in ALL_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}")
        extra = [c for c in header if c not in ALL_COLUMNS]
        if extra:
            raise SchemaError(f"{path}: unexpected column {extra[0]!r}")
        order = [header.index(c) for c in ALL_COLUMNS]

        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(rec)}")
            try:
                values = [float(rec[i]) for i in order]
            except ValueError:
                bad = next(i for i in order if not _is_float(rec[i]))
                raise ParseError(
                    f"{path}:{lineno}: cannot parse column {ALL_COLUMNS[order.index(bad)]!r}: {rec[bad]!r}"
                ) from None
            if strict:
                violations = validate_sample(values, omega=omega)
                if violations:
                    raise ValidationError(f"{path}:{lineno}: {violations[0]}")
            rows.append(values)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return Dataset(np.array(rows), provenance=str(path))


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def save_dataset(dataset: Dataset, path) -> None:
    """Write the canonical 33-column CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ALL_COLUMNS)
        for row in dataset.values:
            writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test ratios (must sum to 1) plus the shuffle seed."""

    ratios: tuple[float, float, float] = (0.8, 0.15, 0.05)
    seed: int = 0

    def __post_init__(self):
        if any(r < 0 for r in self.ratios):
            raise ValueError(f"split ratios must be nonnegative, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {self.ratios}")


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split_dataset(n: int, spec: SplitSpec) -> SplitIndices:
    """Disjoint covering index sets; val/test sizes floor, remainder to train."""
    if n <= 0:
        raise ValueError("cannot split an empty dataset")
    n_val = math.floor(n * spec.ratios[1])
    n_test = math.floor(n * spec.ratios[2])
    n_train = n - n_val - n_test
    perm = np.random.default_rng(spec.seed).permutation(n)
    return SplitIndices(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train:n_train + n_val]),
        test=np.sort(perm[n_train + n_val:]),
    )


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-column min/max range mapping to [0, 1].

    Constant columns are flagged: they transform to 0 and invert back to the
    recorded minimum.
    """

    mins: np.ndarray = field(repr=False)
    maxs: np.ndarray = field(repr=False)

    def __post_init__(self):
        mins = np.atleast_1d(np.asarray(self.mins, dtype=np.float64))
        maxs = np.atleast_1d(np.asarray(self.maxs, dtype=np.float64))
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("scaler min/max must be 1-D arrays of equal length")
        if np.any(maxs < mins):
            raise ValueError("scaler max must be >= min per column")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def n_columns(self) -> int:
        return self.mins.shape[0]

    @property
    def constant(self) -> np.ndarray:
        return self.maxs == self.mins

    def _check_width(self, values: np.ndarray) -> None:
        if values.shape[-1] != self.n_columns:
            raise ValueError(
                f"expected {self.n_columns} columns, got {values.shape[-1]}"
            )

    def transform(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        self._check_width(values)
        span = np.where(self.constant, 1.0, self.maxs - self.mins)
        out = (values - self.mins) / span
        if self.constant.any():
            out = np.where(self.constant, 0.0, out)
        return out

    def inverse_transform(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        self._check_width(values)
        span = np.where(self.constant, 0.0, self.maxs - self.mins)
        return values * span + self.mins

    def slice(self, start: int, stop: int) -> "MinMaxScaler":
        return MinMaxScaler(self.mins[start:stop], self.maxs[start:stop])

    def to_dict(self) -> dict:
        return {"min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "MinMaxScaler":
        return cls(np.asarray(doc["min"]), np.asarray(doc["max"]))


def fit_minmax(values) -> MinMaxScaler:
    """Record per-column min/max of a matrix (or Dataset)."""
    if isinstance(values, Dataset):
        values = values.values
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise ValueError(f"need a nonempty 2-D matrix to fit, got shape {values.shape}")
    return MinMaxScaler(values.min(axis=0), values.max(axis=0))


def aspect_ratio(l_f: float, d_f: float) -> float:
    """Fiber aspect ratio lambda = length / diameter."""
    if l_f <= 0 or d_f <= 0:
        raise ValueError(f"fiber length and diameter must be positive, got {(l_f, d_f)}")
    return l_f / d_f


def generate_synthetic(n: int, seed: int, omega: float = TWO_PI) -> Dataset:
    """Draw inputs uniformly within bounds and compute outputs from a smooth
    closed form (non-physical scaffolding, stands in for real homogenization
    data):

        E_long  = phi*E_F + (1-phi)*E_M                 (parallel blend)
        E_trans = 1 / (phi/E_F + (1-phi)/E_M)           (series blend)
        E_eff   = E_trans + (E_long - E_trans) * lambda_f / (lambda_f + 10)
        nu_bar  = phi*nu_F + (1-phi)*nu_M
        E_i     = a_ii * E_eff + (1 - a_ii) * E_trans   (i = 1, 2, 3)

    then an orthotropic stiffness from (E_1, E_2, E_3, nu_bar) with shear
    moduli sqrt(E_i E_j)/(2 (1+nu_bar)), rotated by the three Euler angles.

    a11 is drawn from [1/3, 1] (inside the nominal [0.33, 1] bound) so the
    a22 window [max(0, 1-2*a11), min(a11, 1-a11)] is never empty and the
    orientation trace stays valid.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    rng = np.random.default_rng(seed)
    e_m = rng.uniform(*INPUT_BOUNDS["E_M"], n)
    nu_m = rng.uniform(*INPUT_BOUNDS["nu_M"], n)
    e_f = rng.uniform(*INPUT_BOUNDS["E_F"], n)
    nu_f = rng.uniform(*INPUT_BOUNDS["nu_F"], n)
    d_f = rng.uniform(*INPUT_BOUNDS["d_f"], n)
    lam = rng.uniform(*INPUT_BOUNDS["lambda_f"], n)
    phi = rng.uniform(*INPUT_BOUNDS["phi"], n)
    a11 = rng.uniform(1.0 / 3.0, 1.0, n)
    a22_lo = np.maximum(0.0, 1.0 - 2.0 * a11)
    a22_hi = np.minimum(a11, 1.0 - a11)
    a22 = rng.uniform(a22_lo, a22_hi)
    angles = rng.uniform(0.0, omega, (n, 3))

    inputs = np.column_stack([e_m, nu_m, e_f, nu_f, d_f, lam, phi, a11, a22, angles])
    outputs = np.empty((n, N_OUTPUTS))
    a33 = 1.0 - a11 - a22
    e_long = phi * e_f + (1.0 - phi) * e_m
    e_trans = 1.0 / (phi / e_f + (1.0 - phi) / e_m)
    e_eff = e_trans + (e_long - e_trans) * lam / (lam + 10.0)
    nu_bar = phi * nu_f + (1.0 - phi) * nu_m
    for i in range(n):
        e1 = a11[i] * e_eff[i] + (1.0 - a11[i]) * e_trans[i]
        e2 = a22[i] * e_eff[i] + (1.0 - a22[i]) * e_trans[i]
        e3 = a33[i] * e_eff[i] + (1.0 - a33[i]) * e_trans[i]
        c = mechanics.assemble_orthotropic(e1, e2, e3, nu_bar[i])
        r = mechanics.rotation_matrix(*angles[i])
        outputs[i] = mechanics.matrix_to_components(mechanics.rotate_stiffness(c, r))
    return Dataset(
        np.hstack([inputs, outputs]),
        provenance=f"synthetic(n={n}, seed={seed})",
    )
