"""Supervised-set construction, standard scaling and train/test splitting.

Models see standardized features AND standardized targets: both sides are
centered on the training mean and divided by the training population std
(ddof=0). Reported errors are therefore in standardized target units unless
a caller maps predictions back through ``inverse_transform``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CaseSeries, COUNT_COLUMNS
from .errors import (
    ConstantTarget,
    DegenerateSplit,
    DimensionMismatch,
    EmptyInput,
    LengthMismatch,
    MissingValuesPresent,
    UnknownFeature,
)

# Columns constant over a split would otherwise divide by ~0.
EPSILON_FLOOR = 1e-12

VALID_FEATURES = ("day_index",) + COUNT_COLUMNS


@dataclass(frozen=True)
class SupervisedSet:
    """Design matrix X (n, d) and target vector y (n,) with column names."""

    x: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    target_name: str

    def __post_init__(self) -> None:
        if self.x.ndim != 2:
            raise DimensionMismatch(f"x must be 2-D, got shape {self.x.shape}")
        if self.y.ndim != 1:
            raise DimensionMismatch(f"y must be 1-D, got shape {self.y.shape}")
        if self.x.shape[0] != self.y.shape[0]:
            raise LengthMismatch(
                f"x has {self.x.shape[0]} rows but y has {self.y.shape[0]}"
            )
        if self.x.shape[1] != len(self.feature_names):
            raise DimensionMismatch(
                f"x has {self.x.shape[1]} columns but "
                f"{len(self.feature_names)} feature names were given"
            )

    def __len__(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class ScalerParams:
    """Per-column center and scale; scale is floored for constant columns."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self) -> None:
        if self.mean.shape != self.scale.shape or self.mean.ndim != 1:
            raise DimensionMismatch(
                f"mean shape {self.mean.shape} and scale shape "
                f"{self.scale.shape} must be equal 1-D shapes"
            )


@dataclass(frozen=True)
class SplitSpec:
    """How to cut one supervised set into train and test parts.

    ``mode`` is "chronological" (first fraction of rows in given order) or
    "shuffled" (seeded permutation first). ``train_fraction`` is the share
    of rows that lands in train, rounded up to a whole row.
    """

    mode: str = "chronological"
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("chronological", "shuffled"):
            raise DegenerateSplit(f"unknown split mode {self.mode!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise DegenerateSplit(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )


def build_supervised(
    series: CaseSeries,
    feature_names: tuple[str, ...] | list[str],
    target_name: str,
) -> SupervisedSet:
    """Assemble X/y from named series columns.

    Valid names are day_index, tests, confirmed and deaths. Any missing
    value in a used column raises MissingValuesPresent: impute first.
    """
    feature_names = tuple(feature_names)
    for name in feature_names + (target_name,):
        if name not in VALID_FEATURES:
            raise UnknownFeature(f"unknown column {name!r}; valid: {VALID_FEATURES}")
    if not feature_names:
        raise EmptyInput("at least one feature column is required")
    if len(series) == 0:
        raise EmptyInput("series has no records")

    def column_array(name: str) -> np.ndarray:
        values = [r.get(name) for r in series.records]
        if any(v is None for v in values):
            raise MissingValuesPresent(
                f"column {name!r} has missing values; run impute_missing first"
            )
        return np.asarray(values, dtype=float)

    x = np.column_stack([column_array(n) for n in feature_names])
    y = column_array(target_name)
    return SupervisedSet(x=x, y=y, feature_names=feature_names, target_name=target_name)


def fit_scaler(values: np.ndarray) -> ScalerParams:
    """Column means and population stds (ddof=0) of a 2-D array.

    A 1-D array is treated as a single column. Constant columns get the
    floor scale so transform is defined (and maps them to exactly 0).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected 1-D or 2-D input, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInput("cannot fit a scaler on zero rows")
    mean = arr.mean(axis=0)
    scale = arr.std(axis=0)
    scale = np.where(scale < EPSILON_FLOOR, EPSILON_FLOOR, scale)
    return ScalerParams(mean=mean, scale=scale)


def _match_width(values: np.ndarray, params: ScalerParams) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    if arr.shape[1] != params.mean.shape[0]:
        raise DimensionMismatch(
            f"data has {arr.shape[1]} columns but scaler was fit on "
            f"{params.mean.shape[0]}"
        )
    return arr if not squeeze else arr  # width validated; caller handles squeeze


def transform(values: np.ndarray, params: ScalerParams) -> np.ndarray:
    """(values - mean) / scale, column-wise. Shape (1-D or 2-D) is kept."""
    arr = np.asarray(values, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    _match_width(arr, params)
    out = (arr - params.mean) / params.scale
    return out[:, 0] if squeeze else out


def inverse_transform(values: np.ndarray, params: ScalerParams) -> np.ndarray:
    """values * scale + mean; exact round trip of transform up to fp error."""
    arr = np.asarray(values, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    _match_width(arr, params)
    out = arr * params.scale + params.mean
    return out[:, 0] if squeeze else out


def split(data: SupervisedSet, spec: SplitSpec) -> tuple[SupervisedSet, SupervisedSet]:
    """Cut into (train, test) per `spec`; both halves must be non-empty."""
    n = len(data)
    n_train = int(np.ceil(spec.train_fraction * n))
    if n_train == 0 or n_train >= n:
        raise DegenerateSplit(
            f"split of {n} rows at fraction {spec.train_fraction} leaves an "
            f"empty half (train would get {n_train})"
        )
    if spec.mode == "shuffled":
        order = np.random.default_rng(spec.seed).permutation(n)
    else:
        order = np.arange(n)
    tr, te = order[:n_train], order[n_train:]

    def take(idx: np.ndarray) -> SupervisedSet:
        return SupervisedSet(
            x=data.x[idx].copy(),
            y=data.y[idx].copy(),
            feature_names=data.feature_names,
            target_name=data.target_name,
        )

    return take(tr), take(te)


@dataclass(frozen=True)
class StandardizedSplit:
    """Train/test in standardized units plus the scalers that produced them."""

    train: SupervisedSet
    test: SupervisedSet
    x_scaler: ScalerParams
    y_scaler: ScalerParams


def standardized_split(data: SupervisedSet, spec: SplitSpec) -> StandardizedSplit:
    """Split, then fit scalers on the TRAIN half only and apply to both.

    Fitting on train alone keeps test information out of the model; a
    constant training target cannot be standardized meaningfully and is
    rejected.
    """
    train, test = split(data, spec)
    if float(np.std(train.y)) < EPSILON_FLOOR:
        raise ConstantTarget(
            f"target {data.target_name!r} is constant on the training rows"
        )
    x_scaler = fit_scaler(train.x)
    y_scaler = fit_scaler(train.y)

    def scale_set(s: SupervisedSet) -> SupervisedSet:
        return SupervisedSet(
            x=transform(s.x, x_scaler),
            y=transform(s.y, y_scaler),
            feature_names=s.feature_names,
            target_name=s.target_name,
        )

    return StandardizedSplit(
        train=scale_set(train),
        test=scale_set(test),
        x_scaler=x_scaler,
        y_scaler=y_scaler,
    )
