"""Experiment harness: the 5-regressor-per-family grid, best-slot
selection, and cross-family comparison series.

Grid cells are isolated jobs: a diverging or non-converging fit becomes a
flagged cell in the table instead of aborting the run, so the grid is
always total. Identical seed and data give an identical table; workers
only change wall time because results are joined in a fixed order.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date as Date, timedelta

import numpy as np

from .dataset import CaseSeries, fingerprint
from .errors import EpicastError, NoValidCell
from .linear import LinRegConfig
from .metrics import EvalResult
from .mlp import MlpConfig
from .models import (
    FamilyConfig,
    TrainedModel,
    predict_raw,
    train_on_split,
)
from .preprocess import (
    ScalerParams,
    SplitSpec,
    StandardizedSplit,
    SupervisedSet,
    build_supervised,
    split as split_rows,
    standardized_split,
)
from .svr import KernelSpec, SvrConfig

GRID_TARGETS = ("confirmed", "deaths")

# External benchmark bests (infected/confirmed target, deaths target) shown
# in report footers for orientation; they are display references, not
# acceptance thresholds.
REFERENCE_BEST_R2 = {
    "mlp": {"confirmed": 0.9182, "deaths": 0.9341},
    "svr": {"confirmed": 0.8413, "deaths": 0.8701},
    "linreg": {"confirmed": 0.7996, "deaths": 0.8090},
}


@dataclass(frozen=True)
class RegressorSlot:
    """One numbered configuration of one model family."""

    slot: int
    model_family: str
    config: FamilyConfig

    def config_dict(self) -> dict:
        return dataclasses.asdict(self.config)


@dataclass(frozen=True)
class GridCell:
    """Outcome of one slot on one target.

    flagged cells are failures (exception: scores None) or non-converged
    fits (scores present, reason "not_converged"); either way the grid
    completed. Unflagged cells always carry scores.
    """

    slot: int
    family: str
    target: str
    r2: float | None
    mse: float | None
    flagged: bool
    flag_reason: str | None
    config: dict

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ScoreTable:
    cells: tuple[GridCell, ...]
    metadata: dict

    def cell(self, family: str, slot: int, target: str) -> GridCell:
        for c in self.cells:
            if (c.family, c.slot, c.target) == (family, slot, target):
                return c
        raise KeyError((family, slot, target))

    def family_cells(self, family: str) -> list[GridCell]:
        return [c for c in self.cells if c.family == family]

    def as_dict(self) -> dict:
        return {
            "cells": [c.as_dict() for c in self.cells],
            "metadata": self.metadata,
            "reference_best_r2": REFERENCE_BEST_R2,
        }


def default_grid(
    *,
    mlp_hidden_layers: int = 2,
    mlp_neurons: int = 16,
    seed: int = 0,
) -> list[RegressorSlot]:
    """The fixed 15-slot grid: 5 configurations for each family.

    SVR slots sweep kernels, MLP slots sweep optimizer/activation/budget,
    linreg slots sweep the learning-rate/iteration trade-off. Depth and
    width of the MLP slots default to a shallow, trainable shape; the
    deep 100x64 default of MlpConfig stays available to callers who want
    it.
    """

    def mlp(activation: str, optimizer: str, iters: int) -> MlpConfig:
        return MlpConfig(
            hidden_layers=mlp_hidden_layers,
            neurons_per_layer=mlp_neurons,
            activation=activation,
            optimizer=optimizer,
            max_iterations=iters,
            seed=seed,
        )

    slots: list[RegressorSlot] = []
    kernels = [
        KernelSpec(kind="rbf"),
        KernelSpec(kind="poly", degree=5),
        KernelSpec(kind="linear"),
        KernelSpec(kind="poly", degree=2),
        KernelSpec(kind="poly", degree=7),
    ]
    for i, k in enumerate(kernels, start=1):
        slots.append(RegressorSlot(i, "svr", SvrConfig(kernel=k)))
    slots.append(RegressorSlot(1, "mlp", mlp("tanh", "lbfgs", 1000)))
    slots.append(RegressorSlot(2, "mlp", mlp("tanh", "lbfgs", 5000)))
    slots.append(RegressorSlot(3, "mlp", mlp("tanh", "lbfgs", 10000)))
    slots.append(RegressorSlot(4, "mlp", mlp("relu", "lbfgs", 1000)))
    slots.append(RegressorSlot(5, "mlp", mlp("tanh", "sgd", 1000)))
    for i, (lr, iters) in enumerate(
        [(0.5, 2500), (0.1, 3000), (0.01, 3500), (0.001, 5000), (0.0001, 10000)],
        start=1,
    ):
        slots.append(RegressorSlot(i, "linreg", LinRegConfig(lr, iters)))
    return slots


def _identity_split(data: SupervisedSet, spec: SplitSpec) -> StandardizedSplit:
    """Split without scaling; identity scalers keep the model API uniform."""
    train, test = split_rows(data, spec)
    ident_x = ScalerParams(
        mean=np.zeros(data.x.shape[1]), scale=np.ones(data.x.shape[1])
    )
    ident_y = ScalerParams(mean=np.zeros(1), scale=np.ones(1))
    return StandardizedSplit(train=train, test=test, x_scaler=ident_x, y_scaler=ident_y)


def _run_cell(
    series: CaseSeries,
    split_spec: SplitSpec,
    slot: RegressorSlot,
    target: str,
    standardize: bool,
) -> GridCell:
    cfg = slot.config_dict()
    try:
        data = build_supervised(series, ("day_index",), target)
        std = (
            standardized_split(data, split_spec)
            if standardize
            else _identity_split(data, split_spec)
        )
        model, result = train_on_split(
            slot.model_family, slot.config, std, ("day_index",), target
        )
        flagged = not model.converged
        return GridCell(
            slot=slot.slot,
            family=slot.model_family,
            target=target,
            r2=result.r2,
            mse=result.mse,
            flagged=flagged,
            flag_reason="not_converged" if flagged else None,
            config=cfg,
        )
    except EpicastError as err:
        return GridCell(
            slot=slot.slot,
            family=slot.model_family,
            target=target,
            r2=None,
            mse=None,
            flagged=True,
            flag_reason=f"{type(err).__name__}: {err}",
            config=cfg,
        )


def run_grid(
    series: CaseSeries,
    split_spec: SplitSpec,
    slots: list[RegressorSlot] | None = None,
    *,
    targets: tuple[str, ...] = GRID_TARGETS,
    workers: int = 1,
    standardize: bool = True,
) -> ScoreTable:
    """Fit and score every slot on every target.

    The series must be imputed (no missing values in used columns). Cells
    are independent; `workers` > 1 runs them in a thread pool, and the
    output order is fixed [(family, slot, target) ascending] either way.
    """
    if slots is None:
        slots = default_grid(seed=split_spec.seed)
    jobs = [(slot, target) for slot in slots for target in targets]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(
                pool.map(
                    lambda jt: _run_cell(series, split_spec, jt[0], jt[1], standardize),
                    jobs,
                )
            )
    else:
        cells = [_run_cell(series, split_spec, s, t, standardize) for s, t in jobs]
    cells.sort(key=lambda c: (c.family, c.slot, c.target))
    metadata = {
        "split": dataclasses.asdict(split_spec),
        "seed": split_spec.seed,
        "targets": list(targets),
        "standardized": standardize,
        "dataset": fingerprint(series),
        "source_label": series.source_label,
    }
    return ScoreTable(cells=tuple(cells), metadata=metadata)


def select_best(table: ScoreTable, family: str) -> RegressorSlot:
    """Slot with the highest mean R2 over unflagged target cells.

    Ties break toward the lower slot number; a family with no unflagged
    cell at all raises NoValidCell.
    """
    by_slot: dict[int, list[GridCell]] = {}
    for c in table.family_cells(family):
        if not c.flagged and c.r2 is not None:
            by_slot.setdefault(c.slot, []).append(c)
    if not by_slot:
        raise NoValidCell(f"every {family} cell is flagged")
    scored = [
        (float(np.mean([c.r2 for c in cells])), slot)
        for slot, cells in by_slot.items()
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    best_slot = scored[0][1]
    cell = by_slot[best_slot][0]
    return RegressorSlot(
        slot=best_slot, model_family=family, config=_config_from_dict(family, cell.config)
    )


def _config_from_dict(family: str, cfg: dict) -> FamilyConfig:
    if family == "mlp":
        return MlpConfig(**cfg)
    if family == "svr":
        d = dict(cfg)
        d["kernel"] = KernelSpec(**d["kernel"])
        return SvrConfig(**d)
    return LinRegConfig(**cfg)


@dataclass(frozen=True)
class ComparisonReport:
    """Observed vs per-family predictions on one shared date axis.

    The axis runs from the earliest test-row date through the end of the
    series plus the horizon; observed is None past the last observation.
    Predictions are real-valued (plot material, not count reports).
    """

    target: str
    dates: tuple[Date, ...]
    observed: tuple[int | None, ...]
    predicted: dict[str, tuple[float, ...]]
    metadata: dict

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "dates": [d.isoformat() for d in self.dates],
            "observed": list(self.observed),
            "predicted": {f: list(v) for f, v in self.predicted.items()},
            "metadata": self.metadata,
        }


def compare_models(
    series: CaseSeries,
    split_spec: SplitSpec,
    best_slots: dict[str, RegressorSlot],
    target: str,
    horizon: int = 0,
) -> ComparisonReport:
    """Train each family's best slot on identical rows and predict together.

    All three models see the same standardized train half; predictions
    cover the test span (earliest test date to series end) plus `horizon`
    days past the last observation.
    """
    data = build_supervised(series, ("day_index",), target)
    std = standardized_split(data, split_spec)
    n = len(data)
    n_train = int(np.ceil(split_spec.train_fraction * n))
    if split_spec.mode == "shuffled":
        order = np.random.default_rng(split_spec.seed).permutation(n)
    else:
        order = np.arange(n)
    first_test_index = int(np.min(order[n_train:]))

    span = series.records[first_test_index:]
    day_indices = [r.day_index for r in span]
    dates = [r.date for r in span]
    observed: list[int | None] = [r.get(target) for r in span]
    last_index = series.last_day_index
    last_date = series.last_date
    for h in range(1, horizon + 1):
        day_indices.append(last_index + h)
        dates.append(last_date + timedelta(days=h))
        observed.append(None)

    x_future = np.asarray(day_indices, dtype=float)[:, None]
    predicted: dict[str, tuple[float, ...]] = {}
    models: dict[str, TrainedModel] = {}
    for family, slot in best_slots.items():
        model, _ = train_on_split(family, slot.config, std, ("day_index",), target)
        models[family] = model
        predicted[family] = tuple(float(v) for v in predict_raw(model, x_future))

    metadata = {
        "split": dataclasses.asdict(split_spec),
        "horizon": horizon,
        "slots": {f: s.slot for f, s in best_slots.items()},
        "configs": {f: s.config_dict() for f, s in best_slots.items()},
        "dataset": fingerprint(series),
        "reference_best_r2": REFERENCE_BEST_R2,
    }
    return ComparisonReport(
        target=target,
        dates=tuple(dates),
        observed=tuple(observed),
        predicted=predicted,
        metadata=metadata,
    )
