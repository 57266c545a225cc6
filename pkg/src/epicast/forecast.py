"""Horizon forecasts, windowed scenario runs and plot-ready tables.

Forecasting is direct, not recursive: the models map day_index to a count,
so every future day is predicted independently from its own index and no
prediction is fed back in. Reports present clamped (at zero) and rounded
integer counts; raw real-valued predictions stay available for metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date, timedelta

import numpy as np

from .dataset import CaseSeries, window
from .errors import FeatureMismatch, InputError
from .metrics import EvalResult, evaluate
from .models import (
    FamilyConfig,
    TrainedModel,
    original_space_eval,
    predict_raw,
    train_on_split,
)
from .preprocess import SplitSpec, build_supervised, standardized_split

SCENARIO_TARGETS = ("confirmed", "deaths")


@dataclass(frozen=True)
class ForecastReport:
    """Integer per-day predictions over a horizon plus their min/max range."""

    start_date: Date
    horizon_days: int
    predictions: tuple[tuple[Date, int], ...]
    range_min: int
    range_max: int
    model_id: str
    scenario_label: str = ""

    def as_dict(self) -> dict:
        return {
            "start_date": self.start_date.isoformat(),
            "horizon_days": self.horizon_days,
            "predictions": [
                {"date": d.isoformat(), "predicted": v} for d, v in self.predictions
            ],
            "range_min": self.range_min,
            "range_max": self.range_max,
            "model_id": self.model_id,
            "scenario_label": self.scenario_label,
        }


def _require_day_index_only(model: TrainedModel) -> None:
    if model.feature_names != ("day_index",):
        raise FeatureMismatch(
            f"cannot extrapolate features {model.feature_names}; horizon "
            "forecasting needs a model trained on day_index alone (future "
            "covariate series are not supported)"
        )


def forecast_raw(
    model: TrainedModel, last_day_index: int, horizon: int
) -> np.ndarray:
    """Real-valued original-unit predictions for the next `horizon` days."""
    if horizon < 1:
        raise InputError("horizon must be at least 1")
    _require_day_index_only(model)
    future = np.arange(1, horizon + 1, dtype=float) + float(last_day_index)
    return predict_raw(model, future[:, None])


def forecast(
    model: TrainedModel,
    last_day_index: int,
    start_date: Date,
    horizon: int,
    *,
    scenario_label: str = "",
    model_id: str | None = None,
) -> ForecastReport:
    """Per-day integer forecast report; clamp at zero, then round.

    Day h of the horizon (1-based) is predicted from day_index
    last_day_index + h and dated start_date + (h - 1).
    """
    raw = forecast_raw(model, last_day_index, horizon)
    clamped = np.maximum(raw, 0.0)
    counts = [int(math.floor(v + 0.5)) for v in clamped]
    predictions = tuple(
        (start_date + timedelta(days=h), counts[h]) for h in range(horizon)
    )
    return ForecastReport(
        start_date=start_date,
        horizon_days=horizon,
        predictions=predictions,
        range_min=min(counts),
        range_max=max(counts),
        model_id=model_id or f"{model.family}:{model.target_name}",
        scenario_label=scenario_label,
    )


@dataclass(frozen=True)
class ScenarioResult:
    """Per-target evaluation and forecast for one windowed scenario."""

    label: str
    window_start: Date
    window_end: Date
    evals: dict[str, EvalResult]  # target -> scaled-space scores
    evals_original: dict[str, EvalResult]
    reports: dict[str, ForecastReport]


def scenario_run(
    series: CaseSeries,
    window_start: Date,
    window_end: Date,
    family: str,
    config: FamilyConfig,
    split_spec: SplitSpec,
    horizon: int,
    *,
    label: str = "scenario",
) -> ScenarioResult:
    """Window the series, train per target, evaluate, forecast the horizon.

    The same family/config is fit once per target (confirmed, deaths) on
    the windowed data with indices re-based to the window start. The
    forecast begins the day after the window ends.
    """
    part = window(series, window_start, window_end)
    evals: dict[str, EvalResult] = {}
    evals_orig: dict[str, EvalResult] = {}
    reports: dict[str, ForecastReport] = {}
    for target in SCENARIO_TARGETS:
        data = build_supervised(part, ("day_index",), target)
        std = standardized_split(data, split_spec)
        model, result = train_on_split(family, config, std, ("day_index",), target)
        evals[target] = result
        evals_orig[target] = original_space_eval(model, result)
        reports[target] = forecast(
            model,
            last_day_index=part.last_day_index,
            start_date=part.last_date + timedelta(days=1),
            horizon=horizon,
            scenario_label=label,
        )
    return ScenarioResult(
        label=label,
        window_start=part.first_date,
        window_end=part.last_date,
        evals=evals,
        evals_original=evals_orig,
        reports=reports,
    )


def emit_plot_series(
    history: CaseSeries,
    report: ForecastReport,
    scale: str = "linear",
    *,
    target: str | None = None,
) -> list[dict]:
    """One table of history rows followed by forecast rows.

    Columns: date, observed (null on forecast rows), predicted (null on
    history rows), scale (the scale-transformed display value of whichever
    of the two is present; log maps v to log10(v + 1) so zeros plot).
    ``target`` picks the observed column; defaults to the model's target
    parsed from model_id.
    """
    if scale not in ("linear", "log"):
        raise InputError(f"unknown scale {scale!r}; use linear or log")
    if target is None:
        target = report.model_id.split(":")[-1]

    def display(v: float) -> float:
        return float(np.log10(v + 1.0)) if scale == "log" else float(v)

    rows: list[dict] = []
    for r in history.records:
        obs = r.get(target)
        rows.append(
            {
                "date": r.date.isoformat(),
                "observed": obs,
                "predicted": None,
                "scale": None if obs is None else display(obs),
            }
        )
    for d, v in report.predictions:
        rows.append(
            {
                "date": d.isoformat(),
                "observed": None,
                "predicted": v,
                "scale": display(v),
            }
        )
    return rows


def backtest(model: TrainedModel, series: CaseSeries) -> dict:
    """Score a trained model against observed days of a series.

    Original-unit comparison over every day whose target is present. No
    pass/fail threshold is applied; the caller reads the numbers.
    """
    target = model.target_name
    days = [
        (r.day_index, r.get(target))
        for r in series.records
        if r.get(target) is not None
    ]
    if not days:
        raise InputError(f"series has no observed {target!r} values")
    idx = np.asarray([d for d, _ in days], dtype=float)
    observed = np.asarray([v for _, v in days], dtype=float)
    predicted = predict_raw(model, idx[:, None])
    scores = evaluate(observed, predicted, space="original")
    return {
        "target": target,
        "n_days": len(days),
        "mse": scores.mse,
        "r2": scores.r2,
        "rows": [
            {
                "day_index": int(i),
                "observed": float(o),
                "predicted": float(p),
            }
            for i, o, p in zip(idx, observed, predicted)
        ],
    }
