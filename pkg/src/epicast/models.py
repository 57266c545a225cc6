"""One interface over the three model families, plus model (de)serialization.

A TrainedModel bundles the fitted parameters with the scalers and column
names it was trained against, so prediction from raw feature values and
faithful save/load round trips are possible without extra context. The
on-disk form is a JSON envelope, version 1, with all arrays as nested
row-major lists.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import FeatureMismatch, InputError
from .linear import LinRegConfig, LinRegParams, linreg_fit, linreg_predict
from .metrics import EvalResult, evaluate
from .mlp import ActivationKind, MlpConfig, MlpParams, forward, train_mlp
from .preprocess import (
    ScalerParams,
    StandardizedSplit,
    SupervisedSet,
    inverse_transform,
    transform,
)
from .svr import KernelSpec, SvrConfig, SvrParams, svr_fit, svr_predict

MODEL_DOC_VERSION = 1

FAMILIES = ("mlp", "svr", "linreg")

FamilyConfig = MlpConfig | SvrConfig | LinRegConfig
FamilyParams = MlpParams | SvrParams | LinRegParams


@dataclass(frozen=True)
class TrainedModel:
    family: str
    config: FamilyConfig
    params: FamilyParams
    x_scaler: ScalerParams
    y_scaler: ScalerParams
    feature_names: tuple[str, ...]
    target_name: str
    train_meta: dict

    @property
    def converged(self) -> bool:
        return bool(self.train_meta.get("converged", True))


def default_config(family: str) -> FamilyConfig:
    if family == "mlp":
        return MlpConfig()
    if family == "svr":
        return SvrConfig()
    if family == "linreg":
        return LinRegConfig()
    raise InputError(f"unknown model family {family!r}; valid: {FAMILIES}")


def _fit_family(
    family: str, config: FamilyConfig, train: SupervisedSet
) -> tuple[FamilyParams, dict]:
    if family == "mlp":
        params, result = train_mlp(config, train.x, train.y)
        meta = {
            "status": result.status,
            "iterations": result.iterations,
            "final_loss": result.trace[-1],
            "converged": result.status != "line_search_failed",
        }
        return params, meta
    if family == "svr":
        params = svr_fit(train.x, train.y, config)
        meta = {
            "status": "converged" if params.converged else "pass_budget_exhausted",
            "iterations": params.passes,
            "support_vectors": int(params.support_coefs.size),
            "converged": params.converged,
        }
        return params, meta
    if family == "linreg":
        params = linreg_fit(train.x, train.y, config)
        meta = {
            "status": "completed",
            "iterations": config.iterations,
            "converged": True,
        }
        return params, meta
    raise InputError(f"unknown model family {family!r}; valid: {FAMILIES}")


def train_on_split(
    family: str,
    config: FamilyConfig,
    split: StandardizedSplit,
    feature_names: tuple[str, ...],
    target_name: str,
) -> tuple[TrainedModel, EvalResult]:
    """Fit on the standardized train half, score R2/MSE on the test half."""
    params, meta = _fit_family(family, config, split.train)
    model = TrainedModel(
        family=family,
        config=config,
        params=params,
        x_scaler=split.x_scaler,
        y_scaler=split.y_scaler,
        feature_names=tuple(feature_names),
        target_name=target_name,
        train_meta=meta,
    )
    result = evaluate(split.test.y, predict_scaled(model, split.test.x))
    return model, result


def predict_scaled(model: TrainedModel, x_scaled: np.ndarray) -> np.ndarray:
    """Predictions in standardized target units from standardized features."""
    xs = np.asarray(x_scaled, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    if model.family == "mlp":
        out = forward(model.params, ActivationKind(model.config.activation), xs)
    elif model.family == "svr":
        out = svr_predict(model.params, model.params.kernel, xs)
    else:
        out = linreg_predict(model.params, xs)
    return np.asarray(out, dtype=float).ravel()


def predict_raw(model: TrainedModel, x_raw: np.ndarray) -> np.ndarray:
    """Raw features in, original-unit (real-valued) predictions out."""
    xs = np.asarray(x_raw, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    if xs.shape[1] != len(model.feature_names):
        raise FeatureMismatch(
            f"model expects features {model.feature_names}, got {xs.shape[1]} columns"
        )
    scaled = transform(xs, model.x_scaler)
    return inverse_transform(predict_scaled(model, scaled), model.y_scaler)


def original_space_eval(model: TrainedModel, scaled: EvalResult) -> EvalResult:
    """Same fit viewed in original units: mse scales by sigma_y^2, r2 is unchanged."""
    sigma = float(model.y_scaler.scale[0])
    return EvalResult(
        mse=scaled.mse * sigma * sigma, r2=scaled.r2, n=scaled.n, space="original"
    )


def _array(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=float)


def model_to_dict(model: TrainedModel) -> dict:
    if model.family == "mlp":
        params = {
            "weights": [w.tolist() for w in model.params.weights],
            "biases": [b.tolist() for b in model.params.biases],
        }
    elif model.family == "svr":
        params = {
            "alphas": model.params.alphas.tolist(),
            "bias": model.params.bias,
            "support_vectors": model.params.support_vectors.tolist(),
            "support_coefs": model.params.support_coefs.tolist(),
            "kernel": dataclasses.asdict(model.params.kernel),
            "converged": model.params.converged,
            "passes": model.params.passes,
        }
    else:
        params = {
            "slope": model.params.slope.tolist(),
            "intercept": model.params.intercept,
        }
    return {
        "version": MODEL_DOC_VERSION,
        "family": model.family,
        "config": dataclasses.asdict(model.config),
        "params": params,
        "x_scaler": {
            "mean": model.x_scaler.mean.tolist(),
            "scale": model.x_scaler.scale.tolist(),
        },
        "y_scaler": {
            "mean": model.y_scaler.mean.tolist(),
            "scale": model.y_scaler.scale.tolist(),
        },
        "feature_names": list(model.feature_names),
        "target_name": model.target_name,
        "train_meta": model.train_meta,
    }


def model_from_dict(doc: dict) -> TrainedModel:
    if doc.get("version") != MODEL_DOC_VERSION:
        raise InputError(
            f"unsupported model document version {doc.get('version')!r}"
        )
    family = doc.get("family")
    cfg_d = dict(doc["config"])
    p = doc["params"]
    params: FamilyParams
    config: FamilyConfig
    if family == "mlp":
        config = MlpConfig(**cfg_d)
        params = MlpParams(
            weights=tuple(_array(w) for w in p["weights"]),
            biases=tuple(_array(b) for b in p["biases"]),
        )
    elif family == "svr":
        cfg_d["kernel"] = KernelSpec(**cfg_d["kernel"])
        config = SvrConfig(**cfg_d)
        sv = _array(p["support_vectors"])
        params = SvrParams(
            alphas=_array(p["alphas"]),
            bias=float(p["bias"]),
            support_vectors=sv if sv.ndim == 2 else sv.reshape(0, 1),
            support_coefs=_array(p["support_coefs"]),
            kernel=KernelSpec(**p["kernel"]),
            converged=bool(p["converged"]),
            passes=int(p["passes"]),
        )
    elif family == "linreg":
        config = LinRegConfig(**cfg_d)
        params = LinRegParams(slope=_array(p["slope"]), intercept=float(p["intercept"]))
    else:
        raise InputError(f"unknown model family {family!r}; valid: {FAMILIES}")
    return TrainedModel(
        family=family,
        config=config,
        params=params,
        x_scaler=ScalerParams(
            mean=_array(doc["x_scaler"]["mean"]), scale=_array(doc["x_scaler"]["scale"])
        ),
        y_scaler=ScalerParams(
            mean=_array(doc["y_scaler"]["mean"]), scale=_array(doc["y_scaler"]["scale"])
        ),
        feature_names=tuple(doc["feature_names"]),
        target_name=doc["target_name"],
        train_meta=dict(doc.get("train_meta", {})),
    )


def save_model(model: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path: str) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
