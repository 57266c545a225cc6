"""Linear regression fit by full-batch gradient descent on MSE.

A closed-form ordinary-least-squares solver rides along as the convergence
reference; the gradient-descent path is the production fit because its
learning rate and iteration count are first-class tuning knobs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DivergenceError, LengthMismatch, SingularMatrix


@dataclass(frozen=True)
class LinRegConfig:
    learning_rate: float = 0.5
    iterations: int = 2500

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


@dataclass(frozen=True)
class LinRegParams:
    slope: np.ndarray  # one coefficient per feature
    intercept: float


def _as_design(x: np.ndarray) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"x must be 1-D or 2-D, got shape {arr.shape}")
    return arr


def linreg_fit(x: np.ndarray, y: np.ndarray, cfg: LinRegConfig) -> LinRegParams:
    """Gradient descent from zero parameters, exactly cfg.iterations steps.

    Gradient of (1/n)*sum((x w + b - y)^2) is (2/n) x^T r for the slope and
    (2/n) sum(r) for the intercept, r = predictions - y. Standardize first:
    large learning rates diverge on raw count scales, and divergence is
    reported as an error rather than silent NaN parameters.
    """
    xs = _as_design(x)
    ys = np.asarray(y, dtype=float).ravel()
    n = xs.shape[0]
    if n != ys.size:
        raise LengthMismatch(f"x has {n} rows but y has {ys.size} values")
    if n < 2:
        raise DimensionMismatch("need at least 2 rows to fit")
    w = np.zeros(xs.shape[1])
    b = 0.0
    # overflow here is the signal for DivergenceError, not a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, cfg.iterations + 1):
            r = xs @ w + b - ys
            loss = float(r @ r) / n
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"loss became non-finite at iteration {it}; "
                    "lower the learning rate or standardize the data",
                    iteration=it,
                )
            w -= cfg.learning_rate * (2.0 / n) * (xs.T @ r)
            b -= cfg.learning_rate * (2.0 / n) * float(r.sum())
    if not (np.all(np.isfinite(w)) and np.isfinite(b)):
        raise DivergenceError(
            "parameters became non-finite on the final step",
            iteration=cfg.iterations,
        )
    return LinRegParams(slope=w, intercept=float(b))


def linreg_predict(params: LinRegParams, x: np.ndarray) -> np.ndarray:
    xs = _as_design(x)
    if xs.shape[1] != params.slope.shape[0]:
        raise DimensionMismatch(
            f"x has {xs.shape[1]} features but the fit used {params.slope.shape[0]}"
        )
    return xs @ params.slope + params.intercept


def ols_closed_form(x: np.ndarray, y: np.ndarray) -> LinRegParams:
    """Normal-equations solution; testing oracle and convergence reference."""
    xs = _as_design(x)
    ys = np.asarray(y, dtype=float).ravel()
    if xs.shape[0] != ys.size:
        raise LengthMismatch(f"x has {xs.shape[0]} rows but y has {ys.size} values")
    design = np.column_stack([xs, np.ones(xs.shape[0])])
    gram = design.T @ design
    if np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise SingularMatrix("design matrix with intercept is rank deficient")
    coef = np.linalg.solve(gram, design.T @ ys)
    return LinRegParams(slope=coef[:-1], intercept=float(coef[-1]))
