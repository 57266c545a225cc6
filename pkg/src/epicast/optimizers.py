"""Unconstrained minimizers over flattened parameter vectors.

Three methods: L-BFGS with a strong-Wolfe line search, full-batch gradient
descent (sgd), and Adam. All operate on an Objective exposing ``dim`` and
``eval(theta) -> (value, gradient)`` and are deterministic: identical
inputs give identical traces.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from .errors import NonFiniteObjective

# (s, y) pairs this flat are dropped to keep the implicit Hessian positive
# definite in the two-loop recursion.
CURVATURE_SKIP = 1e-10


@runtime_checkable
class Objective(Protocol):
    dim: int

    def eval(self, theta: np.ndarray) -> tuple[float, np.ndarray]: ...


@dataclass
class FunctionObjective:
    """Adapts a plain (value, gradient) function to the Objective protocol."""

    dim: int
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]]

    def eval(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = self.fn(theta)
        return float(value), np.asarray(grad, dtype=float)


@dataclass(frozen=True)
class LbfgsConfig:
    memory: int = 10
    max_iterations: int = 500
    grad_tolerance: float = 1e-6
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    # Function-evaluation budget for one line search, bracket plus zoom.
    max_evals_per_search: int = 25

    def __post_init__(self) -> None:
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.memory < 1:
            raise ValueError("memory must be at least 1")


@dataclass(frozen=True)
class StepRecord:
    """One accepted line-search step, enough to re-check the Wolfe conditions."""

    alpha: float
    f_before: float
    f_after: float
    dphi0: float
    dphi_after: float


@dataclass
class MinimizeResult:
    theta: np.ndarray
    trace: list[float]
    iterations: int
    converged: bool
    status: str  # converged | stalled | max_iterations | line_search_failed
    grad_norm: float
    steps: list[StepRecord] = field(default_factory=list)


def _check_initial(value: float, grad: np.ndarray) -> None:
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        raise NonFiniteObjective("objective is not finite at the starting point")


def two_loop_direction(
    grad: np.ndarray,
    s_pairs: list[np.ndarray],
    y_pairs: list[np.ndarray],
) -> np.ndarray:
    """L-BFGS two-loop recursion: -H·grad from stored (s, y) pairs.

    H0 is gamma*I with gamma = s.y / y.y of the newest pair (identity when
    no pairs are stored yet).
    """
    q = grad.copy()
    alphas: list[float] = []
    rhos = [1.0 / float(y @ s) for s, y in zip(s_pairs, y_pairs)]
    for s, y, rho in zip(reversed(s_pairs), reversed(y_pairs), reversed(rhos)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_pairs:
        s, y = s_pairs[-1], y_pairs[-1]
        gamma = float(s @ y) / float(y @ y)
        q *= gamma
    for s, y, rho, a in zip(s_pairs, y_pairs, rhos, reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def _cubic_step(
    a_lo: float, f_lo: float, g_lo: float, a_hi: float, f_hi: float, g_hi: float
) -> float | None:
    """Minimizer of the cubic Hermite interpolant on [a_lo, a_hi].

    Returns None when the data do not pin down an interior minimum (non-
    finite endpoint values, negative discriminant, vanishing denominator).
    """
    if not all(np.isfinite(v) for v in (f_lo, g_lo, f_hi, g_hi)):
        return None
    d1 = g_lo + g_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi)
    disc = d1 * d1 - g_lo * g_hi
    if disc < 0.0:
        return None
    d2 = np.sign(a_hi - a_lo) * np.sqrt(disc)
    denom = g_hi - g_lo + 2.0 * d2
    if denom == 0.0:
        return None
    step = a_hi - (a_hi - a_lo) * (g_hi + d2 - d1) / denom
    return float(step) if np.isfinite(step) else None


class _LineSearch:
    """Strong-Wolfe search along d from x, under a shared evaluation budget.

    phi(a) = f(x + a d). A non-finite trial value is treated as a failed
    sufficient-decrease test so the search backs off toward zero instead of
    accepting garbage.
    """

    def __init__(
        self,
        obj: Objective,
        x: np.ndarray,
        d: np.ndarray,
        f0: float,
        dphi0: float,
        cfg: LbfgsConfig,
    ):
        self.obj, self.x, self.d, self.cfg = obj, x, d, cfg
        self.f0, self.dphi0 = f0, dphi0
        self.evals = 0

    def _phi(self, alpha: float) -> tuple[float, np.ndarray, float]:
        self.evals += 1
        f, g = self.obj.eval(self.x + alpha * self.d)
        ok = np.isfinite(f) and np.all(np.isfinite(g))
        dphi = float(g @ self.d) if ok else np.nan
        return (f if ok else np.inf), g, dphi

    def _sufficient(self, alpha: float, f: float) -> bool:
        return f <= self.f0 + self.cfg.wolfe_c1 * alpha * self.dphi0

    def run(self, alpha0: float) -> tuple[float, float, np.ndarray] | None:
        cfg = self.cfg
        a_prev, f_prev, dphi_prev = 0.0, self.f0, self.dphi0
        alpha = alpha0
        first = True
        while self.evals < cfg.max_evals_per_search:
            f, g, dphi = self._phi(alpha)
            if not self._sufficient(alpha, f) or (not first and f >= f_prev):
                return self._zoom(a_prev, f_prev, dphi_prev, alpha, f, dphi)
            if abs(dphi) <= -cfg.wolfe_c2 * self.dphi0:
                return alpha, f, g
            if dphi >= 0.0:
                return self._zoom(alpha, f, dphi, a_prev, f_prev, dphi_prev)
            a_prev, f_prev, dphi_prev = alpha, f, dphi
            alpha *= 2.0
            first = False
        return None

    def _zoom(
        self,
        a_lo: float, f_lo: float, dphi_lo: float,
        a_hi: float, f_hi: float, dphi_hi: float,
    ) -> tuple[float, float, np.ndarray] | None:
        cfg = self.cfg
        while self.evals < cfg.max_evals_per_search:
            lo, hi = (a_lo, a_hi) if a_lo < a_hi else (a_hi, a_lo)
            width = hi - lo
            if width <= 1e-16 * max(1.0, abs(hi)):
                return None
            alpha = _cubic_step(a_lo, f_lo, dphi_lo, a_hi, f_hi, dphi_hi)
            margin = 0.1 * width
            if alpha is None or not (lo + margin <= alpha <= hi - margin):
                alpha = 0.5 * (lo + hi)
            f, g, dphi = self._phi(alpha)
            if not self._sufficient(alpha, f) or f >= f_lo:
                a_hi, f_hi, dphi_hi = alpha, f, dphi
            else:
                if abs(dphi) <= -cfg.wolfe_c2 * self.dphi0:
                    return alpha, f, g
                if dphi * (a_hi - a_lo) >= 0.0:
                    a_hi, f_hi, dphi_hi = a_lo, f_lo, dphi_lo
                a_lo, f_lo, dphi_lo = alpha, f, dphi
        return None


def lbfgs_minimize(
    obj: Objective,
    theta0: np.ndarray,
    cfg: LbfgsConfig = LbfgsConfig(),
    *,
    tolerance: float | None = None,
    patience: int = 10,
    collect_steps: bool = False,
) -> MinimizeResult:
    """L-BFGS with a strong-Wolfe line search.

    Stops when the gradient inf-norm drops below cfg.grad_tolerance, the
    iteration budget runs out, or (when ``tolerance`` is given) the loss
    fails to improve by at least that amount over ``patience`` consecutive
    accepted steps. A failed line search falls back to the steepest-descent
    direction once; if that also fails, the best point so far is returned
    flagged with status "line_search_failed". The trace of accepted losses
    never increases.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    f, g = obj.eval(theta)
    _check_initial(f, g)
    trace = [f]
    steps: list[StepRecord] = []
    s_pairs: deque[np.ndarray] = deque(maxlen=cfg.memory)
    y_pairs: deque[np.ndarray] = deque(maxlen=cfg.memory)
    status = "max_iterations"
    stall = 0
    iterations = 0

    for _ in range(cfg.max_iterations):
        if float(np.max(np.abs(g))) < cfg.grad_tolerance:
            status = "converged"
            break
        d = two_loop_direction(g, list(s_pairs), list(y_pairs))
        dphi0 = float(g @ d)
        if dphi0 >= 0.0:  # numerically lost positive definiteness
            d = -g
            dphi0 = float(g @ d)
        # Gradient-sized first trial step before any curvature is known.
        alpha0 = min(1.0, 1.0 / float(np.sum(np.abs(g)))) if not s_pairs else 1.0
        search = _LineSearch(obj, theta, d, f, dphi0, cfg)
        hit = search.run(alpha0)
        if hit is None:
            d = -g
            dphi0 = float(g @ d)
            search = _LineSearch(obj, theta, d, f, dphi0, cfg)
            hit = search.run(min(1.0, 1.0 / float(np.sum(np.abs(g)))))
            if hit is None:
                status = "line_search_failed"
                break
        alpha, f_new, g_new = hit
        s = alpha * d
        y = g_new - g
        if float(s @ y) > CURVATURE_SKIP * float(
            np.linalg.norm(s) * np.linalg.norm(y)
        ):
            s_pairs.append(s)
            y_pairs.append(y)
        if collect_steps:
            steps.append(
                StepRecord(
                    alpha=alpha,
                    f_before=f,
                    f_after=f_new,
                    dphi0=dphi0,
                    dphi_after=float(g_new @ d),
                )
            )
        theta = theta + s
        improvement = f - f_new
        f, g = f_new, g_new
        trace.append(f)
        iterations += 1
        if tolerance is not None:
            stall = stall + 1 if improvement < tolerance else 0
            if stall >= patience:
                status = "stalled"
                break
    else:
        if float(np.max(np.abs(g))) < cfg.grad_tolerance:
            status = "converged"

    return MinimizeResult(
        theta=theta,
        trace=trace,
        iterations=iterations,
        converged=status == "converged",
        status=status,
        grad_norm=float(np.max(np.abs(g))),
        steps=steps,
    )


def sgd_minimize(
    obj: Objective,
    theta0: np.ndarray,
    learning_rate: float,
    iterations: int,
    *,
    tolerance: float | None = None,
    patience: int = 10,
) -> MinimizeResult:
    """Full-batch gradient descent, theta <- theta - lr * grad.

    Runs the exact iteration count unless ``tolerance`` enables the
    loss-improvement early stop. lr = 0 is allowed and leaves theta fixed.
    """
    if learning_rate < 0.0:
        raise ValueError("learning_rate must be nonnegative")
    theta = np.asarray(theta0, dtype=float).copy()
    f, g = obj.eval(theta)
    _check_initial(f, g)
    trace = [f]
    status = "max_iterations"
    stall = 0
    it = 0
    for it in range(1, iterations + 1):
        theta -= learning_rate * g
        f_new, g = obj.eval(theta)
        if not (np.isfinite(f_new) and np.all(np.isfinite(g))):
            raise NonFiniteObjective(
                f"objective became non-finite at iteration {it}", iteration=it
            )
        trace.append(f_new)
        improvement = f - f_new
        f = f_new
        if tolerance is not None:
            stall = stall + 1 if improvement < tolerance else 0
            if stall >= patience:
                status = "stalled"
                break
    return MinimizeResult(
        theta=theta,
        trace=trace,
        iterations=it if iterations > 0 else 0,
        converged=False,
        status=status,
        grad_norm=float(np.max(np.abs(g))),
    )


def adam_minimize(
    obj: Objective,
    theta0: np.ndarray,
    learning_rate: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    iterations: int = 1000,
    *,
    tolerance: float | None = None,
    patience: int = 10,
) -> MinimizeResult:
    """Adam with bias-corrected first and second moment estimates."""
    if learning_rate < 0.0:
        raise ValueError("learning_rate must be nonnegative")
    theta = np.asarray(theta0, dtype=float).copy()
    f, g = obj.eval(theta)
    _check_initial(f, g)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    trace = [f]
    status = "max_iterations"
    stall = 0
    it = 0
    for it in range(1, iterations + 1):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**it)
        v_hat = v / (1.0 - beta2**it)
        theta -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        f_new, g = obj.eval(theta)
        if not (np.isfinite(f_new) and np.all(np.isfinite(g))):
            raise NonFiniteObjective(
                f"objective became non-finite at iteration {it}", iteration=it
            )
        trace.append(f_new)
        improvement = f - f_new
        f = f_new
        if tolerance is not None:
            stall = stall + 1 if improvement < tolerance else 0
            if stall >= patience:
                status = "stalled"
                break
    return MinimizeResult(
        theta=theta,
        trace=trace,
        iterations=it if iterations > 0 else 0,
        converged=False,
        status=status,
        grad_norm=float(np.max(np.abs(g))),
    )
