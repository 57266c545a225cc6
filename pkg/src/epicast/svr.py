"""Epsilon-insensitive support vector regression with kernels.

The dual is solved in the combined variable beta_i = alpha_i - alpha_i*
(one number per sample, box |beta_i| <= C, equality sum(beta) = 0):

    minimize  f(beta) = 1/2 beta' K beta - y' beta + eps * ||beta||_1

Pairwise coordinate updates keep the equality constraint exact: each step
picks the maximally KKT-violating (increase, decrease) pair and solves the
one-dimensional piecewise-quadratic subproblem in closed form. A small
brute-force grid oracle (qp_oracle) certifies optimality in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateKernelMatrix, DimensionMismatch, LengthMismatch

# Dual coefficients below this are treated as exactly zero (not a support
# vector); also the minimum pair step worth applying.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and shape constants.

    gamma = None means "resolve from data at fit time" with the scale
    heuristic 1 / (n_features * var(x)).
    """

    kind: str = "rbf"
    gamma: float | None = None
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "rbf", "poly"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.gamma is not None and self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.degree < 1:
            raise ValueError("degree must be at least 1")


@dataclass(frozen=True)
class SvrConfig:
    kernel: KernelSpec = KernelSpec()
    c: float = 1.0
    epsilon: float = 0.1
    tolerance: float = 1e-3  # KKT violation below this counts as optimal
    max_passes: int = 10000  # one pass = one pairwise update

    def __post_init__(self) -> None:
        if self.c <= 0.0:
            raise ValueError("c must be positive")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")


@dataclass(frozen=True)
class SvrParams:
    """Fitted dual solution.

    alphas holds beta_i = alpha_i - alpha_i* for every training row;
    support_vectors / support_coefs keep only the rows with nonzero dual
    coefficient, which is all prediction needs. kernel is the resolved
    spec (gamma filled in). converged False flags a fit stopped by the
    pass budget; its best iterate is still usable.
    """

    alphas: np.ndarray
    bias: float
    support_vectors: np.ndarray
    support_coefs: np.ndarray
    kernel: KernelSpec
    converged: bool = True
    passes: int = 0


def kernel_eval(k: KernelSpec, u: np.ndarray, v: np.ndarray) -> float:
    """Kernel value for a single pair of equal-length vectors."""
    a = np.asarray(u, dtype=float).ravel()
    b = np.asarray(v, dtype=float).ravel()
    if a.size != b.size:
        raise DimensionMismatch(f"u has {a.size} entries, v has {b.size}")
    if k.kind == "linear":
        return float(a @ b)
    if k.gamma is None:
        raise ValueError("gamma unresolved; fit resolves it or pass a value")
    if k.kind == "rbf":
        d = a - b
        return float(np.exp(-k.gamma * float(d @ d)))
    return float((k.gamma * float(a @ b) + k.coef0) ** k.degree)


def gram_matrix(k: KernelSpec, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Kernel matrix K[i, j] = k(xa[i], xb[j]) for 2-D row collections."""
    a = np.asarray(xa, dtype=float)
    b = np.asarray(xb, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"row width mismatch: {a.shape[1]} versus {b.shape[1]}"
        )
    if k.kind == "linear":
        return a @ b.T
    if k.gamma is None:
        raise ValueError("gamma unresolved; fit resolves it or pass a value")
    if k.kind == "rbf":
        sq = (
            np.sum(a * a, axis=1)[:, None]
            + np.sum(b * b, axis=1)[None, :]
            - 2.0 * (a @ b.T)
        )
        return np.exp(-k.gamma * np.maximum(sq, 0.0))
    return (k.gamma * (a @ b.T) + k.coef0) ** k.degree


def resolve_gamma(k: KernelSpec, x: np.ndarray) -> KernelSpec:
    """Fill gamma = 1 / (n_features * var(x)) when left unset."""
    if k.kind == "linear" or k.gamma is not None:
        return k
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    var = float(arr.var())
    if var <= 0.0:
        var = 1.0
    return replace(k, gamma=1.0 / (arr.shape[1] * var))


def _pair_step(
    eta: float, b_lin: float, beta_i: float, beta_j: float, eps: float, t_max: float
) -> float:
    """Minimize the 1-D move g(t), t in [0, t_max], where beta_i gains t
    and beta_j loses t.

    g(t) = eta t^2 / 2 + b_lin t + eps(|beta_i + t| - |beta_i|)
                                 + eps(|beta_j - t| - |beta_j|)
    Piecewise quadratic with kinks where either coefficient crosses zero;
    each piece is checked in closed form.
    """
    if t_max <= 0.0:
        return 0.0

    def g(t: float) -> float:
        return (
            0.5 * eta * t * t
            + b_lin * t
            + eps * (abs(beta_i + t) - abs(beta_i))
            + eps * (abs(beta_j - t) - abs(beta_j))
        )

    points = {0.0, t_max}
    for kink in (-beta_i, beta_j):
        if 0.0 < kink < t_max:
            points.add(kink)
    knots = sorted(points)
    for lo, hi in zip(knots, knots[1:]):
        mid = 0.5 * (lo + hi)
        s_i = 1.0 if beta_i + mid >= 0.0 else -1.0
        s_j = 1.0 if beta_j - mid >= 0.0 else -1.0
        slope0 = b_lin + eps * (s_i - s_j)  # g'(t) at t=0 on this piece
        if eta > 0.0:
            t_star = -slope0 / eta
            if lo < t_star < hi:
                points.add(t_star)
    best_t, best_val = 0.0, 0.0
    for t in points:
        val = g(t)
        if val < best_val:
            best_t, best_val = t, val
    return best_t


def dual_objective(
    k_matrix: np.ndarray, y: np.ndarray, beta: np.ndarray, eps: float
) -> float:
    """W(beta) = -1/2 beta' K beta + y' beta - eps ||beta||_1 (maximized)."""
    return float(
        -0.5 * beta @ (k_matrix @ beta)
        + y @ beta
        - eps * np.sum(np.abs(beta))
    )


def svr_fit(x: np.ndarray, y: np.ndarray, cfg: SvrConfig) -> SvrParams:
    """Solve the dual by maximal-violating-pair coordinate updates.

    Terminates when no pair violates the KKT conditions beyond
    cfg.tolerance, or flags converged=False after cfg.max_passes updates.
    The equality constraint holds exactly throughout because every update
    moves a pair in opposite directions by the same amount.
    """
    xs = np.asarray(x, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    ys = np.asarray(y, dtype=float).ravel()
    n = xs.shape[0]
    if n != ys.size:
        raise LengthMismatch(f"x has {n} rows but y has {ys.size} values")
    if n < 2:
        raise DimensionMismatch("need at least 2 rows to fit")

    kernel = resolve_gamma(cfg.kernel, xs)
    # overflow here is the signal for DegenerateKernelMatrix, not a warning
    with np.errstate(over="ignore"):
        k_matrix = gram_matrix(kernel, xs, xs)
    if not np.all(np.isfinite(k_matrix)):
        raise DegenerateKernelMatrix(
            "kernel matrix has non-finite entries; standardize the data or "
            "lower the polynomial degree"
        )

    beta = np.zeros(n)
    q = np.zeros(n)  # cache of K beta
    c, eps = cfg.c, cfg.epsilon
    converged = False
    passes = 0

    for passes in range(1, cfg.max_passes + 1):
        resid = q - ys
        # Directional derivatives of the minimized dual: d_up for raising
        # beta_i, d_down for lowering it. Signs of the eps term follow the
        # one-sided derivative of |beta_i|.
        d_up = resid + np.where(beta >= 0.0, eps, -eps)
        d_down = resid + np.where(beta > 0.0, eps, -eps)
        can_up = beta < c - ZERO_TOL
        can_down = beta > -c + ZERO_TOL
        if not (np.any(can_up) and np.any(can_down)):
            converged = True
            break
        i = int(np.argmin(np.where(can_up, d_up, np.inf)))
        j = int(np.argmax(np.where(can_down, d_down, -np.inf)))
        violation = d_down[j] - d_up[i]
        if violation <= cfg.tolerance:
            converged = True
            break
        eta = float(k_matrix[i, i] + k_matrix[j, j] - 2.0 * k_matrix[i, j])
        b_lin = float(q[i] - q[j] - (ys[i] - ys[j]))
        t_max = min(c - beta[i], beta[j] + c)
        t = _pair_step(max(eta, 0.0), b_lin, beta[i], beta[j], eps, t_max)
        if t <= ZERO_TOL:
            # The most violating pair cannot move: numerically stuck.
            converged = violation <= cfg.tolerance
            break
        beta[i] += t
        beta[j] -= t
        q += t * (k_matrix[:, i] - k_matrix[:, j])
    else:
        passes = cfg.max_passes

    resid = q - ys
    d_up = resid + np.where(beta >= 0.0, eps, -eps)
    d_down = resid + np.where(beta > 0.0, eps, -eps)
    can_up = beta < c - ZERO_TOL
    can_down = beta > -c + ZERO_TOL
    lo = float(np.min(np.where(can_up, d_up, np.inf))) if np.any(can_up) else np.nan
    hi = (
        float(np.max(np.where(can_down, d_down, -np.inf)))
        if np.any(can_down)
        else np.nan
    )
    if np.isnan(lo) and np.isnan(hi):
        bias = float(np.mean(ys - q))
    elif np.isnan(lo):
        bias = -hi
    elif np.isnan(hi):
        bias = -lo
    else:
        bias = -0.5 * (lo + hi)

    keep = np.abs(beta) > ZERO_TOL
    return SvrParams(
        alphas=beta,
        bias=bias,
        support_vectors=xs[keep].copy(),
        support_coefs=beta[keep].copy(),
        kernel=kernel,
        converged=converged,
        passes=passes,
    )


def svr_predict(
    params: SvrParams, k: KernelSpec, x: np.ndarray
) -> float | np.ndarray:
    """Sum of coef * k(support_vector, x) + bias; float for a single vector."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if params.support_vectors.shape[0] == 0:
        out = np.full(arr.shape[0], params.bias)
        return float(out[0]) if single else out
    if arr.shape[1] != params.support_vectors.shape[1]:
        raise DimensionMismatch(
            f"x has {arr.shape[1]} features, support vectors have "
            f"{params.support_vectors.shape[1]}"
        )
    k_cross = gram_matrix(k, arr, params.support_vectors)
    out = k_cross @ params.support_coefs + params.bias
    return float(out[0]) if single else out


def qp_oracle(x: np.ndarray, y: np.ndarray, cfg: SvrConfig) -> float:
    """Brute-force maximum of the dual objective, for tiny instances only.

    Grids the first n-1 coordinates (the equality constraint fixes the
    last), then repeatedly shrinks the grid window around the best point.
    Independent of the solver: no KKT conditions, no pair logic.
    """
    xs = np.asarray(x, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    ys = np.asarray(y, dtype=float).ravel()
    n = xs.shape[0]
    if n > 5:
        raise ValueError("oracle is exhaustive; use n <= 5")
    kernel = resolve_gamma(cfg.kernel, xs)
    k_matrix = gram_matrix(kernel, xs, xs)
    c, eps = cfg.c, cfg.epsilon

    if n == 1:
        return 0.0  # sum constraint forces beta = 0
    free = n - 1
    points_per_dim = {1: 1025, 2: 129, 3: 41, 4: 21}[free]
    center = np.zeros(free)
    half = c
    best_val = dual_objective(k_matrix, ys, np.zeros(n), eps)
    for _ in range(26):
        axes = [
            np.linspace(
                max(-c, center[d] - half), min(c, center[d] + half), points_per_dim
            )
            for d in range(free)
        ]
        mesh = np.stack(
            [m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1
        )
        last = -mesh.sum(axis=1)
        ok = np.abs(last) <= c
        if not np.any(ok):
            half *= 0.65
            continue
        betas = np.column_stack([mesh[ok], last[ok]])
        vals = (
            -0.5 * np.einsum("bi,ij,bj->b", betas, k_matrix, betas)
            + betas @ ys
            - eps * np.sum(np.abs(betas), axis=1)
        )
        top = int(np.argmax(vals))
        if vals[top] > best_val:
            best_val = float(vals[top])
            center = mesh[ok][top]
        half *= 0.65
    return best_val
