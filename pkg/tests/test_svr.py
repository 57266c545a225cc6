import numpy as np
import pytest

from epicast import (
    KernelSpec,
    SvrConfig,
    SvrParams,
    dual_objective,
    gram_matrix,
    kernel_eval,
    qp_oracle,
    resolve_gamma,
    svr_fit,
    svr_predict,
)
from epicast.errors import DegenerateKernelMatrix, DimensionMismatch, LengthMismatch


def kkt_report(x, y, cfg, params):
    """Constraint residuals of a fitted dual solution."""
    beta = params.alphas
    k = gram_matrix(params.kernel, np.atleast_2d(x.T).T if x.ndim == 1 else x, x)
    pred = k @ beta + params.bias
    return {
        "sum": float(np.sum(beta)),
        "box_excess": float(np.max(np.abs(beta)) - cfg.c),
        "resid": pred - np.asarray(y, dtype=float),
    }


class TestKernelEval:
    def test_linear_hand_value(self):
        k = KernelSpec(kind="linear")
        assert kernel_eval(k, np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0

    def test_rbf_identical_points(self):
        k = KernelSpec(kind="rbf", gamma=0.7)
        assert kernel_eval(k, np.array([1.5, -2.0]), np.array([1.5, -2.0])) == 1.0

    def test_rbf_hand_value(self):
        k = KernelSpec(kind="rbf", gamma=0.5)
        got = kernel_eval(k, np.array([0.0]), np.array([2.0]))
        assert got == pytest.approx(np.exp(-2.0))

    def test_poly_hand_value(self):
        k = KernelSpec(kind="poly", gamma=1.0, degree=2, coef0=1.0)
        got = kernel_eval(k, np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        assert got == 144.0  # (11 + 1)^2

    def test_unresolved_gamma_rejected(self):
        with pytest.raises(ValueError):
            kernel_eval(KernelSpec(kind="rbf"), np.zeros(2), np.zeros(2))

    def test_width_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kernel_eval(KernelSpec(kind="linear"), np.zeros(2), np.zeros(3))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            KernelSpec(kind="sigmoid")
        with pytest.raises(ValueError):
            KernelSpec(kind="rbf", gamma=0.0)
        with pytest.raises(ValueError):
            KernelSpec(kind="poly", degree=0)


class TestGramMatrix:
    @pytest.mark.parametrize(
        "spec",
        [
            KernelSpec(kind="linear"),
            KernelSpec(kind="rbf", gamma=0.3),
            KernelSpec(kind="poly", gamma=0.5, degree=3),
        ],
    )
    def test_matches_pairwise_eval(self, spec, rng):
        xa = rng.normal(size=(5, 3))
        xb = rng.normal(size=(4, 3))
        gram = gram_matrix(spec, xa, xb)
        for i in range(5):
            for j in range(4):
                assert gram[i, j] == pytest.approx(
                    kernel_eval(spec, xa[i], xb[j]), rel=1e-12, abs=1e-12
                )

    @pytest.mark.parametrize(
        "spec", [KernelSpec(kind="linear"), KernelSpec(kind="rbf", gamma=1.1)]
    )
    def test_positive_semidefinite(self, spec, rng):
        for _ in range(5):
            x = rng.normal(size=(int(rng.integers(2, 11)), 2))
            gram = gram_matrix(spec, x, x)
            eigs = np.linalg.eigvalsh(gram)
            assert eigs.min() >= -1e-8

    def test_width_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gram_matrix(KernelSpec(kind="linear"), np.zeros((2, 2)), np.zeros((2, 3)))

    def test_one_dimensional_inputs_promoted(self):
        gram = gram_matrix(KernelSpec(kind="linear"), np.array([1.0, 2.0]), np.array([3.0]))
        assert gram.shape == (2, 1)
        assert gram[1, 0] == 6.0


class TestResolveGamma:
    def test_scale_heuristic_single_feature(self):
        k = resolve_gamma(KernelSpec(kind="rbf"), np.array([[0.0], [2.0]]))
        assert k.gamma == pytest.approx(1.0)  # var = 1, one feature

    def test_scale_heuristic_two_features(self):
        k = resolve_gamma(KernelSpec(kind="rbf"), np.array([[0.0, 0.0], [2.0, 2.0]]))
        assert k.gamma == pytest.approx(0.5)

    def test_constant_data_falls_back_to_unit_variance(self):
        k = resolve_gamma(KernelSpec(kind="rbf"), np.ones((4, 2)))
        assert k.gamma == pytest.approx(0.5)

    def test_explicit_gamma_kept(self):
        k = resolve_gamma(KernelSpec(kind="rbf", gamma=3.0), np.zeros((3, 1)))
        assert k.gamma == 3.0

    def test_linear_untouched(self):
        k = resolve_gamma(KernelSpec(kind="linear"), np.zeros((3, 1)))
        assert k.gamma is None


class TestQpOracle:
    def test_two_point_hand_solution(self):
        # beta = (-0.8, 0.8) maximizes the dual at W = 0.32
        cfg = SvrConfig(kernel=KernelSpec(kind="linear"), c=1.0, epsilon=0.1)
        got = qp_oracle(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), cfg)
        assert got == pytest.approx(0.32, abs=1e-7)

    def test_all_inside_tube_gives_zero(self):
        cfg = SvrConfig(kernel=KernelSpec(kind="linear"), c=1.0, epsilon=1.0)
        got = qp_oracle(
            np.array([[0.0], [0.5], [1.0]]), np.array([0.0, 0.5, 1.0]), cfg
        )
        assert got == pytest.approx(0.0, abs=1e-9)

    def test_single_row_is_zero(self):
        cfg = SvrConfig(kernel=KernelSpec(kind="linear"))
        assert qp_oracle(np.array([[1.0]]), np.array([2.0]), cfg) == 0.0

    def test_rejects_large_instances(self):
        cfg = SvrConfig()
        with pytest.raises(ValueError):
            qp_oracle(np.zeros((6, 1)), np.zeros(6), cfg)


class TestDualObjective:
    def test_hand_value(self):
        k = np.array([[0.0, 0.0], [0.0, 1.0]])
        beta = np.array([-0.8, 0.8])
        got = dual_objective(k, np.array([0.0, 1.0]), beta, 0.1)
        assert got == pytest.approx(0.32)

    def test_zero_vector_is_zero(self, rng):
        k = np.eye(4)
        assert dual_objective(k, rng.normal(size=4), np.zeros(4), 0.2) == 0.0


class TestSvrFit:
    def test_two_point_hand_solution(self):
        cfg = SvrConfig(kernel=KernelSpec(kind="linear"), c=1.0, epsilon=0.1)
        params = svr_fit(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), cfg)
        assert params.converged
        assert params.alphas == pytest.approx([-0.8, 0.8])
        assert params.bias == pytest.approx(0.1)
        assert params.support_vectors.shape == (2, 1)

    def test_flat_targets_inside_tube(self):
        # epsilon tube swallows every target: no support vectors, constant fit
        cfg = SvrConfig(kernel=KernelSpec(kind="linear"), c=1.0, epsilon=1.0)
        params = svr_fit(
            np.array([[0.0], [0.5], [1.0]]), np.array([0.0, 0.5, 1.0]), cfg
        )
        assert params.converged
        assert params.alphas == pytest.approx([0.0, 0.0, 0.0])
        assert params.bias == pytest.approx(0.5)
        assert params.support_vectors.shape == (0, 1)
        assert svr_predict(params, params.kernel, np.array([[9.0]]))[0] == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "spec",
        [
            KernelSpec(kind="linear"),
            KernelSpec(kind="rbf"),
            KernelSpec(kind="poly", degree=2),
        ],
    )
    def test_matches_exhaustive_oracle(self, spec, rng):
        for _ in range(4):
            n = int(rng.integers(2, 5))
            x = rng.normal(size=(n, 1))
            y = rng.normal(size=n)
            cfg = SvrConfig(
                kernel=spec,
                c=float(rng.uniform(0.5, 2.0)),
                epsilon=float(rng.uniform(0.05, 0.3)),
                tolerance=1e-8,
            )
            params = svr_fit(x, y, cfg)
            solved = dual_objective(
                gram_matrix(params.kernel, x, x), y, params.alphas, cfg.epsilon
            )
            assert solved == pytest.approx(qp_oracle(x, y, cfg), abs=1e-4)

    def test_duplicate_rows_handled(self):
        # identical rows make eta = 0 for that pair; the step must stay finite
        x = np.array([[0.0], [0.0], [1.0]])
        y = np.array([0.0, 0.4, 1.0])
        cfg = SvrConfig(kernel=KernelSpec(kind="linear"), c=1.0, epsilon=0.05, tolerance=1e-8)
        params = svr_fit(x, y, cfg)
        assert np.all(np.isfinite(params.alphas))
        assert np.isfinite(params.bias)
        solved = dual_objective(gram_matrix(params.kernel, x, x), y, params.alphas, cfg.epsilon)
        assert solved == pytest.approx(qp_oracle(x, y, cfg), abs=1e-4)

    def test_kkt_conditions(self, rng):
        x = rng.normal(size=(20, 2))
        y = np.sin(x[:, 0]) + 0.1 * rng.normal(size=20)
        cfg = SvrConfig(kernel=KernelSpec(kind="rbf"), c=2.0, epsilon=0.1, tolerance=1e-8)
        params = svr_fit(x, y, cfg)
        report = kkt_report(x, y, cfg, params)
        assert abs(report["sum"]) < 1e-10
        assert report["box_excess"] <= 1e-8
        # strictly interior dual coefficients must sit on the tube boundary
        interior = (np.abs(params.alphas) > 1e-6) & (np.abs(params.alphas) < cfg.c - 1e-6)
        if np.any(interior):
            assert np.abs(np.abs(report["resid"][interior]) - cfg.epsilon).max() < 1e-4
        # every prediction residual beyond the tube needs a bound coefficient
        outside = np.abs(report["resid"]) > cfg.epsilon + 1e-4
        assert np.all(np.abs(np.abs(params.alphas[outside]) - cfg.c) < 1e-8)

    def test_row_order_invariance(self, rng):
        x = rng.normal(size=(12, 1))
        y = np.cos(2.0 * x[:, 0])
        cfg = SvrConfig(kernel=KernelSpec(kind="rbf", gamma=0.8), c=1.5,
                        epsilon=0.05, tolerance=1e-10)
        base = svr_fit(x, y, cfg)
        perm = rng.permutation(12)
        shuffled = svr_fit(x[perm], y[perm], cfg)
        queries = rng.normal(size=(5, 1))
        assert svr_predict(base, base.kernel, queries) == pytest.approx(
            svr_predict(shuffled, shuffled.kernel, queries), abs=1e-6
        )

    def test_pass_budget_flags_not_converged(self, rng):
        x = rng.normal(size=(15, 1))
        y = rng.normal(size=15)
        cfg = SvrConfig(kernel=KernelSpec(kind="rbf"), epsilon=0.01, max_passes=1)
        params = svr_fit(x, y, cfg)
        assert not params.converged
        assert params.passes == 1
        out = svr_predict(params, params.kernel, x)
        assert np.all(np.isfinite(out))

    def test_overflowing_kernel_rejected(self):
        spec = KernelSpec(kind="poly", gamma=1.0, degree=7)
        x = np.array([[1e60], [2e60], [3e60]])
        with pytest.raises(DegenerateKernelMatrix):
            svr_fit(x, np.array([1.0, 2.0, 3.0]), SvrConfig(kernel=spec))

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            svr_fit(np.zeros((3, 1)), np.zeros(4), SvrConfig())

    def test_needs_two_rows(self):
        with pytest.raises(DimensionMismatch):
            svr_fit(np.zeros((1, 1)), np.zeros(1), SvrConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SvrConfig(c=0.0)
        with pytest.raises(ValueError):
            SvrConfig(epsilon=-0.1)
        with pytest.raises(ValueError):
            SvrConfig(max_passes=0)


class TestSvrPredict:
    def test_single_vector_returns_float(self, rng):
        x = rng.normal(size=(8, 2))
        y = x[:, 0] + x[:, 1]
        params = svr_fit(x, y, SvrConfig(kernel=KernelSpec(kind="linear"), c=10.0))
        out = svr_predict(params, params.kernel, x[0])
        assert isinstance(out, float)

    def test_batch_matches_singles(self, rng):
        x = rng.normal(size=(10, 1))
        y = np.tanh(x[:, 0])
        params = svr_fit(x, y, SvrConfig(kernel=KernelSpec(kind="rbf")))
        batch = svr_predict(params, params.kernel, x)
        singles = [svr_predict(params, params.kernel, row) for row in x]
        assert batch == pytest.approx(singles)

    def test_linear_fit_tracks_line(self):
        x = np.linspace(0.0, 1.0, 9)[:, None]
        y = 2.0 * x[:, 0] + 0.3
        params = svr_fit(x, y, SvrConfig(
            kernel=KernelSpec(kind="linear"), c=100.0, epsilon=0.01, tolerance=1e-8,
        ))
        pred = svr_predict(params, params.kernel, x)
        assert np.max(np.abs(pred - y)) <= 0.01 + 1e-6

    def test_width_mismatch(self, rng):
        x = rng.normal(size=(6, 2))
        params = svr_fit(x, rng.normal(size=6), SvrConfig(kernel=KernelSpec(kind="linear")))
        with pytest.raises(DimensionMismatch):
            svr_predict(params, params.kernel, np.zeros((2, 3)))
