import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alps.basis import build_knot_vector, eval_basis
from alps.errors import (
    DegenerateVarianceError,
    InvalidInputError,
    NoValidLambdaError,
    RankDeficiencyError,
)
from alps.penalty import penalty_matrix
from alps.solver import (
    LambdaGrid,
    error_variance,
    fit_penalized,
    gcv_score,
    minimize_gcv_lambda,
    residual_df,
    smoother_matrix,
)
from alps.synth import gramacy_lee


def uniform_design(n=40, m=8, p=3, lo=0.0, hi=1.0):
    times = np.linspace(lo, hi, n)
    kv = build_knot_vector(times, m, p)
    return times, kv, eval_basis(kv, times)


def normal_equations_oracle(Bv, y, P):
    """Direct dense solve of (B'B + P) theta = B'y."""
    return np.linalg.solve(Bv.T @ Bv + P, Bv.T @ y)


class TestFitPenalized:
    def test_constant_in_penalty_null_space(self):
        times, kv, B = uniform_design()
        y = np.full(len(times), 7.0)
        for q, lam in [(1, 0.5), (2, 100.0), (1, 1e4)]:
            spec = penalty_matrix(q, kv.n_bases, lam)
            res = fit_penalized(B, y, spec)
            np.testing.assert_allclose(B.values @ res.theta, y, atol=1e-9)

    def test_linear_matches_normal_equations_oracle(self):
        times, kv, B = uniform_design(n=30, m=6, p=3)
        y = 2.0 - 3.0 * times
        spec = penalty_matrix(2, kv.n_bases, 5.0)
        res = fit_penalized(B, y, spec)
        expected = normal_equations_oracle(B.values, y, spec.P)
        np.testing.assert_allclose(res.theta, expected, atol=1e-9)
        np.testing.assert_allclose(B.values @ res.theta, y, atol=1e-8)

    def test_unpenalized_square_system_interpolates(self):
        rng = np.random.default_rng(2)
        times = np.sort(rng.uniform(0, 1, 9))
        kv = build_knot_vector(times, m=6, p=3)  # c = 9 = n
        B = eval_basis(kv, times)
        y = rng.normal(size=9)
        res = fit_penalized(B, y, penalty_matrix(2, 9, 0.0))
        assert res.residual_ss < 1e-16 * 9 * np.var(y)

    def test_stationarity_condition(self):
        rng = np.random.default_rng(4)
        times, kv, B = uniform_design(n=50, m=10, p=4)
        y = rng.normal(size=50)
        spec = penalty_matrix(2, kv.n_bases, 0.37)
        res = fit_penalized(B, y, spec)
        A = B.values.T @ B.values + spec.P
        rhs = B.values.T @ y
        rel = np.linalg.norm(A @ res.theta - rhs) / np.linalg.norm(rhs)
        assert rel < 1e-10

    def test_unsupported_basis_raises_with_index_range(self):
        # Data only in the left half; right-side bases have empty support.
        times = np.linspace(0, 1, 20)
        kv = build_knot_vector(times, m=8, p=2, placement="equidistant")
        B_left = eval_basis(kv, times[times <= 0.4])
        y = np.zeros(B_left.values.shape[0])
        with pytest.raises(RankDeficiencyError, match=r"\d+\.\.\d+"):
            fit_penalized(B_left, y, penalty_matrix(2, kv.n_bases, 0.0))

    def test_shape_mismatch(self):
        times, kv, B = uniform_design()
        with pytest.raises(InvalidInputError):
            fit_penalized(B, np.zeros(len(times) + 1), penalty_matrix(2, kv.n_bases, 1.0))


class TestSmootherMatrix:
    def test_unpenalized_square_is_identity(self):
        rng = np.random.default_rng(6)
        times = np.sort(rng.uniform(0, 1, 8))
        kv = build_knot_vector(times, m=5, p=3)  # c = 8
        B = eval_basis(kv, times)
        H = smoother_matrix(B, penalty_matrix(2, 8, 0.0))
        np.testing.assert_allclose(H, np.eye(8), atol=1e-7)

    def test_huge_lambda_first_order_keeps_only_constant(self):
        times, kv, B = uniform_design(n=25, m=6, p=3)
        H = smoother_matrix(B, penalty_matrix(1, kv.n_bases, 1e12))
        assert abs(np.trace(H) - 1.0) < 1e-3

    def test_consistent_with_fit(self):
        rng = np.random.default_rng(8)
        times, kv, B = uniform_design(n=35, m=7, p=3)
        y = rng.normal(size=35)
        spec = penalty_matrix(2, kv.n_bases, 0.01)
        H = smoother_matrix(B, spec)
        res = fit_penalized(B, y, spec)
        np.testing.assert_allclose(H @ y, B.values @ res.theta, atol=1e-10)


class TestGcvScore:
    def test_zero_residuals_zero_score(self):
        rng = np.random.default_rng(10)
        times, kv, B = uniform_design(n=30, m=5, p=3)
        theta = rng.normal(size=kv.n_bases)
        y = B.values @ theta  # exactly representable
        assert gcv_score(B, y, penalty_matrix(2, kv.n_bases, 0.0)) < 1e-18

    def test_interpolation_limit_is_inf(self):
        times = np.array([0.0, 1.0])
        kv = build_knot_vector(times, m=1, p=1)  # c = 2 = n
        B = eval_basis(kv, times)
        score = gcv_score(B, np.array([0.3, 0.9]), penalty_matrix(1, 2, 0.0))
        assert score == np.inf

    def test_matches_formula_transcription_oracle(self):
        rng = np.random.default_rng(12)
        times = np.sort(rng.uniform(0.5, 2.5, 10))
        y = gramacy_lee(times) + rng.normal(0, 0.1, 10)
        kv = build_knot_vector(times, m=3, p=3)  # c = 6
        B = eval_basis(kv, times)
        spec = penalty_matrix(2, 6, 0.1)
        # Literal transcription with an explicit inverse and smoother matrix.
        H = B.values @ np.linalg.inv(B.values.T @ B.values + spec.P) @ B.values.T
        resid = (np.eye(10) - H) @ y
        oracle = np.sum((resid / (1.0 - np.trace(H) / 10.0)) ** 2)
        assert gcv_score(B, y, spec) == pytest.approx(oracle, rel=1e-10)


class TestMinimizeGcvLambda:
    def test_noiseless_linear_prefers_largest_lambda(self):
        times, kv, B = uniform_design(n=20, m=4, p=3)
        y = 1.0 + 2.0 * times
        lam, cost = minimize_gcv_lambda(B, y, q=2)
        assert lam == LambdaGrid().hi
        assert cost < 1e-18

    def test_strong_noise_selects_interior_lambda(self):
        times, kv, B = uniform_design(n=60, m=25, p=3)
        truth = np.sin(2 * np.pi * times)
        better = 0
        for seed in range(8):
            rng = np.random.default_rng(seed)
            y = truth + rng.normal(0, 0.5, 60)
            lam, _ = minimize_gcv_lambda(B, y, q=2)
            assert lam > LambdaGrid().lo
            fit_sel = fit_penalized(B, y, penalty_matrix(2, kv.n_bases, lam))
            fit_min = fit_penalized(B, y, penalty_matrix(2, kv.n_bases, LambdaGrid().lo))
            rmse_sel = np.sqrt(np.mean((B.values @ fit_sel.theta - truth) ** 2))
            rmse_min = np.sqrt(np.mean((B.values @ fit_min.theta - truth) ** 2))
            better += rmse_sel < rmse_min
        assert better >= 7

    def test_beats_reference_candidate_set(self):
        # Candidate values from the under/over-smoothing illustration.
        rng = np.random.default_rng(21)
        times = np.sort(rng.uniform(0, 10, 50))
        kv = build_knot_vector(times, m=10, p=4)
        B = eval_basis(kv, times)
        y = np.sin(times) + rng.normal(0, 0.3, 50)
        lam, cost = minimize_gcv_lambda(B, y, q=2)
        candidates = [0.5, 0.01, 0.005, 0.001]
        scores = [gcv_score(B, y, penalty_matrix(2, kv.n_bases, c)) for c in candidates]
        assert cost <= min(scores) * (1 + 1e-9)

    def test_all_candidates_degenerate(self):
        # Two points with a second-order penalty: the smoothing limit is a
        # line, which interpolates any two points at every lambda.
        times = np.array([0.0, 1.0])
        kv = build_knot_vector(times, m=1, p=2)  # c = 3
        B = eval_basis(kv, times)
        with pytest.raises(NoValidLambdaError):
            minimize_gcv_lambda(B, np.array([0.0, 1.0]), q=2)

    def test_deterministic(self):
        rng = np.random.default_rng(33)
        times, kv, B = uniform_design(n=45, m=9, p=4)
        y = np.cos(3 * times) + rng.normal(0, 0.2, 45)
        first = minimize_gcv_lambda(B, y, q=2)
        second = minimize_gcv_lambda(B, y, q=2)
        assert first == second

    def test_grid_validation(self):
        with pytest.raises(InvalidInputError):
            LambdaGrid(-1.0, 1.0, 10)
        with pytest.raises(InvalidInputError):
            LambdaGrid(1.0, 0.5, 10)


class TestResidualDf:
    def test_identity_gives_zero(self):
        assert residual_df(np.eye(5)) == pytest.approx(0.0)

    def test_null_smoother_gives_n(self):
        assert residual_df(np.zeros((7, 7))) == pytest.approx(7.0)

    def test_matches_spectral_oracle(self):
        rng = np.random.default_rng(14)
        n = 12
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        h = rng.uniform(0, 1, n)
        H = Q @ np.diag(h) @ Q.T
        assert residual_df(H) == pytest.approx(np.sum((1 - h) ** 2), abs=1e-9)

    def test_requires_square(self):
        with pytest.raises(InvalidInputError):
            residual_df(np.zeros((3, 4)))


class TestErrorVariance:
    def test_zero_residuals(self):
        B = np.eye(3)
        theta = np.array([1.0, 2.0, 3.0])
        assert error_variance(theta, B, theta, df_res=2.0) == 0.0

    def test_direct_arithmetic(self):
        B = np.eye(2)
        y = np.array([1.0, -1.0])
        theta = np.zeros(2)
        assert error_variance(y, B, theta, df_res=2.0) == pytest.approx(1.0)

    def test_nonpositive_df_rejected(self):
        with pytest.raises(DegenerateVarianceError):
            error_variance(np.ones(3), np.eye(3), np.ones(3), df_res=0.0)

    def test_unbiased_over_replicates(self):
        # Linear truth on uniform knots sits in the penalty null space, so
        # the estimator is exactly unbiased there.
        times, kv, B = uniform_design(n=50, m=8, p=3)
        truth = 1.0 + 0.5 * times
        spec = penalty_matrix(2, kv.n_bases, 1.0)
        H = smoother_matrix(B, spec)
        df = residual_df(H)
        sigma = 0.3
        rng = np.random.default_rng(99)
        estimates = []
        for _ in range(500):
            y = truth + rng.normal(0, sigma, 50)
            res = fit_penalized(B, y, spec)
            estimates.append(error_variance(y, B, res.theta, df))
        assert np.mean(estimates) == pytest.approx(sigma**2, rel=0.10)


class TestInvariants:
    def test_trace_monotone_in_lambda(self):
        times, kv, B = uniform_design(n=30, m=7, p=3)
        traces = [
            np.trace(smoother_matrix(B, penalty_matrix(2, kv.n_bases, lam)))
            for lam in np.geomspace(1e-4, 1e4, 17)
        ]
        assert np.all(np.diff(traces) <= 1e-9)

    def test_trace_bounds(self):
        times, kv, B = uniform_design(n=30, m=7, p=3)
        c = kv.n_bases
        for q in (1, 2):
            for lam in (1e-3, 1.0, 1e3):
                tr = np.trace(smoother_matrix(B, penalty_matrix(q, c, lam)))
                assert q - 1e-9 <= tr <= c + 1e-9

    def test_polynomial_reproduction_on_uniform_knots(self):
        times, kv, B = uniform_design(n=25, m=6, p=3)
        cases = [(np.full(25, 3.0), 1), (np.full(25, 3.0), 2), (2 - 0.7 * times, 2)]
        for y, q in cases:
            for lam in LambdaGrid().points():
                res = fit_penalized(B, y, penalty_matrix(q, kv.n_bases, lam))
                np.testing.assert_allclose(B.values @ res.theta, y, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.floats(min_value=1e-3, max_value=1e3),
    st.integers(min_value=1, max_value=2),
)
def test_fit_matches_oracle_property(seed, lam, q):
    rng = np.random.default_rng(seed)
    n = rng.integers(15, 40)
    times = np.sort(rng.uniform(0, 5, n))
    if np.unique(times).size < 2:
        return
    m = int(rng.integers(1, 6))
    kv = build_knot_vector(times, m, 3)
    B = eval_basis(kv, times)
    y = rng.normal(size=n)
    spec = penalty_matrix(q, kv.n_bases, lam)
    res = fit_penalized(B, y, spec)
    expected = normal_equations_oracle(B.values, y, spec.P)
    np.testing.assert_allclose(res.theta, expected, atol=1e-8)
