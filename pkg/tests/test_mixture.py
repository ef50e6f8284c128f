"""Two-group mixture on signed p-values and the masked-data EM."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from signedknockoff.mixture import (
    EMReport,
    MixtureParams,
    _m_step,
    default_init,
    f1_density,
    fit_em,
    lfdr_pair,
    log_likelihood,
    pair_density,
    sample_mixture,
)
from _helpers import make_view, revealed_view


def mixture_cdf(q, params):
    null = (q + 1.0) / 2.0
    left = ((q + 1.0) / 2.0) ** params.shape_left
    right = 1.0 - ((1.0 - q) / 2.0) ** params.shape_right
    alt = params.lam * left + (1.0 - params.lam) * right
    return params.pi0 * null + (1.0 - params.pi0) * alt


class TestDensities:
    def test_unit_shapes_are_uniform(self):
        params = MixtureParams(pi0=0.4, lam=0.7, shape_left=1.0, shape_right=1.0)
        assert f1_density(0.3, params) == pytest.approx(0.5, abs=1e-14)
        assert f1_density(-0.8, params) == pytest.approx(0.5, abs=1e-14)

    def test_left_component_at_origin(self):
        params = MixtureParams(pi0=0.5, lam=1.0, shape_left=0.5, shape_right=0.9)
        assert f1_density(0.0, params) == pytest.approx(0.25 * math.sqrt(2.0), abs=1e-12)

    def test_integrates_to_one(self):
        for lam, a, b in [(0.3, 0.4, 0.7), (0.9, 0.15, 1.0), (0.5, 1.0, 0.1)]:
            params = MixtureParams(pi0=0.2, lam=lam, shape_left=a, shape_right=b)
            total, err = integrate.quad(
                lambda q: f1_density(q, params), -1.0, 1.0, limit=400
            )
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_scalar_and_array(self):
        params = MixtureParams(pi0=0.5, lam=0.5, shape_left=0.3, shape_right=0.3)
        q = np.array([-0.5, 0.0, 0.5])
        out = f1_density(q, params)
        assert out.shape == (3,)
        assert isinstance(f1_density(0.5, params), float)
        assert out[2] == pytest.approx(f1_density(0.5, params))

    def test_domain(self):
        params = MixtureParams(pi0=0.5, lam=0.5, shape_left=0.3, shape_right=0.3)
        with pytest.raises(ValueError):
            f1_density(1.0, params)
        with pytest.raises(ValueError):
            f1_density(np.nan, params)


class TestPairDensity:
    def test_pure_null_is_one(self):
        params = MixtureParams(pi0=1.0, lam=0.5, shape_left=0.3, shape_right=0.3)
        assert pair_density(0.9, 0.1, params) == pytest.approx(1.0)
        assert pair_density(-0.3, -0.7, params) == pytest.approx(1.0)

    def test_unit_shapes_are_one(self):
        params = MixtureParams(pi0=0.3, lam=0.8, shape_left=1.0, shape_right=1.0)
        assert pair_density(0.6, 0.4, params) == pytest.approx(1.0, abs=1e-14)

    def test_worked_negative_pair(self):
        params = MixtureParams(pi0=0.5, lam=1.0, shape_left=0.5, shape_right=0.9)
        expected = 0.5 + 0.5 * (f1_density(-0.3, params) + f1_density(-0.7, params))
        assert pair_density(-0.3, -0.7, params) == pytest.approx(expected, abs=1e-14)
        # frozen: 0.25*(0.35^-0.5 + 0.15^-0.5) gives the alternative mass
        assert pair_density(-0.3, -0.7, params) == pytest.approx(1.0340369, abs=1e-6)

    def test_rejects_non_pairs(self):
        params = MixtureParams(pi0=0.5, lam=0.5, shape_left=0.3, shape_right=0.3)
        with pytest.raises(ValueError):
            pair_density(0.3, 0.6, params)
        with pytest.raises(ValueError):
            pair_density(-0.3, 0.7, params)


class TestLfdr:
    def test_endpoints(self):
        sure_null = MixtureParams(pi0=1.0, lam=0.5, shape_left=0.3, shape_right=0.3)
        assert lfdr_pair(0.9, 0.1, sure_null) == pytest.approx(1.0)
        no_null = MixtureParams(pi0=0.0, lam=0.5, shape_left=0.3, shape_right=0.3)
        assert lfdr_pair(0.9, 0.1, no_null) == pytest.approx(0.0)

    def test_vanishes_in_the_tail(self):
        params = MixtureParams(pi0=0.5, lam=0.5, shape_left=0.1, shape_right=0.1)
        near = lfdr_pair(-0.99, -0.01, params)
        nearer = lfdr_pair(-0.9999, -0.0001, params)
        assert nearer < near < 0.5
        assert nearer < 0.01

    def test_bounded_by_one(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            q = float(np.clip(rng.uniform(-1, 1), -1 + 1e-9, 1 - 1e-9)) or 0.5
            qt = math.copysign(1.0, q) - q
            params = MixtureParams(
                pi0=float(rng.uniform(0, 1)),
                lam=float(rng.uniform(0, 1)),
                shape_left=float(rng.uniform(0.01, 1)),
                shape_right=float(rng.uniform(0.01, 1)),
            )
            assert 0.0 <= lfdr_pair(q, qt, params) <= 1.0


class TestLogLikelihood:
    def test_fully_revealed_unit_shapes(self):
        q = np.array([0.3, -0.2, 0.8, -0.9, 0.55])
        params = MixtureParams(pi0=0.6, lam=0.4, shape_left=1.0, shape_right=1.0)
        assert log_likelihood(revealed_view(q), params) == pytest.approx(
            5 * math.log(0.5), abs=1e-12
        )

    def test_fully_masked_pure_null(self):
        q = np.array([0.3, -0.2, 0.8, -0.9])
        params = MixtureParams(pi0=1.0, lam=0.4, shape_left=0.3, shape_right=0.3)
        assert log_likelihood(make_view(q), params) == pytest.approx(0.0, abs=1e-12)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(21)
        q = np.clip(rng.uniform(-1, 1, 30), -1 + 1e-9, 1 - 1e-9)
        q[q == 0.0] = 0.5
        view = make_view(q, i=3, j=2)
        params = MixtureParams(pi0=0.7, lam=0.3, shape_left=0.25, shape_right=0.6)
        direct = 0.0
        for x in view.revealed_values():
            direct += math.log(
                params.pi0 * 0.5 + (1.0 - params.pi0) * f1_density(float(x), params)
            )
        u, v = view.masked_pair_values()
        for ui, vi in zip(u, v):
            direct += math.log(pair_density(float(ui), float(vi), params))
        assert log_likelihood(view, params) == pytest.approx(direct, abs=1e-10)


class TestMStep:
    def test_shape_update_matches_grid_search(self):
        # the closed-form weighted Beta(a,1) MLE against a brute grid
        rng = np.random.default_rng(33)
        for _ in range(5):
            x = rng.uniform(-1 + 1e-6, 1 - 1e-6, size=200)
            w = rng.uniform(0.0, 1.0, size=200)
            terms = np.log((x + 1.0) / 2.0)
            s, d = float(np.sum(w)), float(np.dot(w, terms))

            def objective(a):
                return s * math.log(a / 2.0) + (a - 1.0) * d

            grid = np.linspace(1e-4, 1.0, 20001)
            best = float(grid[np.argmax([objective(a) for a in grid])])
            closed = min(max(-s / d, 1e-4), 1.0)
            assert abs(closed - best) <= 1e-3

    def test_m_step_uses_closed_form(self):
        params = MixtureParams(pi0=0.5, lam=0.5, shape_left=0.3, shape_right=0.3)
        out = _m_step(params, n=10, s_null=4.0, s_left=3.0, s_right=3.0, d_left=-9.0, d_right=-5.0)
        assert out.pi0 == pytest.approx(0.4)
        assert out.lam == pytest.approx(0.5)
        assert out.shape_left == pytest.approx(3.0 / 9.0)
        assert out.shape_right == pytest.approx(min(3.0 / 5.0, 1.0))

    def test_zero_weight_keeps_previous(self):
        params = MixtureParams(pi0=0.5, lam=0.77, shape_left=0.21, shape_right=0.3)
        out = _m_step(params, n=10, s_null=10.0, s_left=0.0, s_right=0.0, d_left=0.0, d_right=0.0)
        assert out.lam == 0.77
        assert out.shape_left == 0.21
        assert out.shape_right == 0.3


class TestFitEM:
    def test_trace_nondecreasing(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            truth = MixtureParams(
                pi0=float(rng.uniform(0.3, 1.0)),
                lam=float(rng.uniform(0.1, 0.9)),
                shape_left=float(rng.uniform(0.05, 1.0)),
                shape_right=float(rng.uniform(0.05, 1.0)),
            )
            q = sample_mixture(truth, 300, rng)
            view = make_view(q, i=2, j=2)
            init = MixtureParams(
                pi0=float(rng.uniform(0.2, 0.95)),
                lam=float(rng.uniform(0.05, 0.95)),
                shape_left=float(rng.uniform(0.05, 1.0)),
                shape_right=float(rng.uniform(0.05, 1.0)),
            )
            report = fit_em(view, init=init, max_iter=60)
            diffs = np.diff(report.loglik_trace)
            assert np.all(diffs >= -1e-8)

    def test_single_update_does_not_decrease(self):
        rng = np.random.default_rng(4)
        q = sample_mixture(
            MixtureParams(pi0=0.7, lam=0.5, shape_left=0.2, shape_right=0.2), 400, rng
        )
        view = make_view(q, i=1, j=1)
        report = fit_em(view, max_iter=1)
        assert len(report.loglik_trace) == 2
        assert report.loglik_trace[1] >= report.loglik_trace[0] - 1e-10

    def test_uniform_data_estimates_high_null_share(self):
        rng = np.random.default_rng(6)
        q = sample_mixture(
            MixtureParams(pi0=1.0, lam=0.5, shape_left=0.3, shape_right=0.3), 5000, rng
        )
        report = fit_em(make_view(q, i=1, j=1), max_iter=200)
        assert report.params.pi0 >= 0.9

    def test_converges_and_reports(self):
        rng = np.random.default_rng(8)
        q = sample_mixture(
            MixtureParams(pi0=0.8, lam=0.5, shape_left=0.15, shape_right=0.15), 1000, rng
        )
        report = fit_em(make_view(q, i=1, j=1), max_iter=300)
        assert isinstance(report, EMReport)
        assert report.converged
        assert report.iterations < 300
        assert math.isfinite(report.loglik_trace[-1])

    def test_empty_view_rejected(self):
        view = make_view(np.array([0.4]))
        empty = type(view)(
            pair_min=np.empty(0),
            sign=np.empty(0, dtype=np.int8),
            distance=np.empty(0),
            pos_order=np.empty(0, dtype=int),
            neg_order=np.empty(0, dtype=int),
            accepted=np.empty(0, dtype=bool),
            revealed_q=np.empty(0),
            i_accepted=0,
            j_accepted=0,
        )
        with pytest.raises(ValueError):
            fit_em(empty)


class TestDefaultInit:
    def test_lambda_from_far_pairs(self):
        init = default_init(make_view(np.array([0.9, 0.85, -0.8])))
        assert init.pi0 == 0.9
        assert init.lam == pytest.approx(1.0 / 3.0)
        assert init.shape_left == init.shape_right == 0.3

    def test_lambda_clipped_off_boundary(self):
        assert default_init(make_view(np.array([0.9, 0.95, 0.85]))).lam == 0.02
        assert default_init(make_view(np.array([-0.9, -0.95, -0.85]))).lam == 0.98

    def test_no_far_pairs_is_balanced(self):
        assert default_init(make_view(np.array([0.55, -0.45, 0.6]))).lam == 0.5


class TestSampleMixture:
    def test_distribution(self):
        params = MixtureParams(pi0=0.6, lam=0.7, shape_left=0.25, shape_right=0.5)
        rng = np.random.default_rng(12)
        draws = sample_mixture(params, 20000, rng)
        result = stats.kstest(draws, lambda q: mixture_cdf(q, params))
        assert result.pvalue > 0.01

    def test_values_in_open_interval(self):
        params = MixtureParams(pi0=0.2, lam=0.5, shape_left=0.05, shape_right=0.05)
        draws = sample_mixture(params, 5000, np.random.default_rng(13))
        assert np.all(np.abs(draws) < 1.0)
        assert np.all(draws != 0.0)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            MixtureParams(pi0=1.1, lam=0.5, shape_left=0.3, shape_right=0.3)
        with pytest.raises(ValueError):
            MixtureParams(pi0=0.5, lam=-0.1, shape_left=0.3, shape_right=0.3)
        with pytest.raises(ValueError):
            MixtureParams(pi0=0.5, lam=0.5, shape_left=0.0, shape_right=0.3)
        with pytest.raises(ValueError):
            MixtureParams(pi0=0.5, lam=0.5, shape_left=0.3, shape_right=1.5)
