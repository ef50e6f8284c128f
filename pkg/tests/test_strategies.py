"""Side-selection strategies: alternation, greedy distance, model-based."""

import math

import numpy as np
import pytest

import signedknockoff.strategies
from _helpers import make_view
from signedknockoff.mixture import MixtureParams, fit_em, sample_mixture
from signedknockoff.procedure import Side, build_pairs, run
from signedknockoff.strategies import (
    LfdrSides,
    alternate_strategy,
    available_strategies,
    lfdr_strategy,
    make_strategy,
    nearest_strategy,
)


def spying(strategy, log):
    def wrapped(view):
        side = strategy(view)
        log.append(side)
        return side

    return wrapped


class TestAlternate:
    def test_alternates_starting_positive(self):
        sides = []
        q = np.array([0.55, 0.6, 0.65, -0.55, -0.6, -0.65])
        result = run(build_pairs(q), spying(alternate_strategy(), sides), alpha=1e-9)
        # the last acceptance is forced, so only three consults happen
        assert sides == [Side.POSITIVE, Side.NEGATIVE, Side.POSITIVE]
        assert result.ij_trace == [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)]

    def test_pure_function_of_view(self):
        strategy = alternate_strategy()
        view = make_view(np.array([0.6, -0.6, 0.7, -0.7]), i=1, j=1)
        assert strategy(view) == strategy(view)


class TestNearest:
    def test_picks_smaller_distance(self):
        strategy = nearest_strategy()
        # next positive at distance 0.1, next negative at 0.2
        view = make_view(np.array([0.6, -0.7, 0.9, -0.9]), i=0, j=0)
        assert strategy(view) is Side.POSITIVE
        # mirrored: negative side is closer now
        view = make_view(np.array([0.7, -0.6, 0.9, -0.9]), i=0, j=0)
        assert strategy(view) is Side.NEGATIVE

    def test_tie_goes_positive(self):
        view = make_view(np.array([0.6, -0.6]), i=0, j=0)
        assert nearest_strategy()(view) is Side.POSITIVE

    def test_exhausted_side_is_an_error(self):
        view = make_view(np.array([0.6, 0.7]), i=0, j=0)
        with pytest.raises(RuntimeError):
            nearest_strategy()(view)


class TestLfdr:
    def test_symmetric_data_ties_go_positive(self):
        # mirror-image data fits an exactly symmetric model, so every
        # consult compares equal lfdrs and the tie breaks positive
        base = np.array([0.55, 0.62, 0.7, 0.86, 0.93])
        q = np.concatenate([base, -base])
        sides = []
        strategy = lfdr_strategy(refit_interval=math.inf)
        run(build_pairs(q), spying(strategy, sides), alpha=1e-9)
        assert sides == [Side.POSITIVE] * 4
        assert strategy.params.lam == 0.5
        assert strategy.params.shape_left == strategy.params.shape_right

    def test_signal_side_accepted_last(self):
        # all signal on the negative side: negative pairs look less null,
        # so positive pairs (higher lfdr) are accepted first
        rng = np.random.default_rng(14)
        truth = MixtureParams(pi0=0.5, lam=1.0, shape_left=0.1, shape_right=0.3)
        q = sample_mixture(truth, 400, rng)
        sides = []
        run(build_pairs(q), spying(lfdr_strategy(refit_interval=math.inf), sides), alpha=1e-12)
        first = sides[:20]
        assert first.count(Side.POSITIVE) >= 15

    def test_fits_once_with_infinite_interval(self, monkeypatch):
        rng = np.random.default_rng(15)
        q = np.clip(rng.uniform(-1, 1, 200), -1 + 1e-9, 1 - 1e-9)
        calls = []

        def recording_fit(view, **kw):
            calls.append(view.i_accepted + view.j_accepted)
            return fit_em(view, **kw)

        monkeypatch.setattr(signedknockoff.strategies, "fit_em", recording_fit)
        run(build_pairs(q), lfdr_strategy(refit_interval=math.inf), alpha=1e-12)
        assert calls == [2]

    def test_refit_counting(self, monkeypatch):
        rng = np.random.default_rng(16)
        q = np.clip(rng.uniform(-1, 1, 60), -1 + 1e-9, 1 - 1e-9)
        calls = []

        def recording_fit(view, **kw):
            calls.append(view.i_accepted + view.j_accepted)
            return fit_em(view, **kw)

        monkeypatch.setattr(signedknockoff.strategies, "fit_em", recording_fit)
        run(build_pairs(q), lfdr_strategy(refit_interval=10), alpha=1e-12)
        # first fit at the two initial acceptances, then one per 10 more
        assert calls[0] == 2
        assert len(calls) >= 3
        assert all(b - a == 10 for a, b in zip(calls, calls[1:]))

    def test_default_interval_refits_every_step_on_tiny_data(self, monkeypatch):
        # refit_interval=None resolves to max(1, n // 50) = 1 here
        q = np.array([0.6, -0.6, 0.7, -0.7, 0.8, -0.8])
        calls = []

        def recording_fit(view, **kw):
            calls.append(view.i_accepted + view.j_accepted)
            return fit_em(view, **kw)

        monkeypatch.setattr(signedknockoff.strategies, "fit_em", recording_fit)
        run(build_pairs(q), lfdr_strategy(), alpha=1e-12)
        assert calls == sorted(set(calls))
        assert len(calls) >= 2

    def test_warm_start_reuses_fitted_params(self, monkeypatch):
        rng = np.random.default_rng(18)
        q = np.clip(rng.uniform(-1, 1, 120), -1 + 1e-9, 1 - 1e-9)
        inits = []

        def recording_fit(view, init=None, **kw):
            inits.append(init)
            return fit_em(view, init=init, **kw)

        monkeypatch.setattr(signedknockoff.strategies, "fit_em", recording_fit)
        run(build_pairs(q), lfdr_strategy(refit_interval=5), alpha=1e-12)
        assert len(inits) >= 2
        assert isinstance(inits[1], MixtureParams)

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            lfdr_strategy(refit_interval=0)
        with pytest.raises(ValueError):
            lfdr_strategy(refit_interval=2.5)
        with pytest.raises(ValueError):
            lfdr_strategy(refit_interval=-math.inf)
        with pytest.raises(ValueError):
            lfdr_strategy(refit_interval=math.nan)
        assert lfdr_strategy(refit_interval=3).refit_interval == 3
        assert lfdr_strategy(refit_interval=math.inf).refit_interval == math.inf

    def test_exhausted_side_is_an_error(self):
        view = make_view(np.array([0.6, 0.7]), i=0, j=0)
        with pytest.raises(RuntimeError):
            lfdr_strategy()(view)


class TestRegistry:
    def test_available(self):
        assert available_strategies() == ["alternate", "lfdr", "nearest"]

    def test_make(self):
        assert isinstance(make_strategy("lfdr", refit_interval=7), LfdrSides)
        assert make_strategy("nearest")(make_view(np.array([0.6, -0.7]))) is Side.POSITIVE

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="alternate"):
            make_strategy("bonferroni")

    def test_options_only_for_lfdr(self):
        with pytest.raises(TypeError):
            make_strategy("nearest", refit_interval=3)
