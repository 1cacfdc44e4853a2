import math
import warnings
from dataclasses import replace

import numpy as np
import pytest

from levygap import catalog
from levygap.asymptotics import beta1
from levygap.errors import DomainError, HypothesisWarning, MomentFailure, UnsupportedClass
from levygap.levy import CompoundPoisson, DoubleExponential, LevyModel, Stable, dual
from levygap.pricing import (
    MarketSpec,
    MonteCarlo,
    OptionSpec,
    applicable_bound,
    correct_continuous_from_discrete,
    correct_discrete_from_continuous,
    correction_hypotheses,
    payoff,
    price_continuous,
    price_discrete,
    rate_bound_check,
    risk_neutral_drift,
    simulate_extrema,
)

from oracles import MERTON_LBP_N50, MERTON_LBP_N50_SE, bs_lookback_call, bs_lookback_put

MARKET = catalog.DEFAULT_MARKET
SEED = 20240611


@pytest.fixture(scope="module")
def merton():
    return catalog.merton()


@pytest.fixture(scope="module")
def bs():
    return risk_neutral_drift(LevyModel(0.0, 0.2), MARKET)


# --------------------------------------------------------------------------
# specs and payoffs


@pytest.mark.parametrize("kwargs", [
    dict(kind="lookback_put", n=10, strike=100.0),
    dict(kind="hindsight_call", n=10),
    dict(kind="hindsight_put", n=10, strike=-1.0),
    dict(kind="straddle", n=10),
    dict(kind="lookback_call", n=0),
    dict(kind="lookback_call", n=10, k_index=11),
    dict(kind="lookback_put", n=10, extremum=0.0),
])
def test_option_spec_rejects(kwargs):
    with pytest.raises(DomainError):
        OptionSpec(**kwargs)


@pytest.mark.parametrize("s0,T", [(0.0, 1.0), (100.0, 0.0), (-1.0, 1.0)])
def test_market_spec_rejects(s0, T):
    with pytest.raises(DomainError):
        MarketSpec(s0, 0.05, 0.0, T)


@pytest.mark.parametrize("kind,strike,terminal,ext,expected", [
    ("hindsight_call", 100.0, 90.0, 100.0, 0.0),
    ("lookback_put", None, 100.0, 100.0, 0.0),
    ("hindsight_put", 110.0, 120.0, 100.0, 10.0),
    ("lookback_call", None, 105.0, 95.0, 10.0),
    ("hindsight_call", 100.0, 90.0, 130.0, 30.0),
])
def test_payoff_examples(kind, strike, terminal, ext, expected):
    assert payoff(OptionSpec(kind, 4, strike=strike), terminal, ext) == pytest.approx(expected)


def test_payoff_vectorised():
    spec = OptionSpec("lookback_put", 4)
    out = payoff(spec, np.array([90.0, 100.0]), np.array([110.0, 100.0]))
    np.testing.assert_allclose(out, [20.0, 0.0])


# --------------------------------------------------------------------------
# risk-neutral drift


def test_risk_neutral_drift_black_scholes():
    mk = MarketSpec(100.0, 0.05, 0.02, 1.0)
    m = risk_neutral_drift(LevyModel(0.3, 0.2), mk)
    assert m.gamma == pytest.approx(0.05 - 0.02 - 0.02, abs=1e-14)


@pytest.mark.parametrize("name", ["merton", "kou", "spectrally_negative"])
def test_risk_neutral_drift_idempotent(name):
    m = catalog.get(name)
    again = risk_neutral_drift(m, MARKET)
    assert again.gamma == pytest.approx(m.gamma, abs=1e-13)
    assert m.laplace_exponent(1.0) == pytest.approx(MARKET.r - MARKET.delta, abs=1e-12)


def test_risk_neutral_drift_needs_exponential_moment():
    with pytest.raises(MomentFailure):
        risk_neutral_drift(LevyModel(0.0, 0.0, Stable(1.5, 1.0, 0.0)), MARKET)
    heavy = LevyModel(0.0, 0.2, CompoundPoisson(1.0, DoubleExponential(0.4, 0.8, 5.0)))
    with pytest.raises(MomentFailure):
        risk_neutral_drift(heavy, MARKET)


def test_merton_discounted_price_is_martingale(merton):
    sample = simulate_extrema(OptionSpec("lookback_put", 1), merton, MARKET, MonteCarlo(10**6, SEED))
    disc = np.exp(sample.batch.terminal - (MARKET.r - MARKET.delta) * MARKET.T)
    se = disc.std(ddof=1) / math.sqrt(disc.size)
    assert abs(disc.mean() - 1.0) < 3 * se


# --------------------------------------------------------------------------
# Monte Carlo prices


def test_no_remaining_dates_is_deterministic(merton):
    spec = OptionSpec("lookback_put", 10, extremum=110.0, k_index=10)
    p = price_discrete(spec, merton, MARKET, MonteCarlo(100, 1))
    assert p.mean == 10.0 and p.stderr == 0.0
    call = OptionSpec("hindsight_call", 10, strike=105.0, extremum=110.0, k_index=10)
    assert price_discrete(call, merton, MARKET, MonteCarlo(100, 1)).mean == 5.0


def test_decreasing_deterministic_path():
    model = LevyModel(-0.1, 0.0)
    p = price_continuous(OptionSpec("lookback_put", 8), model, MARKET, MonteCarlo(1000, 3))
    expected = MARKET.s0 * (math.exp(-MARKET.r * MARKET.T) - math.exp(-MARKET.delta * MARKET.T))
    assert p.mean == pytest.approx(expected, abs=1e-10)
    assert p.stderr == pytest.approx(0.0, abs=1e-10)


def test_merton_pinned_regression(merton):
    p = price_discrete(OptionSpec("lookback_put", 50), merton, MARKET, MonteCarlo(10**6, SEED))
    assert p.mean == pytest.approx(MERTON_LBP_N50, rel=1e-10)
    assert p.stderr == pytest.approx(MERTON_LBP_N50_SE, rel=1e-8)
    assert p.monitoring == "discrete(50)" and p.paths == 10**6 and p.seed == SEED


def test_nested_grids_monotone(merton):
    n_list = [8, 16, 32, 64]
    sample = simulate_extrema(OptionSpec("lookback_put", 64), merton, MARKET, MonteCarlo(20000, 5),
                              n_list=n_list)
    prices = [sample.estimate(n)[0] for n in n_list] + [sample.estimate("continuous")[0]]
    assert np.all(np.diff(prices) >= 0)


@pytest.mark.parametrize("name", ["merton", "kou", "brownian"])
def test_continuous_dominates_discrete_pathwise(name):
    sample = simulate_extrema(OptionSpec("lookback_put", 32), catalog.get(name), MARKET,
                              MonteCarlo(5000, 11))
    b = sample.batch
    assert np.all(b.continuous_max >= b.discrete_max[32])


@pytest.mark.parametrize("kind,oracle", [
    ("lookback_put", lambda: bs_lookback_put(100.0, 100.0, 0.05, 0.0, 0.2, 1.0)),
    ("lookback_call", lambda: bs_lookback_call(100.0, 100.0, 0.05, 0.0, 0.2, 1.0)),
])
def test_black_scholes_closed_form(bs, kind, oracle):
    p = price_continuous(OptionSpec(kind, 1), bs, MARKET, MonteCarlo(400_000, SEED))
    assert p.monitoring == "continuous" and p.bias_bound == 0.0
    assert abs(p.mean - oracle()) < 3 * p.stderr


def test_hindsight_call_small_strike_matches_lookback_put(merton):
    mc = MonteCarlo(20000, 7)
    k = 1.0
    put = simulate_extrema(OptionSpec("lookback_put", 20), merton, MARKET, mc)
    call = simulate_extrema(OptionSpec("hindsight_call", 20, strike=k), merton, MARKET, mc)
    disc = math.exp(-MARKET.r * MARKET.T)
    fwd = MARKET.s0 * math.exp(-MARKET.delta * MARKET.T)
    for which in (20, "continuous"):
        assert call.estimate(which)[0] - put.estimate(which)[0] == pytest.approx(fwd - disc * k, rel=1e-12)


def test_minimum_kinds_use_dual(merton):
    mc = MonteCarlo(5000, 9)
    call = simulate_extrema(OptionSpec("lookback_call", 20), merton, MARKET, mc)
    put = simulate_extrema(OptionSpec("lookback_put", 20), dual(merton), MARKET, mc)
    np.testing.assert_array_equal(call.batch.continuous_max, put.batch.continuous_max)
    np.testing.assert_array_equal(call.batch.discrete_max[20], put.batch.discrete_max[20])
    assert 0 < call.estimate(20)[0] < call.estimate("continuous")[0]


def test_price_continuous_infinite_activity_needs_flag():
    vg = catalog.variance_gamma()
    spec = OptionSpec("lookback_put", 4)
    with pytest.raises(UnsupportedClass):
        price_continuous(spec, vg, MARKET, MonteCarlo(100, 1))
    p = price_continuous(spec, vg, MARKET, MonteCarlo(2000, 1, refine_factor=64), allow_fine=True)
    assert p.monitoring == "continuous_fine" and p.bias_bound > 0


def test_worker_count_invariance(merton):
    spec = OptionSpec("hindsight_put", 16, strike=95.0)
    a = price_continuous(spec, merton, MARKET, MonteCarlo(3000, 13, workers=1))
    b = price_continuous(spec, merton, MARKET, MonteCarlo(3000, 13, workers=3))
    assert a == b


# --------------------------------------------------------------------------
# continuity corrections


def test_correction_factor_value():
    spec = OptionSpec("hindsight_call", 100, strike=100.0)
    res = correct_discrete_from_continuous(spec, lambda ext, k: 1.0, MARKET, 0.2, 100)
    assert beta1() * 0.2 * 0.1 == pytest.approx(0.011652, abs=5e-7)
    assert res.value == pytest.approx(math.exp(-beta1() * 0.02), rel=1e-14)
    assert res.value == pytest.approx(0.98842, abs=5e-6)
    assert res.supported is None


@pytest.mark.parametrize("kind,strike", [
    ("lookback_put", None), ("lookback_call", None), ("hindsight_call", 105.0), ("hindsight_put", 95.0),
])
def test_zero_sigma_is_identity(kind, strike):
    spec = OptionSpec(kind, 50, strike=strike, extremum=101.0)
    v = lambda ext, k: 0.3 * ext + (0.0 if k is None else 0.1 * k) + 2.0
    target = v(101.0, strike)
    assert correct_discrete_from_continuous(spec, v, MARKET, 0.0, 50).value == pytest.approx(target, rel=1e-15)
    assert correct_continuous_from_discrete(spec, v, MARKET, 0.0, 50).value == pytest.approx(target, rel=1e-15)


@pytest.mark.parametrize("kind,strike", [
    ("lookback_put", None), ("lookback_call", None), ("hindsight_call", 105.0), ("hindsight_put", 95.0),
])
@pytest.mark.parametrize("n", [4, 50, 1000])
def test_round_trip_identity(kind, strike, n):
    mk = MarketSpec(100.0, 0.05, 0.03, 0.5)
    spec = OptionSpec(kind, n, strike=strike)
    v = lambda ext, k: math.sqrt(ext) + (0.0 if k is None else math.log(k))

    def v_discrete(ext, k):
        return correct_discrete_from_continuous(replace(spec, extremum=ext, strike=k), v, mk, 0.3, n).value

    back = correct_continuous_from_discrete(spec, v_discrete, mk, 0.3, n).value
    assert back == pytest.approx(v(mk.s0, strike), rel=1e-13)


def test_hypotheses():
    put = OptionSpec("lookback_put", 10)
    call = OptionSpec("lookback_call", 10)
    assert correction_hypotheses(put, catalog.merton()) == (True, "")
    assert correction_hypotheses(put, catalog.variance_gamma())[1] == "infinite activity"
    assert correction_hypotheses(put, LevyModel(0.0, 0.0, CompoundPoisson(1.0, DoubleExponential(0.5, 3.0, 3.0))))[1] \
        == "no diffusion component"
    light = LevyModel(0.0, 0.2, CompoundPoisson(1.0, DoubleExponential(0.4, 1.5, 5.0)))
    ok, reason = correction_hypotheses(put, light)
    assert not ok and "q > 2" in reason
    assert correction_hypotheses(call, light) == (True, "")


def test_correction_outside_hypotheses_warns():
    spec = OptionSpec("lookback_put", 10)
    with pytest.warns(HypothesisWarning):
        res = correct_discrete_from_continuous(spec, lambda e, k: 5.0, MARKET, 0.2, 10,
                                               model=catalog.variance_gamma())
    assert res.supported is False and res.reason == "infinite activity"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = correct_discrete_from_continuous(spec, lambda e, k: 5.0, MARKET, 0.2, 10, model=catalog.merton())
    assert res.supported is True and float(res) == res.value


@pytest.mark.parametrize("kind,strike", [("lookback_put", None), ("hindsight_call", 110.0)])
def test_corrections_beat_raw_error_on_common_draws(merton, kind, strike):
    n = 50
    sample = simulate_extrema(OptionSpec(kind, n, strike=strike), merton, MARKET, MonteCarlo(200_000, SEED))
    spec = sample.spec
    vn = sample.estimate(n)[0]
    vc, vc_se = sample.estimate("continuous")
    to_disc = correct_discrete_from_continuous(spec, lambda e, k: sample.estimate("continuous", e, k)[0],
                                               MARKET, merton.sigma, n, model=merton).value
    assert abs(vn - to_disc) < abs(vn - vc)
    to_cont = correct_continuous_from_discrete(spec, lambda e, k: sample.estimate(n, e, k)[0],
                                               MARKET, merton.sigma, n, model=merton).value
    assert abs(to_cont - vc) < abs(vn - vc)
    # remaining error is second order: a small fraction of the raw gap
    assert abs(to_cont - vc) < 3 * vc_se + 0.1 * abs(vn - vc)


# --------------------------------------------------------------------------
# rate bounds


@pytest.mark.parametrize("name,kind,strike,case", [
    ("merton", "lookback_put", None, "inv_sqrt_n"),
    ("vg", "hindsight_put", 100.0, "inv_n"),
    ("vg", "hindsight_call", 100.0, "inv_n"),
    ("spectrally_negative", "lookback_put", None, "inv_n"),
    ("spectrally_negative", "hindsight_call", 100.0, "inv_n"),
    ("brownian", "hindsight_call", 100.0, "log_n_over_sqrt_n"),
    ("brownian", "lookback_call", None, "inv_sqrt_n"),
])
def test_applicable_bound(name, kind, strike, case):
    assert applicable_bound(OptionSpec(kind, 8, strike=strike), catalog.get(name)) == case


def test_rate_bound_check_smoke():
    model = catalog.spectrally_negative()
    rep = rate_bound_check(OptionSpec("lookback_put", 16), model, MARKET, [16, 32, 64, 128],
                           MonteCarlo(4000, 3, refine_factor=16))
    assert rep.case == "inv_n" and rep.n == (16, 32, 64, 128)
    assert len(rep.error) == 4 and all(e >= 0 for e in rep.error)
    assert rep.bias_bound > 0 and rep.constant > 0
    assert rep.passed == (rep.growth_exponent <= rep.eps)
