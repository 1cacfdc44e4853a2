"""Acceptance criteria 1-12.

Each test records a one-line PASS/FAIL verdict (shown in the terminal
summary under "acceptance criteria") and then asserts it. Reference values
come from ``oracles.py``, produced without importing ``levygap``.
"""
import math
from pathlib import Path

import pytest
from scipy import stats

from levygap import catalog
from levygap.asymptotics import beta1, expansion_fv, riemann_zeta_unit_interval
from levygap.cli import run
from levygap.lab import fit_rate, run_correction_study, run_gap_study
from levygap.levy import CompoundPoisson, LevyModel, Normal, Stable, VarianceGamma
from levygap.paths import grid_batch, supremum_batch
from levygap.pricing import MonteCarlo, OptionSpec, rate_bound_check, risk_neutral_drift
from levygap.rng import RngStreamSpec
from levygap.spitzer import continuous_sup_mean, discrete_sup_mean, gap_mean

from oracles import (
    BETA1,
    CP_COEFFICIENT,
    CP_EX1_MC,
    CP_EX1_MC_SE,
    CP_EX1_SERIES,
    STABLE_EX1_CLOSED,
    STABLE_EX1_MC,
    ZETA_THIRD,
)

SEED = 20240611
MARKET = catalog.DEFAULT_MARKET
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_criterion_01_beta1(acceptance):
    b = beta1()
    ok = abs(b - 0.5825971579) <= 1e-9 and abs(b - BETA1) <= 1e-9
    acceptance(1, "beta1", ok, f"{b!r} vs oracle {BETA1!r} (tol 1e-9)")
    assert ok


def test_criterion_02_spitzer_vs_grid_mc(acceptance):
    model = catalog.merton()
    n = 12
    exact = discrete_sup_mean(model, 1.0, n)
    _, dmax = grid_batch(model, 1.0, n, 10**6, RngStreamSpec(SEED))
    mean, se = float(dmax.mean()), float(dmax.std(ddof=1) / math.sqrt(dmax.size))
    ok = abs(mean - exact) < 3 * se
    acceptance(2, "Spitzer sum vs grid MC (Merton, n=12, 1e6 paths)", ok,
               f"spitzer {exact:.6f}, mc {mean:.6f} +- {se:.6f}, |diff|/se = {abs(mean - exact) / se:.2f}")
    assert ok


def test_criterion_03_brownian_supremum(acceptance):
    val = continuous_sup_mean(LevyModel(0.0, 0.2), 1.0)
    target = 0.2 * math.sqrt(2 / math.pi)
    ok = abs(val - target) <= 1e-6
    acceptance(3, "E M_1 for Brownian sigma=0.2", ok, f"{val!r} vs {target!r} (tol 1e-6)")
    assert ok


def test_criterion_04_brownian_leading_term(acceptance):
    n = 4096
    v = math.sqrt(n) * gap_mean(LevyModel(0.0, 0.2), 1.0, n).gap
    target = beta1() * 0.2
    rel = abs(v / target - 1)
    ok = rel <= 0.02
    acceptance(4, "sqrt(n) gap, Brownian, n=4096", ok, f"{v:.6f} vs {target:.6f}, rel err {rel:.4f} (tol 0.02)")
    assert ok


def test_criterion_05_compound_poisson_coefficient(acceptance):
    # the two oracle routes for E X_1^+ must agree before the coefficient is used
    assert abs(CP_EX1_SERIES - CP_EX1_MC) < 3 * CP_EX1_MC_SE
    assert CP_COEFFICIENT == pytest.approx(1 / math.sqrt(2 * math.pi) - CP_EX1_SERIES, abs=1e-15)
    model = LevyModel.from_gamma0(0.0, 0.0, CompoundPoisson(1.0, Normal(0.0, 1.0)))
    n = 2048
    v = 2 * n * gap_mean(model, 1.0, n).gap
    rel = abs(v / CP_COEFFICIENT - 1)
    ok = rel <= 0.05
    acceptance(5, "2n gap, compound Poisson, n=2048", ok,
               f"{v:.6f} vs {CP_COEFFICIENT:.6f}, rel err {rel:.4f} (tol 0.05)")
    assert ok


def test_criterion_06_variance_gamma_expansion(acceptance):
    model = LevyModel.from_gamma0(0.0, 0.0, VarianceGamma(0.0, 0.2, 0.3))
    n = 1024
    pred = expansion_fv(model, 1.0, n).predicted_gap
    gap = gap_mean(model, 1.0, n).gap
    rel = abs(pred / gap - 1)
    slope = fit_rate(run_gap_study(model, 1.0, [2**k for k in range(4, 11)])).slope
    ok = rel <= 0.10 and -1.1 <= slope <= -0.9
    acceptance(6, "symmetric VG expansion and slope", ok,
               f"predicted {pred:.6g} vs gap {gap:.6g} (rel {rel:.4f}, tol 0.10); slope {slope:.4f} in [-1.1, -0.9]")
    assert ok


@pytest.mark.slow
def test_criterion_07_stable_limit(acceptance):
    model = LevyModel(0.0, 0.0, Stable(1.5, 1.0, 0.0))
    n = 2**12
    v = n ** (2 / 3) * gap_mean(model, 1.0, n).gap
    zeta = riemann_zeta_unit_interval(1 / 3)
    assert zeta == pytest.approx(ZETA_THIRD, abs=1e-12)
    target = -zeta * STABLE_EX1_MC
    rel = abs(v / target - 1)
    rel_closed = abs(v / (-zeta * STABLE_EX1_CLOSED) - 1)
    ok = rel <= 0.05
    acceptance(7, "n^(2/3) gap, symmetric 1.5-stable, n=4096", ok,
               f"{v:.6f} vs -zeta(1/3) E X_1^+ = {target:.6f} (MC oracle), rel err {rel:.4f} (tol 0.05); "
               f"against the closed-form E X_1^+ {rel_closed:.4f}")
    assert ok


def test_criterion_08_bridge_sampler_ks(acceptance):
    sigma, t, paths = 0.3, 2.0, 10**5
    batch = supremum_batch(LevyModel(0.0, sigma), t, [1], paths, RngStreamSpec(SEED))
    ks = stats.kstest(batch.continuous_max, stats.halfnorm(scale=sigma * math.sqrt(t)).cdf).statistic
    crit = stats.kstwo(paths).ppf(0.99)
    ok = ks < crit
    acceptance(8, "bridge maxima vs |N(0, sigma^2 t)|", ok, f"KS {ks:.5f} < 1% critical value {crit:.5f}")
    assert ok


def test_criterion_09_weak_limit_mean(acceptance):
    model = catalog.merton()
    n = 2**12
    batch = supremum_batch(model, 1.0, [n], 10**5, RngStreamSpec(SEED))
    z = math.sqrt(n) * (batch.continuous_max - batch.discrete_max[n]) / model.sigma
    mean, se = float(z.mean()), float(z.std(ddof=1) / math.sqrt(z.size))
    ok = abs(mean - BETA1) < 3 * se
    acceptance(9, "mean of sqrt(n)(M - M^n)/sigma, Merton, n=4096, 1e5 paths", ok,
               f"{mean:.5f} +- {se:.5f} vs beta1 {BETA1:.5f}, |diff|/se = {abs(mean - BETA1) / se:.2f}")
    assert ok


@pytest.mark.parametrize("kind,strike", [("lookback_put", None), ("hindsight_call", 110.0)])
def test_criterion_10_correction_efficacy(acceptance, kind, strike):
    model = catalog.merton()
    spec = OptionSpec(kind, 200, strike=strike)
    rows = run_correction_study(spec, model, MARKET, [50, 100, 200], MonteCarlo(10**6, SEED))
    every_n = all(r.corr_err < r.raw_err for r in rows)
    ratio = rows[-1].corr_err / rows[-1].raw_err
    ok = every_n and ratio < 0.4
    detail = ", ".join(f"n={r.n}: corr {r.corr_err:.4f} raw {r.raw_err:.4f}" for r in rows)
    acceptance(10, f"continuity correction, Merton {kind}", ok, f"{detail}; ratio at n=200 {ratio:.3f} < 0.4")
    assert ok


@pytest.mark.parametrize("name,kind,case", [
    ("vg", "lookback_call", "log_n_over_n"),
    ("spectrally_negative", "lookback_put", "inv_n"),
])
def test_criterion_11_rate_bounds(acceptance, name, kind, case):
    model = catalog.get(name)
    if name == "vg":
        model = risk_neutral_drift(model, MARKET)
    rep = rate_bound_check(OptionSpec(kind, 16), model, MARKET, [2**k for k in range(4, 11)],
                           MonteCarlo(20_000, SEED), case=case)
    assert rep.case == case
    acceptance(11, f"|V_n - V| <= C g(n), {name} {kind}, g = {case}", rep.passed,
               f"fitted C = {rep.constant:.4g}, growth exponent of error/g {rep.growth_exponent:+.4f} "
               f"<= eps {rep.eps}")
    assert rep.passed


def test_criterion_12_study_determinism(acceptance, tmp_path, capsys):
    cfg = str(CONFIGS / "merton_lookback_study.ini")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["study", "--config", cfg, "--out", str(a)]) == 0
    assert run(["study", "--config", cfg, "--out", str(b)]) == 0
    capsys.readouterr()
    ok = a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0
    acceptance(12, "study CSV determinism", ok, f"two runs, {len(a.read_bytes())} bytes, identical: {ok}")
    assert ok
