import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from levygap import catalog
from levygap.errors import NotIntegrable, UnsupportedClass
from levygap.levy import (
    CompoundPoisson,
    DoubleExponential,
    LevyModel,
    Normal,
    PointMass,
    Stable,
    VarianceGamma,
)
from levygap.paths import grid_batch, supremum_batch
from levygap.rng import RngStreamSpec
from levygap.spitzer import (
    FINE,
    QuadSpec,
    continuous_sup_mean,
    default_method,
    discrete_sup_mean,
    expected_positive_part,
    gap_curve,
    gap_mean,
    positive_part_gaussian,
    positive_part_with_error,
    sup_mean_bound,
)

MERTON = LevyModel(0.01, 0.2, CompoundPoisson(3.0, Normal(-0.05, 0.1)))
KOU = LevyModel(0.01, 0.2, CompoundPoisson(1.0, DoubleExponential(0.4, 10.0, 5.0)))
CP = LevyModel.from_gamma0(0.0, 0.0, CompoundPoisson(1.0, Normal(0.0, 1.0)))
VG = LevyModel.from_gamma0(0.0, 0.0, VarianceGamma(0.0, 0.2, 0.3))


def catalog_models():
    names = list(catalog.REFERENCE) + list(catalog.EXTRA)
    return {name: catalog.get(name) for name in names}


CATALOG = catalog_models()


def test_positive_part_gaussian_limits():
    assert positive_part_gaussian(0.3, 0.0) == pytest.approx(0.3)
    assert positive_part_gaussian(-0.3, 0.0) == 0.0
    assert positive_part_gaussian(0.0, 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi))


@given(st.floats(-3, 3), st.floats(0.01, 3))
@settings(max_examples=60, deadline=None)
def test_positive_part_gaussian_put_call_parity(m, sd):
    # E X^+ - E X^- = E X
    assert positive_part_gaussian(m, sd) - positive_part_gaussian(-m, sd) == pytest.approx(m, abs=1e-12)


def test_brownian_unit():
    assert expected_positive_part(LevyModel(0.0, 1.0), 1.0) == pytest.approx(0.3989422804014327, abs=1e-15)


@pytest.mark.parametrize("s", [0.01, 0.3, 1.0, 4.0])
def test_brownian_routes_agree(s):
    m = LevyModel(0.0, 1.0)
    closed = expected_positive_part(m, s, method="closed")
    fourier = expected_positive_part(m, s, method="fourier")
    assert closed == pytest.approx(math.sqrt(s / (2 * math.pi)), rel=1e-14)
    assert fourier == pytest.approx(closed, abs=1e-8)


def test_compound_poisson_series_oracle():
    assert expected_positive_part(CP, 1.0) == pytest.approx(oracles.CP_EX1_SERIES, rel=1e-12)
    assert abs(expected_positive_part(CP, 1.0) - oracles.CP_EX1_MC) < 3 * oracles.CP_EX1_MC_SE


@pytest.mark.parametrize("model", [MERTON, KOU], ids=["merton", "kou"])
@pytest.mark.parametrize("s", [0.01, 0.1, 1.0])
def test_series_and_fourier_agree(model, s):
    v1, e1, _ = positive_part_with_error(model, s, FINE, "series")
    v2, e2, _ = positive_part_with_error(model, s, FINE, "fourier")
    assert abs(v1 - v2) <= max(e1 + e2, 1e-11)


@pytest.mark.parametrize("s", [0.05, 1.0, 3.0])
def test_point_mass_series_against_direct_sum(s):
    from scipy import stats

    m = LevyModel.from_gamma0(-0.4, 0.3, CompoundPoisson(2.0, PointMass(0.5)))
    k = np.arange(80)
    w = stats.poisson.pmf(k, 2.0 * s)
    expected = sum(wi * positive_part_gaussian(-0.4 * s + 0.5 * ki, 0.3 * math.sqrt(s)) for ki, wi in zip(k, w))
    assert expected_positive_part(m, s) == pytest.approx(expected, abs=1e-13)


# the VG characteristic function decays like |u|^(-2s/nu), so Fourier needs s not too small
@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_vg_subordination_against_fourier(s):
    m = LevyModel(0.03, 0.0, VarianceGamma(0.1, 0.2, 0.3))
    a = expected_positive_part(m, s, method="subordination")
    b = expected_positive_part(m, s, method="fourier")
    assert a == pytest.approx(b, abs=1e-10)


def test_vg_symmetric_closed_form_against_quadrature():
    m = LevyModel(0.0, 0.0, VarianceGamma(0.0, 0.2, 0.3))
    assert expected_positive_part(m, 1.0) == pytest.approx(oracles.VG_EX1, rel=1e-12)
    assert expected_positive_part(m, 1.0, method="fourier") == pytest.approx(oracles.VG_EX1, abs=1e-10)


def test_one_sided_gamma_against_gamma_law():
    # X_s = gamma0 s + theta G_s with G_s ~ Gamma(s/nu, nu): integrate against scipy's gamma law
    from scipy import integrate, stats

    m = catalog.spectrally_negative()
    j = m.jumps
    for s in (0.01, 0.1, 1.0):
        law = stats.gamma(s / j.vg_nu, scale=j.vg_nu)
        c = m.gamma0 * s
        edge = c / -j.theta
        expected = integrate.quad(lambda g: (c + j.theta * g) * law.pdf(g), 0, edge, epsabs=1e-14, limit=200)[0]
        assert expected_positive_part(m, s) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("s", [0.1, 1.0, 2.0])
def test_stable_scaling_against_fourier(s):
    m = LevyModel(0.1, 0.0, Stable(1.5, 1.0, 0.3))
    assert expected_positive_part(m, s, method="scaling") == pytest.approx(
        expected_positive_part(m, s, method="fourier"), abs=1e-9)


def test_stable_symmetric_closed_form():
    m = LevyModel(0.0, 0.0, Stable(1.5, 1.0, 0.0))
    assert expected_positive_part(m, 1.0) == pytest.approx(oracles.STABLE_EX1_CLOSED, rel=1e-10)


def test_default_routes():
    assert default_method(LevyModel(0, 1)) == "closed"
    assert default_method(MERTON) == "series"
    assert default_method(KOU) == "fourier"
    assert default_method(VG) == "subordination"
    assert default_method(LevyModel(0, 0, Stable(1.5, 1, 0))) == "scaling"


def test_fourier_refused_without_smoothing():
    with pytest.raises(UnsupportedClass):
        expected_positive_part(CP, 1.0, method="fourier")


def test_wrong_route_for_class():
    with pytest.raises(UnsupportedClass):
        expected_positive_part(VG, 1.0, method="series")
    with pytest.raises(ValueError):
        expected_positive_part(VG, 1.0, method="simpson")
    with pytest.raises(ValueError):
        expected_positive_part(VG, 0.0)


def test_quadspec_validation():
    with pytest.raises(ValueError):
        QuadSpec(abs_tol=0.0)


# --------------------------------------------------------------------------
# Spitzer sums


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_single_term_sum(name):
    m = CATALOG[name]
    assert discrete_sup_mean(m, 0.7, 1) == pytest.approx(expected_positive_part(m, 0.7), rel=1e-15)


def test_brownian_two_point_grid():
    assert discrete_sup_mean(LevyModel(0.0, 1.0), 1.0, 2) == pytest.approx(oracles.BM_N2_DISCRETE, rel=1e-14)
    assert abs(oracles.BM_N2_DISCRETE - oracles.BM_N2_MC) < 3 * oracles.BM_N2_MC_SE


def test_brownian_continuous_closed_form():
    assert continuous_sup_mean(LevyModel(0.0, 0.2), 1.0) == pytest.approx(0.2 * math.sqrt(2 / math.pi), abs=1e-12)


def test_brownian_with_drift_continuous_by_reflection():
    # E M_t for BM with drift mu: integral of the known tail of the supremum
    from scipy import integrate, stats

    mu, sig, t = 0.3, 0.5, 2.0
    sd = sig * math.sqrt(t)

    def tail(x):
        b = (-x - mu * t) / sd
        return stats.norm.cdf((-x + mu * t) / sd) + math.exp(2 * mu * x / sig**2 + stats.norm.logcdf(b))

    expected = integrate.quad(tail, 0, 30, epsabs=1e-13, limit=200)[0]
    assert continuous_sup_mean(LevyModel(mu, sig), t) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_grid_nesting(name):
    m = CATALOG[name]
    vals = [discrete_sup_mean(m, 1.0, n) for n in (1, 2, 4, 8)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert continuous_sup_mean(m, 1.0) >= vals[-1] - 1e-12


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_gap_curve_nonnegative_and_decreasing(name):
    curve = gap_curve(CATALOG[name], 1.0, [4, 8, 16, 32])
    for g in curve:
        assert g.gap >= -g.error_budget
    for a, b in zip(curve, curve[1:]):
        assert b.gap <= a.gap + a.error_budget + b.error_budget


def test_gap_curve_matches_gap_mean():
    curve = gap_curve(MERTON, 1.0, [8, 32])
    for g in curve:
        assert g.gap == pytest.approx(gap_mean(MERTON, 1.0, g.n).gap, abs=1e-12)


def test_gap_curve_requires_nesting():
    with pytest.raises(ValueError):
        gap_curve(MERTON, 1.0, [3, 8])


@pytest.mark.parametrize("n", [1, 2, 17, 256])
def test_deterministic_decreasing_gap_is_zero(n):
    g = gap_mean(LevyModel(-1.0), 1.0, n)
    assert g.gap == 0.0


def test_brownian_gap_leading_term():
    g = gap_mean(LevyModel(0.0, 0.2), 1.0, 4096)
    assert 0.114 <= math.sqrt(4096) * g.gap <= 0.119


def test_sup_mean_bound_brownian_tight():
    m = LevyModel(0.0, 1.0)
    assert sup_mean_bound(m, 1.0) == pytest.approx(math.sqrt(2 / math.pi))
    assert continuous_sup_mean(m, 1.0) == pytest.approx(sup_mean_bound(m, 1.0), rel=1e-14)


def test_sup_mean_bound_point_mass():
    m = LevyModel.from_gamma0(0.0, 0.0, CompoundPoisson(1.0, PointMass(1.0)))
    assert sup_mean_bound(m, 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("name", sorted(CATALOG))
@pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
def test_sup_mean_bound_dominates(name, t):
    m = CATALOG[name]
    assert continuous_sup_mean(m, t) <= sup_mean_bound(m, t) + 1e-9


def test_not_integrable_raises(monkeypatch):
    import levygap.spitzer as sp
    from levygap.levy import IntegrabilityReport

    monkeypatch.setattr(sp, "check_integrability",
                        lambda m: IntegrabilityReport(m.model_class, False, False))
    with pytest.raises(NotIntegrable):
        expected_positive_part(MERTON, 1.0)


# --------------------------------------------------------------------------
# Spitzer sum against simulation


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_discrete_sup_mean_against_grid_simulation(name):
    m = CATALOG[name]
    paths = 200_000
    _, dmax = grid_batch(m, 1.0, 12, paths, RngStreamSpec(11), workers=4)
    se = dmax.std(ddof=1) / math.sqrt(paths)
    assert abs(dmax.mean() - discrete_sup_mean(m, 1.0, 12)) < 3 * se


@pytest.mark.slow
def test_vg_continuous_sup_mean_against_fine_grid():
    from levygap.paths import fine_grid_bias_bound

    n_fine = 2**12
    paths = 20_000
    stream = RngStreamSpec(5)
    _, dmax = grid_batch(VG, 1.0, n_fine, paths, stream, workers=4)
    se = dmax.std(ddof=1) / math.sqrt(paths)
    bias = fine_grid_bias_bound(VG, 1.0, n_fine, 1)
    exact = continuous_sup_mean(VG, 1.0)
    assert dmax.mean() - 3 * se <= exact <= dmax.mean() + 3 * se + bias


@pytest.mark.slow
def test_gap_against_exact_bridge_simulation():
    m = catalog.merton()
    b = supremum_batch(m, 1.0, [16], 200_000, RngStreamSpec(3), workers=4)
    d = b.continuous_max - b.discrete_max[16]
    se = d.std(ddof=1) / math.sqrt(d.size)
    assert abs(d.mean() - gap_mean(m, 1.0, 16).gap) < 3 * se
