"""Lookback and hindsight options under exponential Lévy models.

The asset is ``S_u = S_t exp(X_{u-t})`` for u >= t, where t is the current
fixing date ``k_index * T/n`` and ``S_t = market.s0``. Payoffs, with
``S_+``/``S_-`` the running maximum/minimum merged with the predetermined
extremum:

============== ===================
lookback_put   S_+ - S_T
lookback_call  S_T - S_-
hindsight_call (S_+ - K)^+
hindsight_put  (K - S_-)^+
============== ===================

Minima are simulated as maxima of the dual process -X. Continuous
monitoring is exact for finite-activity models (bridge sampling); other
models go through a flagged fine-grid estimator carrying a bias bound.

The continuity corrections shift the extremum (and the strike) by
``exp(+-beta1 sigma sqrt(T/n))``; see :func:`correct_discrete_from_continuous`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .asymptotics import beta1, classify_rate
from .errors import DomainError, HypothesisWarning, MomentFailure, UnsupportedClass
from .levy import LevyModel, check_exp_moment, check_integrability, dual
from .paths import SupremumBatch, supremum_batch
from .rng import RngStreamSpec

KINDS = ("lookback_put", "lookback_call", "hindsight_call", "hindsight_put")
MAX_KINDS = ("lookback_put", "hindsight_call")


@dataclass(frozen=True)
class MarketSpec:
    s0: float
    r: float
    delta: float
    T: float

    def __post_init__(self):
        if not (self.s0 > 0 and self.T > 0):
            raise DomainError("s0 and T must be positive")


@dataclass(frozen=True)
class OptionSpec:
    kind: str
    n: int
    strike: Optional[float] = None
    extremum: Optional[float] = None
    k_index: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown option kind {self.kind!r}")
        if self.kind.startswith("lookback") and self.strike is not None:
            raise DomainError("lookback options carry no strike")
        if self.kind.startswith("hindsight") and not (self.strike and self.strike > 0):
            raise DomainError("hindsight options need a positive strike")
        if self.n < 1 or not 0 <= self.k_index <= self.n:
            raise DomainError("need n >= 1 and 0 <= k_index <= n")
        if self.extremum is not None and self.extremum <= 0:
            raise DomainError("extremum must be positive")

    @property
    def uses_max(self):
        return self.kind in MAX_KINDS


@dataclass(frozen=True)
class MonteCarlo:
    paths: int
    seed: int
    workers: int = 1
    refine_factor: int = 16

    def __post_init__(self):
        if self.paths < 2:
            raise ValueError("need at least two paths")


@dataclass(frozen=True)
class PriceEstimate:
    mean: float
    stderr: float
    paths: int
    seed: int
    monitoring: str
    bias_bound: float = 0.0


def payoff(spec: OptionSpec, terminal_S, running_extremum_S):
    """Payoff given the terminal price and the (already merged) running extremum."""
    s_t = np.asarray(terminal_S, dtype=float)
    ext = np.asarray(running_extremum_S, dtype=float)
    if spec.kind == "lookback_put":
        out = ext - s_t
    elif spec.kind == "lookback_call":
        out = s_t - ext
    elif spec.kind == "hindsight_call":
        out = np.maximum(ext - spec.strike, 0.0)
    else:
        out = np.maximum(spec.strike - ext, 0.0)
    return out if out.ndim else float(out)


def risk_neutral_drift(model: LevyModel, market: MarketSpec) -> LevyModel:
    """Shift gamma so that log E e^{X_1} = r - delta."""
    if not check_exp_moment(model, 1.0):
        raise MomentFailure("E e^{X_1} is infinite")
    lap = model.laplace_exponent(1.0)
    if not math.isfinite(lap):
        raise MomentFailure("E e^{X_1} is infinite")
    return model.with_gamma(model.gamma + (market.r - market.delta) - lap)


def _horizon(spec, market):
    dt = market.T / spec.n
    return spec.n - spec.k_index, (spec.n - spec.k_index) * dt


def _extremum(spec, market):
    return market.s0 if spec.extremum is None else spec.extremum


@dataclass
class ExtremaSample:
    """Log-extrema of the remaining path, oriented so that ``max`` is used.

    For minimum-based kinds the stored values are maxima of the dual
    process, i.e. ``-log`` of the running minimum ratio.
    """

    batch: SupremumBatch
    spec: OptionSpec
    market: MarketSpec
    tau: float
    steps: int
    mc: MonteCarlo

    def _values(self, which):
        b = self.batch
        sup = b.continuous_max if which == "continuous" else b.discrete_max[which]
        return b.terminal, sup

    def estimate(self, which, extremum=None, strike=None, kind=None):
        """Price from the stored draws; ``which`` is a grid size n' or "continuous".

        ``extremum``/``strike`` override the option's values, which is how
        shifted arguments for the corrections are evaluated on the same draws.
        """
        spec = self.spec if kind is None else replace(self.spec, kind=kind)
        mk = self.market
        ext = _extremum(spec, mk) if extremum is None else extremum
        k = spec.strike if strike is None else strike
        disc = math.exp(-mk.r * self.tau)
        fwd = mk.s0 * math.exp(-mk.delta * self.tau)
        if self.steps == 0:
            vals = np.full(2, _deterministic(spec, mk, ext, k))
        else:
            x_t, sup = self._values(which)
            if spec.uses_max:
                merged = np.maximum(ext, mk.s0 * np.exp(sup))
                if spec.kind == "lookback_put":
                    vals = disc * merged - fwd
                else:
                    vals = disc * np.maximum(merged - k, 0.0)
            else:
                merged = np.minimum(ext, mk.s0 * np.exp(-sup))
                if spec.kind == "lookback_call":
                    vals = fwd - disc * merged
                else:
                    vals = disc * np.maximum(k - merged, 0.0)
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))

    def price(self, which):
        mean, se = self.estimate(which)
        bias = 0.0
        if which == "continuous" and self.batch.exactness != "exact":
            # bias of exp(M_fine) against exp(M) is at most S e^{M} * (E M - E M_fine)
            sup = self.batch.continuous_max
            level = self.market.s0 * np.exp(sup if self.spec.uses_max else -sup)
            bias = math.exp(-self.market.r * self.tau) * float(level.mean()) * self.batch.bias_bound
        mon = "continuous" if which == "continuous" else f"discrete({which})"
        if which == "continuous" and self.batch.exactness != "exact":
            mon = "continuous_fine"
        return PriceEstimate(mean, se, self.batch.paths, self.mc.seed, mon, bias)


def _deterministic(spec, market, ext, k):
    s = market.s0
    if spec.kind == "lookback_put":
        return max(ext, s) - s
    if spec.kind == "lookback_call":
        return s - min(ext, s)
    if spec.kind == "hindsight_call":
        return max(max(ext, s) - k, 0.0)
    return max(k - min(ext, s), 0.0)


def simulate_extrema(spec: OptionSpec, model: LevyModel, market: MarketSpec, mc: MonteCarlo,
                     n_list=None, fine: bool = False) -> ExtremaSample:
    """Draw the remaining path once; every grid in ``n_list`` is nested in it.

    ``n_list`` counts monitoring dates over the whole life [0, T]; entries
    must be multiples of ``spec.n / gcd`` so that the remaining horizon is
    an integer number of steps. By default only ``spec.n`` is used.
    """
    n_list = [spec.n] if n_list is None else list(n_list)
    steps, tau = _horizon(spec, market)
    sim_model = model if spec.uses_max else dual(model)
    stream = RngStreamSpec(mc.seed)
    if steps == 0:
        empty = np.zeros(2)
        batch = SupremumBatch(empty, {n: empty for n in n_list}, empty, "exact")
        return ExtremaSample(batch, spec, market, tau, 0, mc)
    remaining = {}
    for n in n_list:
        rem = n * (spec.n - spec.k_index)
        if rem % spec.n:
            raise ValueError("grid sizes must give a whole number of remaining steps")
        remaining[n] = rem // spec.n
    batch = supremum_batch(sim_model, tau, sorted(remaining.values()), mc.paths, stream,
                           refine_factor=mc.refine_factor, workers=mc.workers, force_fine=fine)
    # re-key grid maxima by the whole-life monitoring count
    batch.discrete_max = {n: batch.discrete_max[remaining[n]] for n in n_list}
    return ExtremaSample(batch, spec, market, tau, steps, mc)


def price_discrete(spec, model, market, mc) -> PriceEstimate:
    return simulate_extrema(spec, model, market, mc).price(spec.n)


def price_continuous(spec, model, market, mc, allow_fine: bool = False) -> PriceEstimate:
    if not model.finite_activity and not allow_fine:
        raise UnsupportedClass("exact continuous monitoring needs finite activity; "
                               "pass allow_fine=True for the fine-grid estimator")
    return simulate_extrema(spec, model, market, mc).price("continuous")


# --------------------------------------------------------------------------
# continuity corrections


@dataclass(frozen=True)
class CorrectionResult:
    value: float
    supported: Optional[bool]
    reason: str = ""

    def __float__(self):
        return self.value


def correction_hypotheses(spec: OptionSpec, model: LevyModel):
    """(ok, reason). Max-based kinds need E e^{qM} finite for some q > 2 on top
    of finite activity, diffusion and integrability."""
    if not model.finite_activity:
        return False, "infinite activity"
    if model.sigma <= 0:
        return False, "no diffusion component"
    if not check_integrability(model).integrable:
        return False, "not integrable"
    if spec.uses_max and not check_exp_moment(model, 2.0 * (1 + 1e-9)):
        return False, "E exp(q M_T) infinite for every q > 2"
    return True, ""


def _checked(spec, model, value):
    if model is None:
        return CorrectionResult(value, None, "hypotheses not checked")
    ok, reason = correction_hypotheses(spec, model)
    if not ok:
        warnings.warn(f"continuity correction outside its hypotheses: {reason}", HypothesisWarning,
                      stacklevel=3)
    return CorrectionResult(value, ok, reason)


def _shift(spec, market, sigma, n):
    return beta1() * sigma * math.sqrt(market.T / n)


def correct_discrete_from_continuous(spec: OptionSpec, v_continuous_fn: Callable, market: MarketSpec,
                                     sigma: float, n: int, model: Optional[LevyModel] = None):
    """Approximate V_n from the continuous price function ``v_continuous_fn(extremum, strike)``."""
    b = _shift(spec, market, sigma, n)
    ext = _extremum(spec, market)
    _, tau = _horizon(spec, market)
    fwd = market.s0 * math.exp(-market.delta * tau)
    k = spec.strike
    if spec.kind == "lookback_put":
        val = math.exp(-b) * v_continuous_fn(ext * math.exp(b), None) + math.expm1(-b) * fwd
    elif spec.kind == "lookback_call":
        val = math.exp(b) * v_continuous_fn(ext * math.exp(-b), None) - math.expm1(b) * fwd
    elif spec.kind == "hindsight_call":
        val = math.exp(-b) * v_continuous_fn(ext * math.exp(b), k * math.exp(b))
    else:
        val = math.exp(b) * v_continuous_fn(ext * math.exp(-b), k * math.exp(-b))
    return _checked(spec, model, val)


def correct_continuous_from_discrete(spec: OptionSpec, v_discrete_fn: Callable, market: MarketSpec,
                                     sigma: float, n: int, model: Optional[LevyModel] = None):
    """Approximate V from the discrete price function ``v_discrete_fn(extremum, strike)``."""
    b = _shift(spec, market, sigma, n)
    ext = _extremum(spec, market)
    _, tau = _horizon(spec, market)
    fwd = market.s0 * math.exp(-market.delta * tau)
    k = spec.strike
    if spec.kind == "lookback_put":
        val = math.exp(b) * v_discrete_fn(ext * math.exp(-b), None) + math.expm1(b) * fwd
    elif spec.kind == "lookback_call":
        val = math.exp(-b) * v_discrete_fn(ext * math.exp(b), None) - math.expm1(-b) * fwd
    elif spec.kind == "hindsight_call":
        val = math.exp(b) * v_discrete_fn(ext * math.exp(-b), k * math.exp(-b))
    else:
        val = math.exp(-b) * v_discrete_fn(ext * math.exp(b), k * math.exp(b))
    return _checked(spec, model, val)


# --------------------------------------------------------------------------
# rate bounds for discrete prices


@dataclass(frozen=True)
class RateBoundReport:
    case: str
    n: tuple
    error: tuple
    error_se: tuple
    bias_bound: float
    constant: float
    growth_exponent: float
    eps: float
    passed: bool


_SHAPES = {
    "inv_n": lambda n: 1.0 / n,
    "log_n_over_n": lambda n: np.log(n) / n,
    "inv_sqrt_n": lambda n: 1.0 / np.sqrt(n),
    "log_n_over_sqrt_n": lambda n: np.log(n) / np.sqrt(n),
}


def applicable_bound(spec: OptionSpec, model: LevyModel):
    """Bound shape for |V_n - V| implied by the model class and option side."""
    mc_ = model.model_class
    if spec.uses_max and not mc_.positive_jumps:
        return "inv_n" if model.sigma == 0 else "log_n_over_sqrt_n"
    if not spec.uses_max and model.sigma == 0 and not model.finite_activity:
        if model.finite_variation:
            pred = classify_rate(dual(model))
            return "inv_n" if pred.order == "inv_n" else "log_n_over_n"
        return "inv_sqrt_n"
    if model.sigma > 0:
        return "inv_sqrt_n"
    return "inv_n"


def rate_bound_check(spec: OptionSpec, model: LevyModel, market: MarketSpec, n_list, mc: MonteCarlo,
                     case: Optional[str] = None, eps: float = 0.05) -> RateBoundReport:
    """Check |V_n - V| <= C g(n) along ``n_list``.

    V comes from the same draws (exact bridge or fine grid). The inequality
    holds for some C on any finite range, so the test is on its shape: the
    least-squares slope of log(|V_n - V| / g(n)) against log n must not
    exceed ``eps`` (the ratio is not growing). ``constant`` is the smallest
    C that fits every point.
    """
    n_list = sorted(int(n) for n in n_list)
    case = case or applicable_bound(spec, model)
    g = _SHAPES[case]
    spec_top = replace(spec, n=n_list[-1], k_index=0)
    sample = simulate_extrema(spec_top, model, market, mc, n_list=n_list,
                              fine=not model.finite_activity)
    steps, tau = _horizon(spec_top, market)
    cont = sample.price("continuous")
    errs, ses = [], []
    disc = math.exp(-market.r * tau)
    for n in n_list:
        # common draws: error and its standard error from the pathwise difference
        x_t, sup_n = sample._values(n)
        sup = sample.batch.continuous_max
        ext = _extremum(spec_top, market)
        if spec.uses_max:
            a = np.maximum(ext, market.s0 * np.exp(sup))
            b_ = np.maximum(ext, market.s0 * np.exp(sup_n))
        else:
            a = np.minimum(ext, market.s0 * np.exp(-sup))
            b_ = np.minimum(ext, market.s0 * np.exp(-sup_n))
        if spec.kind.startswith("hindsight"):
            k = spec.strike
            pa = np.maximum(a - k, 0) if spec.uses_max else np.maximum(k - a, 0)
            pb = np.maximum(b_ - k, 0) if spec.uses_max else np.maximum(k - b_, 0)
            d = disc * (pa - pb)
        else:
            d = disc * (a - b_) * (1 if spec.uses_max else -1)
        errs.append(abs(float(d.mean())))
        ses.append(float(d.std(ddof=1) / math.sqrt(d.size)))
    n_arr = np.array(n_list, dtype=float)
    y = np.array(errs)
    ratio = y / g(n_arr)
    if np.any(ratio <= 0):
        slope = -math.inf
    else:
        slope = float(np.polyfit(np.log(n_arr), np.log(ratio), 1)[0])
    const = float(np.max((y + 3 * np.array(ses) + cont.bias_bound) / g(n_arr)))
    return RateBoundReport(case=case, n=tuple(n_list), error=tuple(errs), error_se=tuple(ses),
                           bias_bound=cont.bias_bound, constant=const, growth_exponent=slope,
                           eps=eps, passed=bool(slope <= eps))
