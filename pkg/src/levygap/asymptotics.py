"""Asymptotic predictions for the monitoring gap E(M_t - M_t^n).

Summary of the regimes handled here:

* diffusion present (sigma > 0): gap ~ beta1 sigma sqrt(t/n), with
  ``beta1 = -zeta(1/2)/sqrt(2 pi)``; finite activity adds an explicit
  1/(2n) term;
* finite activity without diffusion: gap ~ (gamma0^+ t + lambda t E Y^+
  - E X_t^+) / (2n);
* infinite activity, finite variation, no diffusion: same 1/(2n) form with
  ``lambda E Y^+`` replaced by ``int x^+ nu(dx)`` when
  ``int_{|x|<=1} |x log|x|| nu(dx)`` is finite, else O(log n / n);
* infinite variation without diffusion: o(1/sqrt n); for a strictly
  alpha-stable process gap ~ -t^{1/alpha} zeta(1 - 1/alpha) E X_1^+ n^{-1/alpha}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special, stats

from .errors import DomainError, NotIntegrable, UnsupportedClass
from .levy import (
    LevyModel,
    NoJumps,
    Normal,
    PointMass,
    Stable,
    check_integrability,
    xlogx_integrable,
)
from .spitzer import expected_positive_part

_SQRT2PI = math.sqrt(2 * math.pi)


# --------------------------------------------------------------------------
# zeta on (0, 1)


@lru_cache(maxsize=8)
def _borwein_coefficients(depth):
    # d_k = n sum_{i=0}^k (n+i-1)! 4^i / ((n-i)! (2i)!), exact rationals
    n = depth
    d = []
    acc = Fraction(0)
    for i in range(n + 1):
        acc += Fraction(math.factorial(n + i - 1) * 4**i, math.factorial(n - i) * math.factorial(2 * i))
        d.append(n * acc)
    return tuple(d)


def _eta(s, depth):
    d = _borwein_coefficients(depth)
    dn = d[-1]
    terms = [(-1) ** k * float((d[k] - dn) / dn) / (k + 1) ** s for k in range(depth)]
    return -math.fsum(terms)


def riemann_zeta_unit_interval(s: float, depth: int = 40) -> float:
    """zeta(s) for 0 < s < 1 from the alternating (eta) series.

    Uses Borwein's acceleration of ``eta(s) = sum (-1)^{k-1} k^{-s}``, whose
    error is below ``3 (3 + sqrt 8)^{-depth}`` relative to eta, and
    ``zeta(s) = eta(s) / (1 - 2^{1-s})``.
    """
    if not 0.0 < s < 1.0:
        raise DomainError("s must lie in (0, 1)")
    return _eta(s, depth) / (1.0 - 2.0 ** (1.0 - s))


def beta1() -> float:
    """-zeta(1/2)/sqrt(2 pi), the mean of the normalised limit of sqrt(n)(M - M^n)."""
    return -riemann_zeta_unit_interval(0.5) / _SQRT2PI


@dataclass(frozen=True)
class CorrectionConstants:
    beta1: float
    zeta_half: float


def correction_constants() -> CorrectionConstants:
    z = riemann_zeta_unit_interval(0.5)
    return CorrectionConstants(beta1=-z / _SQRT2PI, zeta_half=z)


# --------------------------------------------------------------------------
# rate classes


ORDERS = ("inv_sqrt_n", "small_o_inv_sqrt_n", "log_n_over_n", "inv_n")


@dataclass(frozen=True)
class RatePrediction:
    """Predicted decay of the gap.

    ``leading_coefficient`` is ``c`` in ``gap ~ c n^{-exponent}`` for
    ``inv_sqrt_n`` and stable cases, and the numerator ``c`` in
    ``gap ~ c / (2n)`` for ``inv_n``.
    """

    order: str
    leading_coefficient: Optional[float]
    source: str
    exponent: Optional[float] = None

    def predicted_gap(self, n):
        if self.leading_coefficient is None:
            return None
        if self.order == "inv_n":
            return self.leading_coefficient / (2 * n)
        return self.leading_coefficient * n ** (-self.exponent)

    def bound_shape(self, n):
        """Rate function g(n) such that the gap is O(g(n)) (o(.) for the small-o class)."""
        n = np.asarray(n, dtype=float)
        if self.order == "inv_sqrt_n":
            return 1 / np.sqrt(n)
        if self.order == "inv_n":
            return 1 / n
        if self.order == "log_n_over_n":
            return np.log(n) / n
        if self.exponent is not None:
            return n ** (-self.exponent)
        return 1 / np.sqrt(n)


def _strictly_stable(model):
    return isinstance(model.jumps, Stable) and model.sigma == 0 and model.mean == 0


def classify_rate(model: LevyModel, t: float = 1.0) -> RatePrediction:
    if not check_integrability(model).integrable:
        raise NotIntegrable("rate classes need an integrable model")
    if model.sigma > 0:
        if model.finite_activity:
            return RatePrediction("inv_sqrt_n", beta1() * model.sigma * math.sqrt(t),
                                  "finite_activity_diffusion", 0.5)
        return RatePrediction("inv_sqrt_n", None, "diffusion", 0.5)
    if model.finite_activity:
        return RatePrediction("inv_n", _fv_numerator(model, t), "finite_activity_pure_jump", 1.0)
    if model.finite_variation:
        if xlogx_integrable(model):
            return RatePrediction("inv_n", _fv_numerator(model, t), "finite_variation_xlogx", 1.0)
        return RatePrediction("log_n_over_n", None, "finite_variation", 1.0)
    if _strictly_stable(model):
        a = model.jumps.alpha
        ex1 = expected_positive_part(model, 1.0)
        return RatePrediction("small_o_inv_sqrt_n", stable_limit(a, t, ex1), "stable_scaling", 1 / a)
    return RatePrediction("small_o_inv_sqrt_n", None, "infinite_variation")


# --------------------------------------------------------------------------
# expansions


@dataclass(frozen=True)
class ExpansionTerm:
    label: str
    value: float
    error: float = 0.0


@dataclass(frozen=True)
class ExpansionResult:
    n: int
    predicted_gap: float
    terms: tuple

    def term(self, label):
        for tm in self.terms:
            if tm.label == label:
                return tm.value
        raise KeyError(label)


def _fv_numerator(model, t):
    """(gamma0^+ + int x^+ nu) t - E X_t^+."""
    ext = expected_positive_part(model, t)
    return (max(model.gamma0, 0.0) + model.jumps.positive_jump_mean()) * t - ext


def _gauss_pieces(m, v, tau):
    """E phi(W/tau) and E W Phi(W/tau) for W ~ N(m, v), vectorised."""
    r = np.sqrt(tau * tau + v)
    e_phi = tau / r * np.exp(-0.5 * (m / r) ** 2) / _SQRT2PI
    e_wphi = m * special.ndtr(m / r) + v * e_phi / tau
    return e_phi, e_wphi


def _jump_expectations(model, t, mc_budget, seed):
    """E phi(Z) and E (gamma0 t + sum Y) Phi(Z), Z = (gamma0 t + sum Y)/(sigma sqrt t)."""
    tau = model.sigma * math.sqrt(t)
    c = model.gamma0 * t
    j = model.jumps
    if isinstance(j, NoJumps):
        e_phi, e_w = _gauss_pieces(np.array(c), np.array(0.0), tau)
        return float(e_phi), float(e_w), 0.0, 0.0
    lam = j.rate * t
    law = j.law
    if isinstance(law, (Normal, PointMass)):
        k = np.arange(int(lam + 12 * math.sqrt(lam) + 40))
        w = stats.poisson.pmf(k, lam)
        if isinstance(law, Normal):
            m, v = c + k * law.mu, k * law.sd**2
        else:
            m, v = c + k * law.value, np.zeros(k.shape)
        e_phi, e_w = _gauss_pieces(m, v, tau)
        return float(w @ e_phi), float(w @ e_w), 0.0, 0.0
    # no closed form for the double-exponential k-fold sums here: Monte Carlo
    rng = np.random.default_rng(seed)
    counts = rng.poisson(lam, mc_budget)
    total = np.zeros(mc_budget)
    idx = np.repeat(np.arange(mc_budget), counts)
    np.add.at(total, idx, law.quantile(rng.random(idx.size)))
    z = (c + total) / tau
    a = np.exp(-0.5 * z * z) / _SQRT2PI
    b = (c + total) * special.ndtr(z)
    se = lambda x: float(x.std(ddof=1) / math.sqrt(mc_budget))
    return float(a.mean()), float(b.mean()), se(a), se(b)


def expansion_fa_sigma_pos(model: LevyModel, t: float, n: int, mc_budget: int = 10**6,
                           seed: int = 0) -> ExpansionResult:
    """Two-term expansion of the gap for finite activity with diffusion."""
    if not (model.finite_activity and model.sigma > 0):
        raise UnsupportedClass("needs finite activity and sigma > 0")
    if not check_integrability(model).integrable:
        raise NotIntegrable("model not integrable")
    sig_t = model.sigma * math.sqrt(t)
    half = -sig_t * riemann_zeta_unit_interval(0.5) / math.sqrt(2 * math.pi * n)
    e_phi, e_w, se_phi, se_w = _jump_expectations(model, t, mc_budget, seed)
    lam_ey = model.jump_rate * t * (model.jumps.law.positive_mean() if model.jump_rate else 0.0)
    first = (model.gamma0 * t / 2 + lam_ey - sig_t * e_phi - e_w) / (2 * n)
    err = (sig_t * se_phi + se_w) / (2 * n)
    terms = (
        ExpansionTerm("half_order", half),
        ExpansionTerm("first_order", first, err),
    )
    return ExpansionResult(n=n, predicted_gap=half + first, terms=terms)


def expansion_fa_sigma_zero(model: LevyModel, t: float, n: int) -> ExpansionResult:
    """(gamma0^+ t + lambda t E Y^+ - E X_t^+)/(2n) for finite activity without diffusion."""
    if not (model.finite_activity and model.sigma == 0):
        raise UnsupportedClass("needs finite activity and sigma = 0")
    first = _fv_numerator(model, t) / (2 * n)
    return ExpansionResult(n=n, predicted_gap=first, terms=(ExpansionTerm("first_order", first),))


def expansion_fv(model: LevyModel, t: float, n: int) -> ExpansionResult:
    """((gamma0^+ + int x^+ nu) t - E X_t^+)/(2n) for infinite-activity finite variation."""
    if model.finite_activity or not model.finite_variation or not xlogx_integrable(model):
        raise UnsupportedClass("needs sigma = 0, infinite activity, finite variation, x log x")
    if not check_integrability(model).integrable:
        raise NotIntegrable("model not integrable")
    first = _fv_numerator(model, t) / (2 * n)
    return ExpansionResult(n=n, predicted_gap=first, terms=(ExpansionTerm("first_order", first),))


def stable_limit(alpha: float, t: float, ex1_plus: float) -> float:
    """lim n^{1/alpha} E(M_t - M_t^n) = -t^{1/alpha} zeta(1 - 1/alpha) E X_1^+."""
    if not 1.0 < alpha < 2.0:
        raise DomainError("alpha must lie in (1, 2)")
    return float(-(t ** (1 / alpha)) * riemann_zeta_unit_interval(1 - 1 / alpha) * ex1_plus)
