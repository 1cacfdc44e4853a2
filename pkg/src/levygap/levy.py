"""Lévy models: generating triplets, jump specifications and class checks.

Conventions
-----------
The drift ``gamma`` is always the Lévy–Khinchine drift for the truncation
function ``1{|x| <= 1}``::

    phi(u) = i gamma u - sigma^2 u^2 / 2
             + int (e^{iux} - 1 - iux 1{|x|<=1}) nu(dx)

and ``E exp(iu X_t) = exp(t phi(u))``. When the jumps have finite variation
the drift net of small-jump compensation is ``gamma0 = gamma - int_{|x|<=1}
x nu(dx)``, so that ``X_t = gamma0 t + sigma B_t + (sum of jumps)``.
Use :meth:`LevyModel.from_gamma0` to build a model from ``gamma0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy import special

from .errors import DomainError, UnsupportedClass

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _complex_log1p(z):
    # numpy's complex log1p loses relative accuracy for small |z|
    a, b = z.real, z.imag
    return 0.5 * np.log1p(2 * a + a * a + b * b) + 1j * np.arctan2(b, 1 + a)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT2PI


# --------------------------------------------------------------------------
# jump-size laws for compound Poisson jumps


@dataclass(frozen=True)
class Normal:
    """Gaussian jump sizes N(mu, sd^2)."""

    mu: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise DomainError("Normal jump law needs sd > 0")

    def mean(self):
        return self.mu

    def positive_mean(self):
        """E Y^+."""
        z = self.mu / self.sd
        return self.mu * special.ndtr(z) + self.sd * float(_phi(z))

    def partial_mean(self, a, b):
        """E[Y; a < Y <= b] (``a``, ``b`` may be infinite)."""
        al, be = (a - self.mu) / self.sd, (b - self.mu) / self.sd
        return self.mu * (special.ndtr(be) - special.ndtr(al)) + self.sd * (
            float(_phi(al)) - float(_phi(be))
        )

    def partial_second_moment(self, a, b):
        """E[Y^2; a < Y <= b]."""
        al, be = (a - self.mu) / self.sd, (b - self.mu) / self.sd
        dphi = special.ndtr(be) - special.ndtr(al)
        pa, pb = float(_phi(al)), float(_phi(be))
        # al*phi(al) -> 0 at +-inf
        apa = al * pa if math.isfinite(al) else 0.0
        bpb = be * pb if math.isfinite(be) else 0.0
        return (
            self.mu**2 * dphi
            + 2 * self.mu * self.sd * (pa - pb)
            + self.sd**2 * (dphi + apa - bpb)
        )

    def char(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * self.mu * u - 0.5 * (self.sd * u) ** 2)

    def char_minus_one(self, u):
        u = np.asarray(u, dtype=float)
        return np.expm1(1j * self.mu * u - 0.5 * (self.sd * u) ** 2)

    def mgf(self, q):
        return math.exp(self.mu * q + 0.5 * (self.sd * q) ** 2)

    def exp_tail_finite(self, q):
        return True

    def quantile(self, u):
        return self.mu + self.sd * special.ndtri(u)

    def reflected(self):
        return Normal(-self.mu, self.sd)

    @property
    def has_positive_support(self):
        return True


@dataclass(frozen=True)
class DoubleExponential:
    """Kou jumps: +Exp(eta_plus) with probability ``p``, else -Exp(eta_minus)."""

    p: float
    eta_plus: float
    eta_minus: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("p must be a probability")
        if not (self.eta_plus > 0 and self.eta_minus > 0):
            raise DomainError("eta_plus and eta_minus must be positive")

    def mean(self):
        return self.p / self.eta_plus - (1 - self.p) / self.eta_minus

    def positive_mean(self):
        return self.p / self.eta_plus

    def _side_mean(self, eta, lo, hi):
        # int_lo^hi y eta e^{-eta y} dy for 0 <= lo <= hi <= inf
        def prim(y):
            if math.isinf(y):
                return 0.0
            return -(y + 1.0 / eta) * math.exp(-eta * y)

        return prim(hi) - prim(lo)

    def _side_second(self, eta, lo, hi):
        def prim(y):
            if math.isinf(y):
                return 0.0
            return -(y * y + 2 * y / eta + 2 / eta**2) * math.exp(-eta * y)

        return prim(hi) - prim(lo)

    def partial_mean(self, a, b):
        pos = neg = 0.0
        lo, hi = max(a, 0.0), max(b, 0.0)
        if hi > lo:
            pos = self.p * self._side_mean(self.eta_plus, lo, hi)
        lo, hi = max(-b, 0.0), max(-a, 0.0)
        if hi > lo:
            neg = (1 - self.p) * self._side_mean(self.eta_minus, lo, hi)
        return pos - neg

    def partial_second_moment(self, a, b):
        out = 0.0
        lo, hi = max(a, 0.0), max(b, 0.0)
        if hi > lo:
            out += self.p * self._side_second(self.eta_plus, lo, hi)
        lo, hi = max(-b, 0.0), max(-a, 0.0)
        if hi > lo:
            out += (1 - self.p) * self._side_second(self.eta_minus, lo, hi)
        return out

    def char(self, u):
        u = np.asarray(u, dtype=float)
        return self.p * self.eta_plus / (self.eta_plus - 1j * u) + (1 - self.p) * self.eta_minus / (
            self.eta_minus + 1j * u
        )

    def char_minus_one(self, u):
        u = np.asarray(u, dtype=float)
        iu = 1j * u
        return self.p * iu / (self.eta_plus - iu) - (1 - self.p) * iu / (self.eta_minus + iu)

    def mgf(self, q):
        if not -self.eta_minus < q < self.eta_plus:
            return math.inf
        return self.p * self.eta_plus / (self.eta_plus - q) + (1 - self.p) * self.eta_minus / (
            self.eta_minus + q
        )

    def exp_tail_finite(self, q):
        return self.p == 0 or q < self.eta_plus

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        q = 1.0 - self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            neg = np.log(u / q) / self.eta_minus
            pos = -np.log((1.0 - u) / self.p) / self.eta_plus
        return np.where(u < q, neg, pos)

    def reflected(self):
        return DoubleExponential(1.0 - self.p, self.eta_minus, self.eta_plus)

    @property
    def has_positive_support(self):
        return self.p > 0


@dataclass(frozen=True)
class PointMass:
    """Every jump has the same size ``value``."""

    value: float

    def mean(self):
        return self.value

    def positive_mean(self):
        return max(self.value, 0.0)

    def partial_mean(self, a, b):
        return self.value if a < self.value <= b else 0.0

    def partial_second_moment(self, a, b):
        return self.value**2 if a < self.value <= b else 0.0

    def char(self, u):
        return np.exp(1j * self.value * np.asarray(u, dtype=float))

    def char_minus_one(self, u):
        return np.expm1(1j * self.value * np.asarray(u, dtype=float))

    def mgf(self, q):
        return math.exp(q * self.value)

    def exp_tail_finite(self, q):
        return True

    def quantile(self, u):
        return np.full(np.shape(u), float(self.value))

    def reflected(self):
        return PointMass(-self.value)

    @property
    def has_positive_support(self):
        return self.value > 0


JumpLaw = Union[Normal, DoubleExponential, PointMass]


# --------------------------------------------------------------------------
# jump specifications


@dataclass(frozen=True)
class NoJumps:
    finite_activity = True
    finite_variation = True

    def exponent(self, u):
        return np.zeros(np.shape(u), dtype=complex)

    def laplace(self, q):
        return 0.0

    def small_jump_mean(self):
        return 0.0

    def large_jump_mean(self):
        return 0.0

    def positive_jump_mean(self):
        return 0.0

    def large_positive_jump_mean(self):
        return 0.0

    def small_jump_second_moment(self):
        return 0.0

    def exp_tail_finite(self, q):
        return True

    def reflected(self):
        return self

    @property
    def positive_jumps(self):
        return False


@dataclass(frozen=True)
class CompoundPoisson:
    """Jumps arriving at ``rate`` with sizes drawn from ``law``."""

    rate: float
    law: JumpLaw
    finite_activity = True
    finite_variation = True

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("compound Poisson rate must be positive")

    def exponent(self, u):
        u = np.asarray(u, dtype=float)
        return self.rate * self.law.char_minus_one(u) - 1j * u * self.small_jump_mean()

    def laplace(self, q):
        m = self.law.mgf(q)
        if not math.isfinite(m):
            return math.inf
        return self.rate * (m - 1.0) - q * self.small_jump_mean()

    def small_jump_mean(self):
        return self.rate * self.law.partial_mean(-1.0, 1.0)

    def large_jump_mean(self):
        return self.rate * (self.law.mean() - self.law.partial_mean(-1.0, 1.0))

    def positive_jump_mean(self):
        return self.rate * self.law.positive_mean()

    def large_positive_jump_mean(self):
        return self.rate * self.law.partial_mean(1.0, math.inf)

    def small_jump_second_moment(self):
        return self.rate * self.law.partial_second_moment(-1.0, 1.0)

    def exp_tail_finite(self, q):
        return self.law.exp_tail_finite(q)

    def reflected(self):
        return CompoundPoisson(self.rate, self.law.reflected())

    @property
    def positive_jumps(self):
        return self.law.has_positive_support


@dataclass(frozen=True)
class VarianceGamma:
    """VG jumps theta*G + vg_sigma*W(G), G a gamma subordinator with variance rate vg_nu.

    ``vg_sigma = 0`` is allowed when ``theta != 0``; the process is then a
    (negated) gamma process with jumps of one sign only.

    The Lévy density is ``C exp(-M x)/x`` for x > 0 and ``C exp(-G|x|)/|x|``
    for x < 0 with ``C = 1/vg_nu``.
    """

    theta: float
    vg_sigma: float
    vg_nu: float
    finite_activity = False
    finite_variation = True

    def __post_init__(self):
        if not self.vg_nu > 0 or self.vg_sigma < 0:
            raise DomainError("VG needs vg_nu > 0 and vg_sigma >= 0")
        if self.vg_sigma == 0 and self.theta == 0:
            raise DomainError("VG with vg_sigma = 0 needs theta != 0")

    @property
    def c(self):
        return 1.0 / self.vg_nu

    @property
    def rates(self):
        """(G, M): exponential decay rates of the negative and positive tails."""
        th, s2, nu = self.theta, self.vg_sigma**2, self.vg_nu
        if s2 == 0:  # gamma process: one tail only, and rounding must not invent the other
            r = 1.0 / (abs(th) * nu)
            return (r, math.inf) if th < 0 else (math.inf, r)
        root = math.sqrt(th * th * nu * nu / 4 + s2 * nu / 2)
        a, b = root - th * nu / 2, root + th * nu / 2
        return (1.0 / a if a > 0 else math.inf), (1.0 / b if b > 0 else math.inf)

    def _fv_exponent(self, u):
        u = np.asarray(u, dtype=float)
        th, s2, nu = self.theta, self.vg_sigma**2, self.vg_nu
        return -_complex_log1p(-1j * th * nu * u + 0.5 * s2 * nu * u * u) / nu

    def exponent(self, u):
        u = np.asarray(u, dtype=float)
        return self._fv_exponent(u) - 1j * u * self.small_jump_mean()

    def laplace(self, q):
        arg = 1 - self.theta * self.vg_nu * q - 0.5 * self.vg_sigma**2 * self.vg_nu * q * q
        if arg <= 0:
            return math.inf
        return -math.log(arg) / self.vg_nu - q * self.small_jump_mean()

    @staticmethod
    def _side(c, rate, kind):
        if math.isinf(rate):
            return 0.0
        if kind == "small1":  # int_0^1 x c e^{-rx}/x dx
            return c * (-math.expm1(-rate)) / rate
        if kind == "large1":  # int_1^inf
            return c * math.exp(-rate) / rate
        if kind == "all1":
            return c / rate
        if kind == "small2":  # int_0^1 x^2 c e^{-rx}/x dx
            return c * (1 - math.exp(-rate) * (1 + rate)) / rate**2
        raise ValueError(kind)

    def small_jump_mean(self):
        g, m = self.rates
        return self._side(self.c, m, "small1") - self._side(self.c, g, "small1")

    def large_jump_mean(self):
        g, m = self.rates
        return self._side(self.c, m, "large1") - self._side(self.c, g, "large1")

    def positive_jump_mean(self):
        return self._side(self.c, self.rates[1], "all1")

    def large_positive_jump_mean(self):
        return self._side(self.c, self.rates[1], "large1")

    def small_jump_second_moment(self):
        g, m = self.rates
        return self._side(self.c, m, "small2") + self._side(self.c, g, "small2")

    def exp_tail_finite(self, q):
        return q < self.rates[1]

    def reflected(self):
        return VarianceGamma(-self.theta, self.vg_sigma, self.vg_nu)

    @property
    def positive_jumps(self):
        return math.isfinite(self.rates[1])


@dataclass(frozen=True)
class Stable:
    """alpha-stable jumps, alpha in (1, 2), S1 parameterisation with location in gamma.

    Lévy density ``C+ x^{-1-alpha}`` on x > 0 and ``C- |x|^{-1-alpha}`` on
    x < 0 where ``C+- = (1 +- skew)/2 * K`` and
    ``K = -scale^alpha / (Gamma(-alpha) cos(pi alpha / 2))``.
    """

    alpha: float
    scale: float
    skew: float
    finite_activity = False
    finite_variation = False

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise DomainError("stable alpha must lie in (1, 2)")
        if not self.scale > 0 or not -1.0 <= self.skew <= 1.0:
            raise DomainError("stable needs scale > 0 and skew in [-1, 1]")

    @property
    def tail_constants(self):
        a = self.alpha
        k = -self.scale**a / (special.gamma(-a) * math.cos(math.pi * a / 2))
        return 0.5 * (1 + self.skew) * k, 0.5 * (1 - self.skew) * k

    def compensated_exponent(self, u):
        """int (e^{iux} - 1 - iux) nu(dx)."""
        u = np.asarray(u, dtype=float)
        a = self.alpha
        return -(self.scale**a) * np.abs(u) ** a * (
            1 - 1j * self.skew * np.sign(u) * math.tan(math.pi * a / 2)
        )

    def exponent(self, u):
        u = np.asarray(u, dtype=float)
        return self.compensated_exponent(u) + 1j * u * self.large_jump_mean()

    def laplace(self, q):
        if q == 0:
            return 0.0
        if self.skew != -1.0 or q < 0:
            return math.inf
        a = self.alpha
        return -(self.scale**a) * q**a / math.cos(math.pi * a / 2) + q * self.large_jump_mean()

    def small_jump_mean(self):
        raise UnsupportedClass("stable jumps with alpha > 1 have infinite variation")

    def large_jump_mean(self):
        cp, cm = self.tail_constants
        return (cp - cm) / (self.alpha - 1)

    def positive_jump_mean(self):
        return math.inf if self.skew > -1 else 0.0

    def large_positive_jump_mean(self):
        return self.tail_constants[0] / (self.alpha - 1)

    def small_jump_second_moment(self):
        cp, cm = self.tail_constants
        return (cp + cm) / (2 - self.alpha)

    def exp_tail_finite(self, q):
        return q <= 0 or self.skew == -1.0

    def reflected(self):
        return Stable(self.alpha, self.scale, -self.skew)

    @property
    def positive_jumps(self):
        return self.skew > -1.0


JumpSpec = Union[NoJumps, CompoundPoisson, VarianceGamma, Stable]


# --------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class ModelClass:
    activity: str  # "finite" | "infinite"
    variation: str  # "finite" | "infinite"
    has_diffusion: bool
    positive_jumps: bool


@dataclass(frozen=True)
class IntegrabilityReport:
    model_class: ModelClass
    integrable: bool
    sup_integrable: bool


@dataclass(frozen=True)
class LevyModel:
    """Generating triplet (gamma, sigma^2, nu) with nu given by ``jumps``."""

    gamma: float
    sigma: float = 0.0
    jumps: JumpSpec = field(default_factory=NoJumps)

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not (math.isfinite(self.gamma) and math.isfinite(self.sigma)):
            raise DomainError("gamma and sigma must be finite")
        if self.sigma < 0:
            raise DomainError("sigma must be nonnegative")

    @classmethod
    def from_gamma0(cls, gamma0, sigma=0.0, jumps=None):
        jumps = NoJumps() if jumps is None else jumps
        return cls(gamma0 + jumps.small_jump_mean(), sigma, jumps)

    # -- exponents ---------------------------------------------------------
    def exponent(self, u):
        """Characteristic exponent phi(u), vectorised over ``u``."""
        u = np.asarray(u, dtype=float)
        return 1j * self.gamma * u - 0.5 * self.sigma**2 * u * u + self.jumps.exponent(u)

    def laplace_exponent(self, q):
        """log E exp(q X_1); ``inf`` when the moment is infinite."""
        lj = self.jumps.laplace(q)
        if not math.isfinite(lj):
            return math.inf
        return self.gamma * q + 0.5 * self.sigma**2 * q * q + lj

    # -- drifts and moments ------------------------------------------------
    @property
    def gamma0(self):
        return float(self.gamma - self.jumps.small_jump_mean())

    @property
    def mean(self):
        """E X_1 (finite for every supported integrable model)."""
        return self.gamma + self.jumps.large_jump_mean()

    @property
    def finite_activity(self):
        return self.jumps.finite_activity

    @property
    def finite_variation(self):
        return self.sigma == 0 and self.jumps.finite_variation

    @property
    def model_class(self):
        return ModelClass(
            activity="finite" if self.jumps.finite_activity else "infinite",
            variation="finite" if self.finite_variation else "infinite",
            has_diffusion=self.sigma > 0,
            positive_jumps=self.jumps.positive_jumps,
        )

    @property
    def jump_rate(self):
        return self.jumps.rate if isinstance(self.jumps, CompoundPoisson) else 0.0

    def with_gamma(self, gamma):
        return replace(self, gamma=gamma)


LevyTriplet = LevyModel


def char_exponent(model, u):
    return model.exponent(u)


def drift_gamma0(model):
    return model.gamma0


def dual(model):
    """Model of -X."""
    return LevyModel(-model.gamma, model.sigma, model.jumps.reflected())


def check_integrability(model):
    # every supported jump spec has a light enough right tail for E X_1^+,
    # stable included because alpha > 1; kept as computed flags so that a
    # future heavier-tailed spec only needs to report its tail integrals.
    tail = abs(model.jumps.large_jump_mean()) < math.inf
    right = model.jumps.large_positive_jump_mean() < math.inf
    return IntegrabilityReport(model.model_class, integrable=tail, sup_integrable=right)


def check_exp_moment(model, q):
    """True iff int_{x>1} e^{qx} nu(dx) < inf, i.e. E e^{q M_t} < inf."""
    if q <= 0:
        return True
    return model.jumps.exp_tail_finite(q)


def xlogx_integrable(model):
    """int_{|x|<=1} |x log|x|| nu(dx) < inf (true for every finite-variation spec here)."""
    return model.jumps.finite_variation
