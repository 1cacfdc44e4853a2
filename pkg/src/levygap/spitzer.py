"""Deterministic evaluation of E X_s^+, E M_t^n, E M_t and the monitoring gap.

Both suprema means come from Spitzer's identity::

    E M_t^n = sum_{k=1}^n E X_{kt/n}^+ / k,     E M_t = int_0^t E X_s^+ / s ds,

so everything reduces to evaluating ``E X_s^+`` accurately. Routes:

``closed``
    Brownian motion with drift, and symmetric driftless pure-jump VG.
``series``
    Finite activity: condition on the number of jumps. Normal and point-mass
    jumps give Gaussian inner expectations; double-exponential sums are
    written as mixtures of signed gamma laws.
``fourier``
    ``E|X| = (2/pi) int_0^inf (1 - Re E e^{iuX}) / u^2 du`` and
    ``E X^+ = (E X + E|X|)/2``. Needs a decaying characteristic function,
    so it is refused for finite activity without diffusion.
``subordination``
    VG: Gaussian given the gamma clock, integrated over the clock.
``scaling``
    Stable jumps: ``X_s - s E X_1`` is strictly stable, so one Fourier
    integral per value of the rescaled drift.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats

from .errors import NotIntegrable, QuadratureFailure, UnsupportedClass
from .levy import (
    CompoundPoisson,
    DoubleExponential,
    LevyModel,
    NoJumps,
    Normal,
    Stable,
    VarianceGamma,
    check_integrability,
)

_SQRT2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_refinements: int = 12
    fourier_cutoff: float = 50.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")


# tolerances used internally for the per-term values; sums over thousands of
# terms and differences of nearly equal means need far more than the defaults
FINE = QuadSpec(abs_tol=1e-13, rel_tol=1e-12)


@dataclass(frozen=True)
class GapValue:
    n: int
    gap: float
    error_budget: float
    method: str


def positive_part_gaussian(m, sd):
    """E (m + sd Z)^+ for Z standard normal, vectorised; sd may be zero."""
    m = np.asarray(m, dtype=float)
    sd = np.asarray(sd, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = m / sd
        val = m * special.ndtr(z) + sd * np.exp(-0.5 * z * z) / _SQRT2PI
    return np.where(sd > 0, val, np.maximum(m, 0.0))


# --------------------------------------------------------------------------
# compound Poisson series


def _poisson_cutoff(mean, tail_weight, slope, tol):
    """Smallest K with P(N>K) tail_weight + slope E[N; N>K] < tol."""
    k = int(mean + 10 * math.sqrt(mean) + 10)
    while True:
        bound = stats.poisson.sf(k, mean) * tail_weight + slope * mean * stats.poisson.sf(k - 1, mean)
        if bound < tol or k > 10_000:
            return k, bound
        k += max(5, int(math.sqrt(mean)))


def _abs_mean(law):
    return law.positive_mean() + law.reflected().positive_mean()


def _series_normal(model, s, tol):
    jumps = model.jumps
    lam = jumps.rate * s
    c = model.gamma0 * s
    law = jumps.law
    k_max, bound = _poisson_cutoff(lam, abs(c) + model.sigma * math.sqrt(s), _abs_mean(law), tol)
    k = np.arange(k_max + 1)
    w = stats.poisson.pmf(k, lam)
    if isinstance(law, Normal):
        m = c + k * law.mu
        sd = np.sqrt(model.sigma**2 * s + k * law.sd**2)
    else:
        m = c + k * law.value
        sd = np.full(k.shape, model.sigma * math.sqrt(s))
    return float(np.sum(w * positive_part_gaussian(m, sd))), bound


@lru_cache(maxsize=64)
def _signed_gamma_weights(k_max, p, eta_plus, eta_minus):
    """Mixture weights of the sum of k double-exponential jumps.

    Returns arrays ``wp[k, i]`` and ``wm[k, i]``: the k-jump sum equals
    +Gamma(i, eta_plus) with probability wp[k, i] and -Gamma(i, eta_minus)
    with probability wm[k, i] (i >= 1), or 0 with probability wz[k].
    The memoryless property reduces Gamma(a) - Gamma(b) one pair at a time.
    """
    r = eta_minus / (eta_plus + eta_minus)  # P(E+ > E-)
    size = k_max + 1
    # pp_[a][b][i], pm_[a][b][i]
    pp_ = np.zeros((size, size, size))
    pm_ = np.zeros((size, size, size))
    pz = np.zeros((size, size))
    pz[0, 0] = 1.0
    for a in range(size):
        for b in range(size - a):
            if a == 0 and b == 0:
                continue
            if b == 0:
                pp_[a, 0, a] = 1.0
            elif a == 0:
                pm_[0, b, b] = 1.0
            else:
                pp_[a, b] = r * pp_[a, b - 1] + (1 - r) * pp_[a - 1, b]
                pm_[a, b] = r * pm_[a, b - 1] + (1 - r) * pm_[a - 1, b]
                pz[a, b] = r * pz[a, b - 1] + (1 - r) * pz[a - 1, b]
    wp = np.zeros((size, size))
    wm = np.zeros((size, size))
    wz = np.zeros(size)
    for k in range(size):
        j = np.arange(k + 1)
        bw = stats.binom.pmf(j, k, p)
        for jj in range(k + 1):
            wp[k] += bw[jj] * pp_[jj, k - jj]
            wm[k] += bw[jj] * pm_[jj, k - jj]
            wz[k] += bw[jj] * pz[jj, k - jj]
    return wp, wm, wz


def _gamma_shift_positive(c, i, eta, sign):
    """E (c + sign*G)^+ for G ~ Gamma(i, rate eta), i >= 1 array."""
    i = np.asarray(i, dtype=float)
    if sign > 0:
        if c >= 0:
            return c + i / eta
        x = -eta * c
        return c * special.gammaincc(i, x) + (i / eta) * special.gammaincc(i + 1, x)
    if c <= 0:
        return np.zeros_like(i)
    x = eta * c
    return c * special.gammainc(i, x) - (i / eta) * special.gammainc(i + 1, x)


def _gamma_shift_gauss(c, sd, i, eta, sign, tol):
    """E (c + sign*G + sd Z)^+ by quadrature over the gamma density."""
    out = np.empty(len(i))
    for idx, shape in enumerate(i):
        dist = stats.gamma(shape, scale=1.0 / eta)
        hi = dist.isf(1e-17)

        def f(g):
            return float(positive_part_gaussian(c + sign * g, sd)) * dist.pdf(g)

        val, _ = integrate.quad(f, 0.0, hi, epsabs=tol, epsrel=1e-12, limit=200,
                                points=[dist.mean()])
        out[idx] = val
    return out


def _series_double_exponential(model, s, tol):
    jumps = model.jumps
    law = jumps.law
    lam = jumps.rate * s
    c = model.gamma0 * s
    sd = model.sigma * math.sqrt(s)
    k_max, bound = _poisson_cutoff(lam, abs(c) + sd, _abs_mean(law), tol)
    wp, wm, wz = _signed_gamma_weights(k_max, law.p, law.eta_plus, law.eta_minus)
    w = stats.poisson.pmf(np.arange(k_max + 1), lam)
    i = np.arange(1, k_max + 1)
    if sd == 0:
        ep = _gamma_shift_positive(c, i, law.eta_plus, +1)
        em = _gamma_shift_positive(c, i, law.eta_minus, -1)
        e0 = max(c, 0.0)
    else:
        ep = _gamma_shift_gauss(c, sd, i, law.eta_plus, +1, tol)
        em = _gamma_shift_gauss(c, sd, i, law.eta_minus, -1, tol)
        e0 = float(positive_part_gaussian(c, sd))
    per_k = wz * e0 + wp[:, 1:] @ ep + wm[:, 1:] @ em
    return float(np.sum(w * per_k)), bound


# --------------------------------------------------------------------------
# Fourier route


def _one_minus_re_exp(z):
    # 1 - Re e^z without cancellation when z is small
    x, y = z.real, z.imag
    return -np.expm1(x) * np.cos(y) + 2.0 * np.sin(0.5 * y) ** 2


def _fourier_abs_mean(log_cf, scale, tol, max_refinements, cutoff):
    """E|X| from the log characteristic function ``log_cf(u)``.

    ``scale`` sets the u range: integration runs in w = log(u * scale).
    """
    def integrand(w):
        u = math.exp(w) / scale
        return float(_one_minus_re_exp(log_cf(np.array(u)))) / u

    # lower end: the integrand decays like e^{kappa w} (kappa = 1 with finite
    # variance, alpha - 1 for stable); the measured log-slope gives the tail
    w_lo = -40.0
    for _ in range(max_refinements):
        f_lo = integrand(w_lo)
        kappa = math.log(max(integrand(w_lo + 1.0), 1e-300) / max(f_lo, 1e-300))
        if f_lo == 0.0 or (kappa > 0 and f_lo / kappa < tol * 1e-2):
            break
        w_lo -= 40.0
    else:
        raise QuadratureFailure("characteristic function too flat near the origin")
    w_hi = math.log(cutoff)
    for _ in range(max_refinements):
        u_hi = math.exp(w_hi) / scale
        if abs(np.exp(log_cf(np.array(u_hi)).real)) < tol * u_hi * 1e-3:
            break
        w_hi += math.log(2.0)
    else:
        raise QuadratureFailure("characteristic function does not decay within the cutoff")
    with warnings.catch_warnings():
        # quad flags roundoff long after the requested accuracy is reached;
        # the returned error estimate is checked instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, w_lo, w_hi, epsabs=tol * math.pi / 4, epsrel=1e-12,
                                  limit=1000)
    if err > max(1e3 * tol, 1e-10 * abs(val)):
        raise QuadratureFailure(f"Fourier integral error estimate {err:.3g} too large")
    # analytic tail: int_U^inf (1 - Re cf)/u^2 ~ 1/U once |cf| is negligible
    val += scale * math.exp(-w_hi)
    return 2.0 / math.pi * val, 2.0 / math.pi * err


def _model_scale(model, s):
    j = model.jumps
    var = model.sigma**2 * s
    if isinstance(j, CompoundPoisson):
        law = j.law
        var += s * j.rate * law.partial_second_moment(-math.inf, math.inf)
    elif isinstance(j, VarianceGamma):
        var += s * (j.vg_sigma**2 + j.theta**2 * j.vg_nu)
    elif isinstance(j, Stable):
        var += (j.scale * s ** (1 / j.alpha)) ** 2
    return math.sqrt(var) + abs(model.mean) * s + 1e-300


def _fourier(model, s, q):
    if model.finite_activity and model.sigma == 0:
        raise UnsupportedClass("Fourier route needs a decaying characteristic function")
    scale = _model_scale(model, s)

    def log_cf(u):
        return s * model.exponent(u)

    eabs, err = _fourier_abs_mean(log_cf, scale, q.abs_tol / 10, q.max_refinements + 20,
                                  q.fourier_cutoff)
    return 0.5 * (s * model.mean + eabs), 0.5 * err


# --------------------------------------------------------------------------
# variance gamma by subordination


def _vg_subordination(model, s, tol):
    j = model.jumps
    a = s / j.vg_nu
    c = model.gamma0 * s
    if c == 0 and model.sigma == 0 and j.theta == 0:
        val = j.vg_sigma * math.sqrt(j.vg_nu) * math.exp(special.gammaln(a + 0.5) - special.gammaln(a))
        return val / _SQRT2PI, 0.0
    sd0 = model.sigma * math.sqrt(s)
    f0 = float(positive_part_gaussian(c, sd0))
    lg = special.gammaln(a)

    def f(w):
        g = j.vg_nu * math.exp(w)
        fg = float(positive_part_gaussian(c + j.theta * g, math.sqrt(sd0**2 + j.vg_sigma**2 * g)))
        return (fg - f0) * math.exp(a * w - math.exp(w) - lg)

    # |f(g) - f(0)| <= K sqrt(g) for small g, so the left tail is
    # below K sqrt(nu) e^{(a+1/2) w}/((a+1/2)Gamma(a))
    k = abs(j.theta) + j.vg_sigma + 1.0
    w_lo = (math.log(tol * 1e-3) - math.log(k * math.sqrt(j.vg_nu)) + lg + math.log(a + 0.5)) / (a + 0.5)
    w_hi = math.log(a + 60.0 + 12.0 * math.sqrt(a))
    pk = min(max(math.log(a), w_lo), w_hi)
    val, err = integrate.quad(f, w_lo, w_hi, epsabs=tol, epsrel=1e-12, limit=400, points=[pk])
    return f0 + val, err


# --------------------------------------------------------------------------
# stable by scaling


@lru_cache(maxsize=4096)
def _stable_unit_abs(alpha, scale, skew, m):
    """E|m + Y| with Y strictly stable: exponent -scale^a|u|^a(1 - i skew sgn(u) tan)."""
    jumps = Stable(alpha, scale, skew)

    def log_cf(u):
        return 1j * m * u + jumps.compensated_exponent(u)

    return _fourier_abs_mean(log_cf, scale + abs(m), 1e-14, 40, 50.0)


def _stable(model, s):
    j = model.jumps
    if model.sigma > 0:
        return None
    a = j.alpha
    mu = model.mean
    r = s ** (1 / a)
    m = mu * s / r
    eabs, err = _stable_unit_abs(a, j.scale, j.skew, m)
    return r * 0.5 * (m + eabs), r * 0.5 * err


# --------------------------------------------------------------------------
# public operations


def default_method(model):
    j = model.jumps
    if isinstance(j, NoJumps):
        return "closed"
    if isinstance(j, CompoundPoisson):
        if isinstance(j.law, DoubleExponential) and model.sigma > 0:
            return "fourier"
        return "series"
    if isinstance(j, VarianceGamma):
        return "subordination"
    if isinstance(j, Stable):
        return "scaling" if model.sigma == 0 else "fourier"
    raise UnsupportedClass(f"no E X^+ route for {type(j).__name__}")


def _require_integrable(model):
    if not check_integrability(model).integrable:
        raise NotIntegrable("E|X_1| is infinite")


def positive_part_with_error(model: LevyModel, s: float, q: QuadSpec = FINE, method=None):
    """(E X_s^+, error estimate, route)."""
    _require_integrable(model)
    if s <= 0:
        raise ValueError("s must be positive")
    v, e, route = _positive_part(model, s, q, method or default_method(model))
    return float(v), float(e), route


def _positive_part(model, s, q, method):
    if method == "closed":
        if not isinstance(model.jumps, NoJumps):
            raise UnsupportedClass("closed form only for Brownian motion with drift")
        return float(positive_part_gaussian(model.gamma * s, model.sigma * math.sqrt(s))), 0.0, method
    if method == "series":
        j = model.jumps
        if not isinstance(j, CompoundPoisson):
            raise UnsupportedClass("series route needs compound Poisson jumps")
        if isinstance(j.law, DoubleExponential):
            v, e = _series_double_exponential(model, s, q.abs_tol)
        else:
            v, e = _series_normal(model, s, q.abs_tol)
        return v, e, method
    if method == "fourier":
        v, e = _fourier(model, s, q)
        return v, e, method
    if method == "subordination":
        if not isinstance(model.jumps, VarianceGamma):
            raise UnsupportedClass("subordination route is for VG")
        v, e = _vg_subordination(model, s, q.abs_tol)
        return v, e, method
    if method == "scaling":
        res = _stable(model, s) if isinstance(model.jumps, Stable) else None
        if res is None:
            raise UnsupportedClass("scaling route needs pure stable jumps without diffusion")
        return res[0], res[1], method
    raise ValueError(f"unknown method {method!r}")


def expected_positive_part(model: LevyModel, s: float, q: QuadSpec = FINE, method=None) -> float:
    """E X_s^+."""
    return positive_part_with_error(model, s, q, method)[0]


def positive_part_grid(model, t, n, q=FINE, method=None):
    """Values E X_{kt/n}^+ for k = 1..n with summed error estimate."""
    vals = np.empty(n)
    err = 0.0
    route = None
    for k in range(1, n + 1):
        v, e, route = positive_part_with_error(model, k * t / n, q, method)
        vals[k - 1] = v
        err += e
    return vals, err, route


def discrete_sup_mean(model, t, n, q=FINE, method=None, with_error=False):
    """E M_t^n = sum_{k=1}^n E X_{kt/n}^+ / k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    vals, err, _ = positive_part_grid(model, t, n, q, method)
    k = np.arange(1, n + 1)
    total = math.fsum(vals / k)
    return (total, err) if with_error else total


def _strictly_stable(model):
    return isinstance(model.jumps, Stable) and model.sigma == 0 and model.mean == 0


def continuous_sup_mean(model, t, q=FINE, method=None, with_error=False):
    """E M_t = int_0^t E X_s^+ / s ds, integrated in v = sqrt(s)."""
    _require_integrable(model)
    if _strictly_stable(model):
        # E X_s^+ = s^{1/a} E X_1^+ integrates in closed form
        a = model.jumps.alpha
        v, e, _ = positive_part_with_error(model, 1.0, q, method)
        out = a * t ** (1 / a) * v, a * t ** (1 / a) * e
        return out if with_error else out[0]
    if isinstance(model.jumps, NoJumps) and model.gamma == 0:
        out = model.sigma * math.sqrt(2 * t / math.pi), 0.0
        return out if with_error else out[0]

    def f(v):
        if v == 0.0:
            return 2 * model.sigma / _SQRT2PI
        return 2.0 * expected_positive_part(model, v * v, q, method) / v

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, 0.0, math.sqrt(t), epsabs=q.abs_tol, epsrel=q.rel_tol,
                                      limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    return (val, err) if with_error else val


def gap_mean(model, t, n, q=FINE, method=None) -> GapValue:
    """E(M_t - M_t^n) with a summed error budget."""
    cont, e1 = continuous_sup_mean(model, t, q, method, with_error=True)
    disc, e2 = discrete_sup_mean(model, t, n, q, method, with_error=True)
    route = method or default_method(model)
    return GapValue(n=n, gap=float(cont - disc), error_budget=float(e1 + e2 + 1e-15 * n), method=route)


def gap_curve(model, t, n_list, q=FINE, method=None):
    """Gap values for nested grids sharing one evaluation of E X^+ on the finest grid."""
    n_list = sorted(int(n) for n in n_list)
    n_max = n_list[-1]
    if any(n_max % n for n in n_list):
        raise ValueError("every n must divide the largest n")
    vals, err, route = positive_part_grid(model, t, n_max, q, method)
    cont, e1 = continuous_sup_mean(model, t, q, method, with_error=True)
    out = []
    for n in n_list:
        step = n_max // n
        k = np.arange(1, n + 1)
        disc = math.fsum(vals[step - 1 :: step] / k)
        out.append(GapValue(n=n, gap=float(cont - disc), error_budget=float(e1 + err * n / n_max + 1e-15 * n),
                            method=route))
    return out


def sup_mean_bound(model, t):
    """Upper bound for E M_t, finite-variation form when the jumps allow it."""
    j = model.jumps
    if j.finite_variation:
        return (max(model.gamma0, 0.0) + j.positive_jump_mean()) * t + model.sigma * math.sqrt(
            2 * t / math.pi
        )
    small = j.small_jump_second_moment()
    return (max(model.gamma, 0.0) + j.large_positive_jump_mean()) * t + (
        model.sigma * math.sqrt(2 / math.pi) + 2 * math.sqrt(small)
    ) * math.sqrt(t)
