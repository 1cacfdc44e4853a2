"""Reference models, one per regime the gap asymptotics distinguish."""
from __future__ import annotations

from .levy import CompoundPoisson, DoubleExponential, LevyModel, Normal, Stable, VarianceGamma
from .pricing import MarketSpec, risk_neutral_drift

DEFAULT_MARKET = MarketSpec(s0=100.0, r=0.05, delta=0.0, T=1.0)


def brownian():
    return LevyModel(0.0, 0.2)


def merton(market=DEFAULT_MARKET):
    return risk_neutral_drift(LevyModel(0.0, 0.2, CompoundPoisson(3.0, Normal(-0.05, 0.1))), market)


def kou(market=DEFAULT_MARKET):
    jumps = CompoundPoisson(1.0, DoubleExponential(0.4, 10.0, 5.0))
    return risk_neutral_drift(LevyModel(0.0, 0.2, jumps), market)


def compound_poisson():
    return LevyModel.from_gamma0(0.0, 0.0, CompoundPoisson(1.0, Normal(0.0, 1.0)))


def variance_gamma():
    return LevyModel.from_gamma0(0.0, 0.0, VarianceGamma(0.0, 0.2, 0.3))


def stable():
    return LevyModel(0.0, 0.0, Stable(1.5, 1.0, 0.0))


def spectrally_negative(market=DEFAULT_MARKET):
    """Drift minus a gamma process: no positive jumps, no diffusion."""
    return risk_neutral_drift(LevyModel.from_gamma0(0.0, 0.0, VarianceGamma(-0.2, 0.0, 0.3)), market)


REFERENCE = {
    "brownian": brownian,
    "merton": merton,
    "kou": kou,
    "cp": compound_poisson,
    "vg": variance_gamma,
    "stable": stable,
}

EXTRA = {"spectrally_negative": spectrally_negative}


def get(name):
    try:
        return {**REFERENCE, **EXTRA}[name]()
    except KeyError:
        raise KeyError(f"unknown catalog model {name!r}") from None
