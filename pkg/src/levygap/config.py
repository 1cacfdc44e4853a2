"""Run configuration files.

INI syntax, either with sections::

    [model]
    jumps = compound_poisson
    sigma = 0.2

or flat dotted keys (``model.sigma = 0.2``); both may be mixed. Unknown
keys are rejected and every number must be finite.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields
from typing import Optional

from . import catalog
from .errors import ConfigError, DomainError
from .lab import Tolerances
from .levy import (
    CompoundPoisson,
    DoubleExponential,
    LevyModel,
    NoJumps,
    Normal,
    PointMass,
    Stable,
    VarianceGamma,
)
from .pricing import MarketSpec, MonteCarlo, OptionSpec, risk_neutral_drift

_ROOT = "__root__"

MODEL_KEYS = {
    "id", "catalog", "jumps", "gamma", "gamma0", "sigma", "risk_neutral", "rate", "jump_law",
    "jump_mu", "jump_sd", "jump_p", "eta_plus", "eta_minus", "jump_value", "theta", "vg_sigma",
    "vg_nu", "alpha", "scale", "skew",
}
MARKET_KEYS = {"s0", "r", "delta", "T"}
OPTION_KEYS = {"kind", "strike", "extremum", "k_index", "n"}
STUDY_KEYS = {"n_list", "paths", "seed", "engine", "t", "refine_factor", "workers"}
TOL_KEYS = {f.name for f in fields(Tolerances)}
OUTPUT_KEYS = {"path"}


@dataclass
class StudyConfig:
    n_list: tuple = tuple(2**k for k in range(4, 13))
    paths: int = 100_000
    seed: int = 0
    engine: str = "spitzer"
    t: float = 1.0
    refine_factor: int = 16
    workers: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)

    def monte_carlo(self):
        return MonteCarlo(self.paths, self.seed, self.workers, self.refine_factor)


@dataclass
class RunConfig:
    model: LevyModel
    model_id: str
    market: Optional[MarketSpec]
    option: Optional[OptionSpec]
    study: StudyConfig
    output: Optional[str] = None
    risk_neutral_error: Optional[str] = None


def _num(sec, key, raw, kind=float):
    try:
        val = kind(raw) if kind is not int else int(float(raw)) if float(raw).is_integer() else None
    except ValueError:
        val = None
    if val is None or (isinstance(val, float) and not math.isfinite(val)):
        raise ConfigError(f"{sec}.{key}: expected a finite {kind.__name__}, got {raw!r}")
    return val


def _bool(sec, key, raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{sec}.{key}: expected a boolean, got {raw!r}")


def read_sections(text: str) -> dict:
    """Section -> {key: raw string}, merging flat dotted keys into sections."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_ROOT}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    out = {}
    for sec in parser.sections():
        for key, val in parser.items(sec):
            if sec == _ROOT:
                if "." not in key:
                    raise ConfigError(f"top-level key {key!r} needs a section prefix")
                s, k = key.split(".", 1)
            else:
                s, k = sec, key
            bucket = out.setdefault(s, {})
            if k in bucket:
                raise ConfigError(f"duplicate key {s}.{k}")
            bucket[k] = val.strip()
    unknown = set(out) - {"model", "market", "option", "study", "output"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    return out


def _check_keys(sec, got, allowed):
    extra = set(got) - allowed
    if extra:
        raise ConfigError(f"unknown keys in [{sec}]: {sorted(extra)}")


def _jump_law(m):
    law = m.get("jump_law")
    if law == "normal":
        return Normal(_num("model", "jump_mu", m.get("jump_mu", "0")), _num("model", "jump_sd", _req(m, "jump_sd")))
    if law == "double_exponential":
        return DoubleExponential(_num("model", "jump_p", _req(m, "jump_p")),
                                 _num("model", "eta_plus", _req(m, "eta_plus")),
                                 _num("model", "eta_minus", _req(m, "eta_minus")))
    if law == "point_mass":
        return PointMass(_num("model", "jump_value", _req(m, "jump_value")))
    raise ConfigError(f"model.jump_law must be normal, double_exponential or point_mass, got {law!r}")


def _req(m, key, sec="model"):
    if key not in m:
        raise ConfigError(f"missing {sec}.{key}")
    return m[key]


def build_model(m: dict) -> LevyModel:
    if "catalog" in m:
        _check_keys("model", m, {"catalog", "id", "risk_neutral"})
        try:
            return catalog.get(m["catalog"])
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    kind = m.get("jumps", "none")
    if kind == "none":
        jumps = NoJumps()
    elif kind == "compound_poisson":
        jumps = CompoundPoisson(_num("model", "rate", _req(m, "rate")), _jump_law(m))
    elif kind == "variance_gamma":
        jumps = VarianceGamma(_num("model", "theta", m.get("theta", "0")),
                              _num("model", "vg_sigma", _req(m, "vg_sigma")),
                              _num("model", "vg_nu", _req(m, "vg_nu")))
    elif kind == "stable":
        jumps = Stable(_num("model", "alpha", _req(m, "alpha")),
                       _num("model", "scale", m.get("scale", "1")),
                       _num("model", "skew", m.get("skew", "0")))
    else:
        raise ConfigError(f"model.jumps must be none, compound_poisson, variance_gamma or stable, got {kind!r}")
    sigma = _num("model", "sigma", m.get("sigma", "0"))
    if "gamma" in m and "gamma0" in m:
        raise ConfigError("give model.gamma or model.gamma0, not both")
    if "gamma0" in m:
        return LevyModel.from_gamma0(_num("model", "gamma0", m["gamma0"]), sigma, jumps)
    return LevyModel(_num("model", "gamma", m.get("gamma", "0")), sigma, jumps)


def parse_config(text: str) -> RunConfig:
    secs = read_sections(text)
    m = secs.get("model")
    if not m:
        raise ConfigError("missing [model] section")
    _check_keys("model", m, MODEL_KEYS)
    try:
        model = build_model(m)
    except DomainError as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    model_id = m.get("id", m.get("catalog", "model"))

    market = None
    if "market" in secs:
        mk = secs["market"]
        _check_keys("market", mk, MARKET_KEYS)
        try:
            market = MarketSpec(*(_num("market", k, _req(mk, k, "market")) for k in ("s0", "r", "delta", "T")))
        except DomainError as exc:
            raise ConfigError(f"invalid market: {exc}") from exc

    rn_error = None
    if _bool("model", "risk_neutral", m.get("risk_neutral", "false")):
        if market is None:
            raise ConfigError("model.risk_neutral needs a [market] section")
        from .errors import MomentFailure

        try:
            model = risk_neutral_drift(model, market)
        except MomentFailure as exc:
            rn_error = str(exc)

    option = None
    if "option" in secs:
        op = secs["option"]
        _check_keys("option", op, OPTION_KEYS)
        try:
            option = OptionSpec(
                kind=_req(op, "kind", "option"),
                n=_num("option", "n", _req(op, "n", "option"), int),
                strike=_num("option", "strike", op["strike"]) if "strike" in op else None,
                extremum=_num("option", "extremum", op["extremum"]) if "extremum" in op else None,
                k_index=_num("option", "k_index", op.get("k_index", "0"), int),
            )
        except DomainError as exc:
            raise ConfigError(f"invalid option: {exc}") from exc
        if market is None:
            raise ConfigError("an [option] section needs a [market] section")

    study = StudyConfig()
    if "study" in secs:
        st = secs["study"]
        tol_items = {k.split(".", 1)[1]: v for k, v in st.items() if k.startswith("tolerances.")}
        plain = {k: v for k, v in st.items() if not k.startswith("tolerances.")}
        _check_keys("study", plain, STUDY_KEYS)
        _check_keys("study.tolerances", tol_items, TOL_KEYS)
        if "n_list" in plain:
            try:
                study.n_list = tuple(int(x) for x in plain["n_list"].replace(" ", "").split(",") if x)
            except ValueError as exc:
                raise ConfigError(f"study.n_list: {exc}") from exc
        for key, kind in (("paths", int), ("seed", int), ("refine_factor", int), ("workers", int), ("t", float)):
            if key in plain:
                setattr(study, key, _num("study", key, plain[key], kind))
        if "engine" in plain:
            if plain["engine"] not in ("spitzer", "mc"):
                raise ConfigError("study.engine must be spitzer or mc")
            study.engine = plain["engine"]
        if tol_items:
            study.tolerances = Tolerances(**{k: _num("study", "tolerances." + k, v) for k, v in tol_items.items()})
        if not 0 <= study.seed < 2**64:
            raise ConfigError("study.seed must be a 64-bit unsigned integer")

    output = None
    if "output" in secs:
        _check_keys("output", secs["output"], OUTPUT_KEYS)
        output = secs["output"].get("path")
    return RunConfig(model, model_id, market, option, study, output, rn_error)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)
