"""Command-line front end.

Exit codes: 0 success, 2 configuration or input error, 3 model outside the
hypotheses of the requested computation, 4 numerical failure, 5 a check
requested with ``--assert`` failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, replace

import numpy as np

from .asymptotics import beta1, classify_rate, riemann_zeta_unit_interval
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DegenerateInput,
    DomainError,
    HypothesisFailure,
    HypothesisWarning,
    MomentFailure,
    NotIntegrable,
    QuadratureFailure,
    UnsupportedClass,
)
from .lab import (
    CORRECTION_HEADER,
    GAP_HEADER,
    correction_rows,
    fit_rate,
    gap_rows,
    run_correction_study,
    run_gap_study,
    to_csv,
    verify_prediction,
)
from .levy import check_exp_moment, check_integrability
from .pricing import (
    correct_continuous_from_discrete,
    correct_discrete_from_continuous,
    correction_hypotheses,
    simulate_extrema,
)
from .paths import supremum_batch
from .rng import RngStreamSpec
from .spitzer import FINE, gap_mean

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_ASSERT = 0, 2, 3, 4, 5


class _AssertFailed(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null, tuples become lists."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(_clean(payload), sort_keys=True))
    else:
        print(text)


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = load_config(args.config)
    st = cfg.study
    if args.seed is not None:
        st.seed = args.seed
    if args.paths is not None:
        st.paths = args.paths
    if args.engine is not None:
        st.engine = args.engine
    if getattr(args, "workers", None) is not None:
        st.workers = args.workers
    return cfg


def _require_option(cfg):
    if cfg.option is None or cfg.market is None:
        raise ConfigError("this command needs [option] and [market] sections")
    if cfg.risk_neutral_error:
        raise MomentFailure(f"risk-neutral drift undefined: {cfg.risk_neutral_error}")
    if not check_exp_moment(cfg.model, 1.0):
        raise MomentFailure("E exp(X_T) is infinite; the asset price has no mean")


# --------------------------------------------------------------------------
# subcommands


def cmd_zeta(args):
    z = riemann_zeta_unit_interval(args.s)
    b = beta1()
    _emit(args, {"s": args.s, "zeta": z, "beta1": b}, f"zeta({args.s!r}) = {z!r}\nbeta1 = {b!r}")
    return EXIT_OK


def cmd_validate(args):
    cfg = _load(args)
    m = cfg.model
    rep = check_integrability(m)
    h2 = m.finite_activity and m.sigma > 0 and rep.integrable
    h1 = check_exp_moment(m, 2.0 * (1 + 1e-9))
    moment = cfg.risk_neutral_error is None and check_exp_moment(m, 1.0)
    try:
        g0 = m.gamma0
    except UnsupportedClass:
        g0 = math.nan  # only defined for finite variation of the small jumps
    payload = {
        "model_id": cfg.model_id,
        "model_class": asdict(m.model_class),
        "gamma": m.gamma,
        "gamma0": g0,
        "sigma": m.sigma,
        "integrable": rep.integrable,
        "sup_integrable": rep.sup_integrable,
        "H1": h1,
        "H2": h2,
        "exp_moment": moment,
    }
    lines = [f"model {cfg.model_id}: gamma={m.gamma!r} gamma0={g0!r} sigma={m.sigma!r}"]
    lines += [f"  {k}: {v}" for k, v in asdict(m.model_class).items()]
    lines += [f"  integrable: {rep.integrable}", f"  H1 (q > 2 exponential moment): {h1}",
              f"  H2 (diffusion, finite activity, integrable): {h2}", f"  E exp(X) finite: {moment}"]
    _emit(args, payload, "\n".join(lines))
    if cfg.option is not None and not moment:
        print("error: option pricing needs E exp(X_T) < inf", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_gap(args):
    cfg = _load(args)
    n = args.n if args.n is not None else (cfg.option.n if cfg.option else cfg.study.n_list[-1])
    t = cfg.study.t
    if cfg.study.engine == "spitzer":
        gv = gap_mean(cfg.model, t, n, FINE)
        payload = {"n": gv.n, "gap": gv.gap, "error_budget": gv.error_budget, "method": gv.method}
        text = f"n={gv.n} gap={gv.gap!r} error_budget={gv.error_budget!r} method={gv.method}"
    else:
        mc = cfg.study.monte_carlo()
        batch = supremum_batch(cfg.model, t, [n], mc.paths, RngStreamSpec(mc.seed),
                               refine_factor=mc.refine_factor, workers=mc.workers)
        d = batch.continuous_max - batch.discrete_max[n]
        gap, se = float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size))
        method = "mc:" + batch.exactness
        payload = {"n": n, "gap": gap, "gap_se": se, "bias_bound": batch.bias_bound,
                   "method": method, "seed": mc.seed}
        text = f"n={n} gap={gap!r} se={se!r} method={method} seed={mc.seed}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_rate(args):
    cfg = _load(args)
    st = cfg.study
    curve = run_gap_study(cfg.model, st.t, st.n_list, st.engine, st.monte_carlo(), cfg.model_id)
    pred = classify_rate(cfg.model, st.t)
    fit = fit_rate(curve, with_log_factor=pred.order == "log_n_over_n")
    rep = verify_prediction(curve, pred, st.tolerances)
    csv_text = to_csv(GAP_HEADER, gap_rows(curve, "rate"))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    payload = {
        "rows": [dict(zip(GAP_HEADER, r)) for r in gap_rows(curve, "rate")],
        "entries": [asdict(e) for e in curve.entries],
        "fit": asdict(fit),
        "prediction": asdict(pred),
        "checks": [asdict(c) for c in rep.checks],
        "passed": rep.passed,
    }
    lines = [csv_text.rstrip("\n"),
             f"fit: slope={fit.slope!r} intercept={fit.intercept!r} r2={fit.r2!r}",
             f"prediction: order={pred.order} source={pred.source} coefficient={pred.leading_coefficient!r}"]
    lines += [f"check {c.name}: value={c.value!r} target={c.target!r} {'PASS' if c.passed else 'FAIL'}"
              for c in rep.checks]
    _emit(args, payload, "\n".join(lines))
    if args.assert_ and not rep.passed:
        raise _AssertFailed("rate prediction check failed")
    return EXIT_OK


def cmd_price(args):
    cfg = _load(args)
    _require_option(cfg)
    spec = cfg.option if args.n is None else replace(cfg.option, n=args.n)
    sample = simulate_extrema(spec, cfg.model, cfg.market, cfg.study.monte_carlo(),
                              fine=not cfg.model.finite_activity)
    which = "continuous" if args.monitoring == "continuous" else spec.n
    est = sample.price(which)
    _emit(args, asdict(est), f"{est.monitoring}: price={est.mean!r} se={est.stderr!r} "
                             f"paths={est.paths} seed={est.seed} bias_bound={est.bias_bound!r}")
    return EXIT_OK


def cmd_correct(args):
    cfg = _load(args)
    _require_option(cfg)
    spec = cfg.option if args.n is None else replace(cfg.option, n=args.n)
    sample = simulate_extrema(spec, cfg.model, cfg.market, cfg.study.monte_carlo(),
                              fine=not cfg.model.finite_activity)
    vc, vc_se = sample.estimate("continuous")
    vn, vn_se = sample.estimate(spec.n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        d = correct_discrete_from_continuous(
            spec, lambda e, k: sample.estimate("continuous", e, k)[0], cfg.market, cfg.model.sigma,
            spec.n, model=cfg.model)
        c = correct_continuous_from_discrete(
            spec, lambda e, k: sample.estimate(spec.n, e, k)[0], cfg.market, cfg.model.sigma,
            spec.n, model=cfg.model)
    payload = {
        "n": spec.n,
        "v_discrete": vn, "v_discrete_se": vn_se,
        "v_continuous": vc, "v_continuous_se": vc_se,
        "discrete_from_continuous": d.value,
        "continuous_from_discrete": c.value,
        "supported": d.supported, "reason": d.reason,
    }
    text = "\n".join([
        f"n={spec.n}",
        f"V_n (simulated)            = {vn!r} (se {vn_se!r})",
        f"V   (simulated)            = {vc!r} (se {vc_se!r})",
        f"V_n from V (corrected)     = {d.value!r}",
        f"V from V_n (corrected)     = {c.value!r}",
    ])
    _emit(args, payload, text)
    if not d.supported:
        print(f"error: correction outside its hypotheses: {d.reason}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_study(args):
    cfg = _load(args)
    _require_option(cfg)
    ok, reason = correction_hypotheses(cfg.option, cfg.model)
    if not ok:
        raise HypothesisFailure(f"correction outside its hypotheses: {reason}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        rows = run_correction_study(cfg.option, cfg.model, cfg.market, cfg.study.n_list,
                                    cfg.study.monte_carlo())
    csv_text = to_csv(CORRECTION_HEADER, correction_rows(rows))
    out = args.out or cfg.output
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    passed = all(r.corr_err < r.raw_err for r in rows)
    payload = {"rows": [dict(zip(CORRECTION_HEADER, r)) for r in correction_rows(rows)],
               "values": [asdict(r) for r in rows], "passed": passed}
    _emit(args, payload, csv_text.rstrip("\n"))
    if args.assert_ and not passed:
        raise _AssertFailed("corrected price not closer than the continuous price at every n")
    return EXIT_OK


# --------------------------------------------------------------------------
# dispatch


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--paths", type=int)
    common.add_argument("--n", type=int, help="monitoring dates (overrides the config)")
    common.add_argument("--engine", choices=("spitzer", "mc"))
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--assert", dest="assert_", action="store_true",
                        help="exit 5 when the study's check fails")

    p = argparse.ArgumentParser(prog="levygap", description="Discrete monitoring bias of Levy suprema.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="model class and hypothesis flags")
    sub.add_parser("gap", parents=[common], help="E(M_t - M_t^n) for one n")
    sub.add_parser("rate", parents=[common], help="gap curve, rate fit and prediction check")
    pp = sub.add_parser("price", parents=[common], help="Monte Carlo option price")
    pp.add_argument("--monitoring", choices=("discrete", "continuous"), default="discrete")
    sub.add_parser("correct", parents=[common], help="continuity corrections in both directions")
    sub.add_parser("study", parents=[common], help="correction study CSV")
    pz = sub.add_parser("zeta", parents=[common], help="zeta(s) on (0, 1) and beta1")
    pz.add_argument("--s", type=float, default=0.5)
    return p


COMMANDS = {
    "zeta": cmd_zeta,
    "validate": cmd_validate,
    "gap": cmd_gap,
    "rate": cmd_rate,
    "price": cmd_price,
    "correct": cmd_correct,
    "study": cmd_study,
}


def _fail(args, code, exc):
    print(f"error: {exc}", file=sys.stderr)
    if getattr(args, "json", False):
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except _AssertFailed as exc:
        return _fail(args, EXIT_ASSERT, exc)
    except (HypothesisFailure, MomentFailure, UnsupportedClass, NotIntegrable) as exc:
        return _fail(args, EXIT_HYPOTHESIS, exc)
    except (QuadratureFailure, DegenerateInput) as exc:
        return _fail(args, EXIT_NUMERICAL, exc)
    except (ConfigError, DomainError, ValueError) as exc:
        return _fail(args, EXIT_CONFIG, exc)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
