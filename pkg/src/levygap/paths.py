"""Monte Carlo paths: grid skeletons and continuous suprema.

Finite-activity models get an exact continuous supremum: jump times are
drawn on [0, t], the Brownian part is bridged to them, and on every piece
without jumps the maximum of a Brownian bridge is sampled by inverse
transform. Infinite-activity models fall back to a fine grid whose bias is
reported alongside.

All samplers are vectorised over a block of ``rng.BLOCK`` paths; the
``simulate_*`` helpers return a single path and the ``*_batch`` functions
a whole run.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, UnsupportedClass
from .levy import CompoundPoisson, LevyModel, NoJumps, Stable, VarianceGamma
from .rng import BLOCK, RngStreamSpec, blocks_for


@dataclass(frozen=True)
class PathGrid:
    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class SupremumSample:
    terminal: float
    discrete_max: float
    continuous_max: Optional[float] = None
    continuous_min: Optional[float] = None
    exactness: str = "exact"


@dataclass
class SupremumBatch:
    """Arrays over paths. ``discrete_max[n]`` is the n-point grid maximum."""

    terminal: np.ndarray
    discrete_max: dict
    continuous_max: np.ndarray
    exactness: str
    bias_bound: float = 0.0
    continuous_min: Optional[np.ndarray] = None
    discrete_min: dict = field(default_factory=dict)

    @property
    def paths(self):
        return self.terminal.size


# --------------------------------------------------------------------------
# bridge maxima


def bridge_max(x, y, var, u):
    """Maximum of a Brownian bridge from ``x`` to ``y`` with total variance ``var``.

    ``u`` is a uniform draw on (0, 1); ``u -> 1`` gives ``max(x, y)``.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr <= 0) | (u_arr >= 1)):
        raise DomainError("u must lie in (0, 1)")
    if np.any(np.asarray(var) <= 0):
        raise DomainError("bridge variance must be positive")
    out = _bridge_max(np.asarray(x, float), np.asarray(y, float), np.asarray(var, float),
                      np.log(u_arr))
    return out if out.ndim else float(out)


def _bridge_max(x, y, var, log_u):
    # P(max > m) = exp(-2 (m - x)(m - y) / var); var = 0 gives max(x, y)
    d = x - y
    return 0.5 * (x + y + np.sqrt(d * d - 2.0 * var * log_u))


def _log_uniform(gen, shape):
    # log of a uniform on (0, 1]: never -inf, and 0 gives the no-excursion case
    return np.log1p(-gen.random(shape))


# --------------------------------------------------------------------------
# increments for every model


def _increments(model: LevyModel, dt: float, shape, gen: np.random.Generator, sub=None, stab=None):
    """Increments of X over time ``dt`` (exact in law)."""
    j = model.jumps
    z = gen.standard_normal(shape)
    if isinstance(j, (NoJumps, CompoundPoisson)):
        out = model.gamma0 * dt + model.sigma * math.sqrt(dt) * z
        if isinstance(j, CompoundPoisson):
            counts = gen.poisson(j.rate * dt, shape)
            tot = int(counts.sum())
            sizes = j.law.quantile(gen.random(tot))
            flat = np.zeros(int(np.prod(shape)))
            np.add.at(flat, np.repeat(np.arange(flat.size), counts.ravel()), sizes)
            out = out + flat.reshape(shape)
        return out
    if isinstance(j, VarianceGamma):
        sub = sub or gen
        g = sub.gamma(dt / j.vg_nu, j.vg_nu, shape)
        z2 = sub.standard_normal(shape)
        out = model.gamma0 * dt + j.theta * g + j.vg_sigma * np.sqrt(g) * z2
        if model.sigma > 0:
            out = out + model.sigma * math.sqrt(dt) * z
        return out
    if isinstance(j, Stable):
        stab = stab or gen
        y = _stable_unit(j.alpha, j.skew, stab, shape)
        out = model.mean * dt + j.scale * dt ** (1 / j.alpha) * y
        if model.sigma > 0:
            out = out + model.sigma * math.sqrt(dt) * z
        return out
    raise UnsupportedClass(type(j).__name__)


def _stable_unit(alpha, skew, gen, shape):
    """Strictly stable draws with unit scale (Chambers–Mallows–Stuck)."""
    v = math.pi * (gen.random(shape) - 0.5)
    w = -np.log1p(-gen.random(shape))
    tan = math.tan(math.pi * alpha / 2)
    b = math.atan(skew * tan) / alpha
    s = (1 + (skew * tan) ** 2) ** (1 / (2 * alpha))
    av = alpha * (v + b)
    return s * np.sin(av) / np.cos(v) ** (1 / alpha) * (np.cos(v - av) / w) ** ((1 - alpha) / alpha)


def sample_increment(model: LevyModel, dt: float, stream: RngStreamSpec, size=None, block=0):
    """Draws of X_dt from the ``increment`` purpose of ``stream``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    gen = stream.generator("increment", block)
    shape = () if size is None else size
    out = _increments(model, dt, shape if shape != () else (1,), gen)
    return float(out[0]) if size is None else out


# --------------------------------------------------------------------------
# block simulators


def _grid_values(model, t, n, stream, block):
    """Grid values (BLOCK, n+1) plus the jump bookkeeping needed for bridging."""
    dt = t / n
    j = model.jumps
    if not model.finite_activity:
        shape = (BLOCK, n)
        gen = stream.generator("diffusion", block)
        sub = stream.generator("subordinator", block)
        stab = stream.generator("stable", block)
        inc = _increments(model, dt, shape, gen, sub=sub, stab=stab)
        vals = np.zeros((BLOCK, n + 1))
        np.cumsum(inc, axis=1, out=vals[:, 1:])
        return vals, None
    z = stream.generator("diffusion", block).standard_normal((BLOCK, n))
    cont = np.zeros((BLOCK, n + 1))
    np.cumsum(model.gamma0 * dt + model.sigma * math.sqrt(dt) * z, axis=1, out=cont[:, 1:])
    if not isinstance(j, CompoundPoisson):
        return cont, (cont, None)
    gen = stream.generator("jumps", block)
    counts = gen.poisson(j.rate * t, BLOCK)
    tot = int(counts.sum())
    times = gen.random(tot) * t
    sizes = j.law.quantile(gen.random(tot))
    path = np.repeat(np.arange(BLOCK), counts)
    order = np.lexsort((times, path))
    times, sizes, path = times[order], sizes[order], path[order]
    interval = np.minimum((times / dt).astype(np.int64), n - 1)
    jinc = np.zeros((BLOCK, n))
    np.add.at(jinc, (path, interval), sizes)
    jgrid = np.zeros((BLOCK, n + 1))
    np.cumsum(jinc, axis=1, out=jgrid[:, 1:])
    return cont + jgrid, (cont, (times, sizes, path, interval, jgrid))


def _segment_extremes(model, t, n, stream, block, vals, aux, sign):
    """Per-interval maxima (sign=+1) or minima (sign=-1) of the exact path."""
    dt = t / n
    var = model.sigma**2 * dt
    kind = "bridge_max" if sign > 0 else "bridge_min"
    log_u = _log_uniform(stream.generator(kind, block), (BLOCK, n))
    x, y = sign * vals[:, :-1], sign * vals[:, 1:]
    seg = _bridge_max(x, y, var, log_u)
    cont, jumps = aux
    if jumps is None or jumps[0].size == 0:
        return sign * seg
    times, sizes, path, interval, jgrid = jumps
    tot = times.size
    sig2 = model.sigma**2
    # group = (path, interval); jumps are sorted by path then time
    group = path * n + interval
    starts = np.r_[0, np.flatnonzero(np.diff(group)) + 1]
    gsize = np.diff(np.r_[starts, tot])
    rank = np.arange(tot) - np.repeat(starts, gsize)
    # continuous part at the jump times, bridged sequentially within each interval
    zb = stream.generator("bridge_interior", block).standard_normal(tot)
    c_at = np.empty(tot)
    b_time = (interval + 1) * dt
    c_right = cont[path, interval + 1]
    prev_t = interval * dt
    prev_c = cont[path, interval].copy()
    for r in range(int(gsize.max())):
        idx = np.flatnonzero(rank == r)
        pt, pc = prev_t[idx], prev_c[idx]
        tau, bt = times[idx], b_time[idx]
        span = np.maximum(bt - pt, 1e-300)
        w = (tau - pt) / span
        mean = pc + w * (c_right[idx] - pc)
        sd = np.sqrt(np.maximum(sig2 * (tau - pt) * (bt - tau) / span, 0.0))
        c_at[idx] = mean + sd * zb[idx]
        nxt = idx[rank[idx] + 1 < np.repeat(gsize, gsize)[idx]] + 1
        prev_t[nxt] = times[nxt - 1]
        prev_c[nxt] = c_at[nxt - 1]
    # pieces ending at each jump (left limit), then the final piece of each group
    seg_start_t = np.where(rank == 0, interval * dt, np.r_[0.0, times[:-1]])
    seg_start_c = np.where(rank == 0, cont[path, interval], np.r_[0.0, c_at[:-1]])
    csum = np.cumsum(sizes)
    before = csum - sizes - np.repeat(csum[starts] - sizes[starts], gsize)
    level = jgrid[path, interval] + before
    log_uj = _log_uniform(stream.generator(kind + "_jump", block), tot)
    piece = _bridge_max(sign * (level + seg_start_c), sign * (level + c_at),
                        sig2 * (times - seg_start_t), log_uj)
    last = starts + gsize - 1
    gp, gi = path[starts], interval[starts]
    final = _bridge_max(sign * (jgrid[gp, gi + 1] + c_at[last]), sign * vals[gp, gi + 1],
                        sig2 * (b_time[last] - times[last]), log_u[gp, gi])
    gmax = np.maximum.reduceat(piece, starts)
    seg[gp, gi] = np.maximum(gmax, final)
    return sign * seg


def _check_n_list(n_list):
    n_list = sorted({int(n) for n in n_list})
    if n_list[0] < 1:
        raise ValueError("n must be >= 1")
    top = n_list[-1]
    if any(top % n for n in n_list):
        raise ValueError("every n must divide the largest n")
    return n_list, top


def _block_exact(model, t, n_list, stream, block, want_min):
    n_list, top = _check_n_list(n_list)
    vals, aux = _grid_values(model, t, top, stream, block)
    seg = _segment_extremes(model, t, top, stream, block, vals, aux, +1)
    out = {
        "terminal": vals[:, -1].copy(),
        "cmax": np.maximum(seg.max(axis=1), 0.0),
        "dmax": {n: vals[:, :: top // n].max(axis=1) for n in n_list},
    }
    if want_min:
        segm = _segment_extremes(model, t, top, stream, block, vals, aux, -1)
        out["cmin"] = np.minimum(segm.min(axis=1), 0.0)
        out["dmin"] = {n: vals[:, :: top // n].min(axis=1) for n in n_list}
    return out


def _block_fine(model, t, n_list, refine, stream, block, want_min):
    n_list, top = _check_n_list(n_list)
    fine = top * refine
    vals, _ = _grid_values(model, t, fine, stream, block)
    out = {
        "terminal": vals[:, -1].copy(),
        "cmax": vals.max(axis=1),
        "dmax": {n: vals[:, :: fine // n].max(axis=1) for n in n_list},
    }
    if want_min:
        out["cmin"] = vals.min(axis=1)
        out["dmin"] = {n: vals[:, :: fine // n].min(axis=1) for n in n_list}
    return out


def _run_blocks(fn, paths, workers):
    plan = blocks_for(paths)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda br: fn(br[0]), plan))
    else:
        parts = [fn(b) for b, _ in plan]
    rows = [r for _, r in plan]

    def cat(key, sub=None):
        if sub is None:
            return np.concatenate([p[key][:r] for p, r in zip(parts, rows)])
        return np.concatenate([p[key][sub][:r] for p, r in zip(parts, rows)])

    return parts, cat


def _fine_bias_bound(model, t, fine):
    # bias of the fine maximum: the rate prediction at the fine count, or the
    # computed gap itself when no coefficient is available
    from .asymptotics import classify_rate
    from .spitzer import gap_mean

    pred = classify_rate(model, t)
    val = pred.predicted_gap(fine)
    if val is None or not math.isfinite(val):
        val = gap_mean(model, t, fine).gap
    return abs(float(val))


def supremum_batch(model: LevyModel, t: float, n_list, paths: int, stream: RngStreamSpec,
                   refine_factor: int = 16, want_min: bool = False, workers: int = 1,
                   force_fine: bool = False) -> SupremumBatch:
    """Terminal values, nested grid maxima and the continuous maximum over ``paths`` paths."""
    n_list = list(n_list) if np.ndim(n_list) else [int(n_list)]
    if model.finite_activity and not force_fine:
        fn = lambda b: _block_exact(model, t, n_list, stream, b, want_min)
        exact, bias = "exact", 0.0
    else:
        if refine_factor < 2:
            raise ValueError("refine_factor must be >= 2")
        fn = lambda b: _block_fine(model, t, n_list, refine_factor, stream, b, want_min)
        exact = "fine_grid_biased"
        bias = _fine_bias_bound(model, t, max(n_list) * refine_factor)
    parts, cat = _run_blocks(fn, paths, workers)
    n_sorted = sorted({int(n) for n in n_list})
    batch = SupremumBatch(
        terminal=cat("terminal"),
        discrete_max={n: cat("dmax", n) for n in n_sorted},
        continuous_max=cat("cmax"),
        exactness=exact,
        bias_bound=bias,
    )
    if want_min:
        batch.continuous_min = cat("cmin")
        batch.discrete_min = {n: cat("dmin", n) for n in n_sorted}
    return batch


def grid_batch(model, t, n, paths, stream, workers=1):
    """Grid maxima and terminal values only (no bridge sampling)."""
    def fn(b):
        vals, _ = _grid_values(model, t, n, stream, b)
        return {"terminal": vals[:, -1].copy(), "dmax": vals.max(axis=1)}

    parts, cat = _run_blocks(fn, paths, workers)
    return cat("terminal"), cat("dmax")


# --------------------------------------------------------------------------
# single-path views


def simulate_grid(model: LevyModel, t: float, n: int, stream: RngStreamSpec,
                  path_index: int = 0) -> PathGrid:
    if n < 1:
        raise ValueError("n must be >= 1")
    block, row = divmod(int(path_index), BLOCK)
    vals, _ = _grid_values(model, t, n, stream, block)
    return PathGrid(times=np.linspace(0.0, t, n + 1), values=vals[row].copy())


def simulate_jd_supremum(model: LevyModel, t: float, n: int, stream: RngStreamSpec,
                         path_index: int = 0) -> SupremumSample:
    if not model.finite_activity:
        raise UnsupportedClass("exact supremum needs finite activity")
    block, row = divmod(int(path_index), BLOCK)
    out = _block_exact(model, t, [n], stream, block, want_min=True)
    return SupremumSample(
        terminal=float(out["terminal"][row]),
        discrete_max=float(out["dmax"][n][row]),
        continuous_max=float(out["cmax"][row]),
        continuous_min=float(out["cmin"][row]),
        exactness="exact",
    )


def fine_grid_supremum(model: LevyModel, t: float, n_coarse: int, refine_factor: int,
                       stream: RngStreamSpec, path_index: int = 0) -> SupremumSample:
    if refine_factor < 2:
        raise ValueError("refine_factor must be >= 2")
    block, row = divmod(int(path_index), BLOCK)
    out = _block_fine(model, t, [n_coarse], refine_factor, stream, block, want_min=True)
    return SupremumSample(
        terminal=float(out["terminal"][row]),
        discrete_max=float(out["dmax"][n_coarse][row]),
        continuous_max=float(out["cmax"][row]),
        continuous_min=float(out["cmin"][row]),
        exactness="fine_grid_biased",
    )


def fine_grid_bias_bound(model, t, n_coarse, refine_factor):
    return _fine_bias_bound(model, t, n_coarse * refine_factor)
