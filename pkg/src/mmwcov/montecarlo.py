"""Vectorized Monte Carlo trial engine.

Trials are processed in fixed-size chunks; chunk ``i`` draws from an
independent counter-based stream derived from the master seed, so results
are bit-identical for any worker count.  All cross-chunk accumulation is in
integer counts (or ordered concatenation), which makes the reduction exact
and order-independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, angular_offset
from .radio import NetworkParams, gain_3gpp, gain_approx, sample_fading

__all__ = [
    "SimPlan",
    "CoverageCurve",
    "PowerCcdf",
    "Histogram",
    "ConditioningError",
    "STATISTICS",
    "run_coverage",
    "run_power_ccdf",
    "run_histogram",
    "sample_statistic",
    "sample_conditioned_interference",
]

CHUNK_TRIALS = 4096

STATISTICS = ("phi_c", "S", "G_ratio_p2", "W_ratio_p2", "G_p3", "W_p3", "varphi12",
               "SIR_dom_p2", "SIR_dom_p3")

_POLICIES = ("P1", "P2", "P3")


class ConditioningError(RuntimeError):
    """Raised when a conditioned statistic accepts too few samples to be useful."""


@dataclass(frozen=True)
class SimPlan:
    """Everything needed to reproduce one simulation run."""

    params: NetworkParams
    policy: str
    thresholds_db: tuple
    n_trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.policy not in _POLICIES:
            raise ValueError(f"policy must be one of {_POLICIES}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        th = tuple(float(x) for x in self.thresholds_db)
        if len(th) > 1 and any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds_db", th)
        object.__setattr__(self, "master_seed", int(self.master_seed))


@dataclass(frozen=True)
class CoverageCurve:
    thresholds_db: np.ndarray
    p_cov: np.ndarray
    stderr: np.ndarray
    n: int
    engine: str
    policy: str

    def rows(self):
        for g, p, s in zip(self.thresholds_db, self.p_cov, self.stderr):
            yield (float(g), float(p), float(s), self.n, self.engine, self.policy)


@dataclass(frozen=True)
class PowerCcdf:
    levels: np.ndarray          # linear normalized power thresholds
    ccdf: np.ndarray
    stderr: np.ndarray
    n: int
    engine: str
    policy: str


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram of a (possibly conditioned) per-trial statistic."""

    edges: tuple
    density: np.ndarray
    n_samples: int
    n_trials: int
    acceptance: float
    conditioning: str


def _chunk_rng(master_seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=master_seed).jumped(chunk_index))


def _chunk_sizes(n_trials: int):
    n_chunks = math.ceil(n_trials / CHUNK_TRIALS)
    return [CHUNK_TRIALS] * (n_chunks - 1) + [n_trials - CHUNK_TRIALS * (n_chunks - 1)]


def _map_chunks(fn, n_trials: int, n_workers: int):
    """Apply ``fn(chunk_index, chunk_size)`` to every chunk, results in index order."""
    sizes = _chunk_sizes(n_trials)
    if n_workers <= 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def _sample_batch(params: NetworkParams, n: int, rng: np.random.Generator):
    """Sample ``n`` nonempty fields; returns segment bookkeeping plus flat arrays."""
    mean = params.mean_count
    counts = rng.poisson(mean, n)
    empty = counts == 0
    guard = 0
    while empty.any():
        counts[empty] = rng.poisson(mean, int(empty.sum()))
        empty = counts == 0
        guard += 1
        if guard > 10**6:
            raise RuntimeError("field resampling failed to terminate")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    seg = np.repeat(np.arange(n), counts)
    total = int(counts.sum())
    r = params.r_los * np.sqrt(rng.random(total))
    phi = TWO_PI * rng.random(total)
    return counts, starts, seg, r, phi


def _policy_chunk(params: NetworkParams, policy: str, n: int, rng: np.random.Generator):
    """Simulate ``n`` trials of one policy; returns per-trial arrays."""
    cfg, ch = params.antenna, params.channel
    counts, starts, seg, r, phi = _sample_batch(params, n, rng)
    h_s = sample_fading(ch.m_s, rng, size=n)
    h_x = sample_fading(ch.m_x, rng, size=r.size)

    rpow = r ** (-ch.alpha_l)
    step = cfg.beam_spacing
    t = (phi - 0.5 * step) % step
    off = np.minimum(t, step - t)          # offset to the nearest beam maximum

    out = {"counts": counts}
    if policy == "P1":
        key = gain_approx(off, cfg) * rpow
        win = np.lexsort((phi, r, -key, seg))[starts]
        beam = np.rint((phi[win] - 0.5 * step) / step).astype(int) % cfg.n_beams
        ref = 0.5 * step + beam * step
        g_serve = gain_approx(off[win], cfg)
        out["s_norm"] = key[win]
    elif policy == "P2":
        win = np.lexsort((phi, r, off, seg))[starts]
        ref = phi[win]
        g_serve = gain_approx(off[win], cfg)
        out["phi_c"] = off[win]
    elif policy == "P3":
        win = np.lexsort((phi, r, seg))[starts]
        ref = phi[win]
        g_serve = np.full(n, cfg.g_max)
        out["s_norm"] = cfg.g_max * rpow[win]
    else:
        raise ValueError(f"unknown policy {policy!r}")

    gains = gain_3gpp(angular_offset(ref[seg], phi), cfg)
    term = h_x * gains * rpow
    inter_norm = np.add.reduceat(term, starts) - term[win]
    pk = ch.tx_power_w * ch.path_gain_const * cfg.g_max
    out["interference_w"] = pk * inter_norm
    out["signal_w"] = pk * g_serve * h_s * rpow[win]
    out["sinr"] = out["signal_w"] / (out["interference_w"] + ch.noise_w)
    out["serving_r"] = r[win]
    out["serving_offset"] = off[win]
    return out


def run_coverage(plan: SimPlan, n_workers: int = 1) -> CoverageCurve:
    """Empirical coverage probability over the plan's threshold grid."""
    gammas_db = np.asarray(plan.thresholds_db, dtype=float)
    gammas = np.where(np.isneginf(gammas_db), 0.0, 10.0 ** (gammas_db / 10.0))

    def work(ci, size):
        sinr = _policy_chunk(plan.params, plan.policy, size, _chunk_rng(plan.master_seed, ci))["sinr"]
        return (sinr[:, None] > gammas[None, :]).sum(axis=0)

    counts = sum(_map_chunks(work, plan.n_trials, n_workers))
    p = counts / plan.n_trials
    stderr = np.sqrt(p * (1.0 - p) / plan.n_trials)
    return CoverageCurve(thresholds_db=gammas_db, p_cov=p, stderr=stderr,
                         n=plan.n_trials, engine="mc", policy=plan.policy)


def default_power_levels(params: NetworkParams, n: int = 41) -> np.ndarray:
    """Log-spaced normalized power thresholds bracketing the serving-power law."""
    w_min = params.antenna.g_3db * params.r_los ** (-params.channel.alpha_l)
    lo_db = 10.0 * math.log10(w_min) - 5.0
    return 10.0 ** (np.linspace(lo_db, lo_db + 45.0, n) / 10.0)


def run_power_ccdf(plan: SimPlan, policy: str | None = None, levels=None,
                   n_workers: int = 1) -> PowerCcdf:
    """Empirical ccdf of the normalized received power (path loss times
    receive gain, transmit constants stripped)."""
    policy = policy or plan.policy
    if policy == "P2":
        raise ValueError("received-power ccdf is defined for P1 and P3")
    levels = default_power_levels(plan.params) if levels is None else np.asarray(levels, dtype=float)

    def work(ci, size):
        s = _policy_chunk(plan.params, policy, size, _chunk_rng(plan.master_seed, ci))["s_norm"]
        return (s[:, None] > levels[None, :]).sum(axis=0)

    counts = sum(_map_chunks(work, plan.n_trials, n_workers))
    p = counts / plan.n_trials
    stderr = np.sqrt(p * (1.0 - p) / plan.n_trials)
    return PowerCcdf(levels=levels, ccdf=p, stderr=stderr, n=plan.n_trials,
                     engine="mc", policy=policy)


def _two_smallest(values, seg, starts, counts):
    """Per-segment indices of the two smallest values (segments with >= 2 points)."""
    order = np.lexsort((values, seg))
    ok = counts >= 2
    first = order[starts[ok]]
    second = order[starts[ok] + 1]
    return ok, first, second


def _stat_chunk(params: NetworkParams, statistic: str, n: int, rng: np.random.Generator):
    """Raw (possibly conditioned) samples of one statistic for ``n`` trials."""
    cfg, ch = params.antenna, params.channel

    if statistic == "W_ratio_p2":
        # Pure ratio model: i.i.d. disk radii and unit-mean gamma fades.
        d1 = params.r_los * np.sqrt(rng.random(n))
        d2 = params.r_los * np.sqrt(rng.random(n))
        h1 = sample_fading(ch.m_s, rng, size=n)
        h2 = sample_fading(ch.m_x, rng, size=n)
        return (h1 * d1 ** (-ch.alpha_l)) / (h2 * d2 ** (-ch.alpha_l)), n

    if statistic in ("phi_c", "S"):
        policy = "P2" if statistic == "phi_c" else "P1"
        out = _policy_chunk(params, policy, n, rng)
        return out["phi_c" if statistic == "phi_c" else "s_norm"], n

    counts, starts, seg, r, phi = _sample_batch(params, n, rng)

    if statistic in ("varphi12", "G_ratio_p2", "SIR_dom_p2"):
        offsets = angular_offset(phi, 0.0)
        ok, first, second = _two_smallest(offsets, seg, starts, counts)
        p1, p2 = offsets[first], offsets[second]
        if statistic == "varphi12":
            return np.column_stack([p1, p2]), n
        keep = p2 < cfg.phi_a          # implies p1 < phi_a as well
        gain_ratio = gain_approx(p1[keep], cfg) / gain_approx(p2[keep], cfg)
        if statistic == "G_ratio_p2":
            return gain_ratio, n
        h1 = sample_fading(ch.m_s, rng, size=int(ok.sum()))[keep]
        h2 = sample_fading(ch.m_x, rng, size=int(ok.sum()))[keep]
        w = (h1 * r[first][keep] ** (-ch.alpha_l)) / (h2 * r[second][keep] ** (-ch.alpha_l))
        return gain_ratio * w, n

    if statistic in ("G_p3", "W_p3", "SIR_dom_p3"):
        ok, first, second = _two_smallest(r, seg, starts, counts)
        if statistic == "W_p3":
            return (r[second] / r[first]) ** ch.alpha_l, n
        off2 = angular_offset(phi[first], phi[second])
        keep = off2 < cfg.phi_a
        h1 = sample_fading(ch.m_s, rng, size=int(ok.sum()))[keep]
        h2 = sample_fading(ch.m_x, rng, size=int(ok.sum()))[keep]
        g2 = gain_approx(off2[keep], cfg)
        gain_fade = cfg.g_max * h1 / (g2 * h2)
        if statistic == "G_p3":
            return gain_fade, n
        return gain_fade * (r[second][keep] / r[first][keep]) ** ch.alpha_l, n

    raise ValueError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")


_CONDITIONING = {
    "phi_c": "none",
    "S": "none",
    "W_ratio_p2": "none (model draws)",
    "varphi12": "at least two points in the disk",
    "G_ratio_p2": "two smallest angular offsets both inside the mainlobe",
    "SIR_dom_p2": "two smallest angular offsets both inside the mainlobe",
    "G_p3": "at least two points; interferer offset inside the mainlobe",
    "W_p3": "at least two points in the disk",
    "SIR_dom_p3": "at least two points; interferer offset inside the mainlobe",
}


def sample_statistic(plan: SimPlan, statistic: str, n_workers: int = 1):
    """Gather raw samples of ``statistic`` across all trials (chunk order)."""

    def work(ci, size):
        return _stat_chunk(plan.params, statistic, size, _chunk_rng(plan.master_seed, ci))

    parts = _map_chunks(work, plan.n_trials, n_workers)
    samples = np.concatenate([p[0] for p in parts])
    return samples, samples.shape[0] / plan.n_trials


def run_histogram(plan: SimPlan, statistic: str, bins=100, value_range=None,
                  n_workers: int = 1) -> Histogram:
    """Normalized histogram of a statistic, with conditioning bookkeeping."""
    samples, acceptance = sample_statistic(plan, statistic, n_workers=n_workers)
    if acceptance < 1e-4:
        raise ConditioningError(
            f"acceptance rate {acceptance:.2e} for {statistic!r} is too low; "
            "increase density, the disk radius, or the trial count")
    if samples.ndim == 2:
        density, ex, ey = np.histogram2d(samples[:, 0], samples[:, 1], bins=bins,
                                         range=value_range, density=True)
        edges = (ex, ey)
    else:
        density, ex = np.histogram(samples, bins=bins, range=value_range, density=True)
        edges = (ex,)
    return Histogram(edges=edges, density=density, n_samples=samples.shape[0],
                     n_trials=plan.n_trials, acceptance=acceptance,
                     conditioning=_CONDITIONING[statistic])


def sample_conditioned_interference(plan: SimPlan, center: float, rel_window: float,
                                    n_workers: int = 1):
    """Interference power samples (watts) conditioned on the policy's serving
    state lying within ``center * (1 +- rel_window)``.

    The conditioning variable is the normalized max power for P1, the serving
    angular distance for P2, and the serving distance for P3.
    """
    key = {"P1": "s_norm", "P2": "phi_c", "P3": "serving_r"}[plan.policy]

    def work(ci, size):
        out = _policy_chunk(plan.params, plan.policy, size, _chunk_rng(plan.master_seed, ci))
        cond = out[key]
        keep = np.abs(cond - center) <= rel_window * center
        return out["interference_w"][keep], size

    parts = _map_chunks(work, plan.n_trials, n_workers)
    samples = np.concatenate([p[0] for p in parts])
    if samples.size < 100:
        raise ConditioningError(
            f"only {samples.size} samples fell in the conditioning window")
    return samples, samples.size / plan.n_trials
