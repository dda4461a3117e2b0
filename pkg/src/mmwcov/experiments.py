"""Experiment orchestration: scenario definitions, config parsing, CSV/JSON output.

The config format is flat ``key = value`` text with dotted sections.  dB/dBm
quantities are converted to linear units here, at the boundary; every engine
exchanges linear units only.  Any key can also be overridden through the
environment as ``MMWCOV_<KEY>`` with dots replaced by double underscores
(e.g. ``MMWCOV_CHANNEL__ALPHA_L=2.2``).

Each scenario writes one CSV per engine with the fixed column schema
``(x, value, stderr, engine, policy)``; when a scenario sweeps extra
parameters the ``policy`` field carries the full curve key (e.g.
``P1;sectors_exp=2;density=8e-04``).  A JSON manifest accompanies every run
and embeds the fully resolved config, which re-validates to itself.
"""

from __future__ import annotations

import difflib
import json
import os
import sys
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .radio import AntennaConfig, ChannelParams, NetworkParams, dbm_to_watts, watts_to_dbm
from .montecarlo import SimPlan, default_power_levels, run_coverage, run_power_ccdf
from . import analytic, dominant

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "validate_config",
    "run_experiment",
    "SCENARIOS",
    "ENV_PREFIX",
]

ENV_PREFIX = "MMWCOV_"
SCENARIOS = ("fig4", "fig5", "fig6", "fig7", "fig8", "custom")
_ENGINES = ("mc", "analytic", "dominant")


class ConfigError(ValueError):
    """Config parse/validation failure with a line-anchored message."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment description."""

    scenario: str = "custom"
    params: NetworkParams = field(default_factory=NetworkParams)
    engines: tuple = ("mc", "analytic")
    policies: tuple = ("P1", "P3")
    seed: int = 20240
    trials: int = 200_000
    workers: int = 1
    out_dir: str = "out"
    strict: bool = False
    gamma_grid_db: tuple = (-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0)
    fig7_gamma_db: float = 3.0
    density_sweep: tuple = (4e-4, 8e-4, 1.6e-3)
    sector_sweep: tuple = (1, 2, 3)

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if not self.engines:
            raise ConfigError("at least one engine is required")
        for e in self.engines:
            if e not in _ENGINES:
                raise ConfigError(f"unknown engine {e!r}; expected a subset of {_ENGINES}")
        for p in self.policies:
            if p not in ("P1", "P2", "P3"):
                raise ConfigError(f"unknown policy {p!r}")
        if self.trials < 1:
            raise ConfigError("run.trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("run.workers must be at least 1")
        if len(self.gamma_grid_db) > 1 and any(
                b <= a for a, b in zip(self.gamma_grid_db, self.gamma_grid_db[1:])):
            raise ConfigError("grid.gamma_db must be strictly increasing")

    def to_flat(self) -> dict:
        """Canonical flat key/value form; the fixed point of validate_config."""
        ant, ch = self.params.antenna, self.params.channel
        return {
            "scenario": self.scenario,
            "network.density": repr(self.params.density),
            "antenna.g_max_db": repr(ant.g_max_db),
            "antenna.sla_db": repr(ant.sla_db),
            "antenna.sectors_exp": str(ant.sectors_exp),
            "antenna.phi_3db": repr(ant.phi_3db),
            "channel.alpha_l": repr(ch.alpha_l),
            "channel.f_c": repr(ch.f_c),
            "channel.m_s": str(ch.m_s),
            "channel.m_x": str(ch.m_x),
            "channel.r_los": repr(ch.r_los),
            "channel.tx_power_dbm": repr(float(watts_to_dbm(ch.tx_power_w))),
            "channel.noise_dbm": repr(float(watts_to_dbm(ch.noise_w))),
            "run.engines": ",".join(self.engines),
            "run.policies": ",".join(self.policies),
            "run.seed": str(self.seed),
            "run.trials": str(self.trials),
            "run.workers": str(self.workers),
            "run.out_dir": self.out_dir,
            "run.strict": "true" if self.strict else "false",
            "grid.gamma_db": ",".join(repr(g) for g in self.gamma_grid_db),
            "grid.fig7_gamma_db": repr(self.fig7_gamma_db),
            "sweep.density": ",".join(repr(d) for d in self.density_sweep),
            "sweep.sectors": ",".join(str(s) for s in self.sector_sweep),
        }


_KNOWN_KEYS = tuple(ExperimentConfig().to_flat().keys())


def _parse_value(key: str, raw: str, where: str):
    def err(msg):
        return ConfigError(f"{where}: {key} {msg}")

    try:
        if key in ("scenario", "run.out_dir"):
            return raw
        if key == "run.strict":
            low = raw.strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise err("must be a boolean (true/false)")
        if key in ("run.engines", "run.policies"):
            return tuple(part.strip().lower() if key == "run.engines" else part.strip().upper()
                         for part in raw.split(",") if part.strip())
        if key in ("grid.gamma_db", "sweep.density"):
            return tuple(float(part) for part in raw.split(",") if part.strip())
        if key == "sweep.sectors":
            return tuple(int(part) for part in raw.split(",") if part.strip())
        if key in ("antenna.sectors_exp", "channel.m_s", "channel.m_x",
                   "run.seed", "run.trials", "run.workers"):
            return int(raw)
        return float(raw)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise err(f"has an unparseable value {raw!r}") from None


def _read_pairs(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        yield f"line {lineno}", key, raw


def _env_pairs(environ):
    for name, raw in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower().replace("__", ".")
        yield f"env {name}", key, raw


def validate_config(source=None, strict: bool = False, environ=None) -> ExperimentConfig:
    """Parse and range-check a config file (or text), applying defaults.

    ``source`` may be a path, raw text containing a newline, or None (pure
    defaults).  Environment overrides are applied after the file.  Unknown
    keys raise in strict mode (with a spelling suggestion) and warn otherwise.
    """
    text = ""
    if source is not None:
        src = str(source)
        if "\n" in src or "=" in src and not os.path.exists(src):
            text = src
        else:
            path = Path(src)
            if not path.exists():
                raise ConfigError(f"config file {src!r} does not exist")
            text = path.read_text(encoding="utf-8")
    values: dict = {}
    pairs = list(_read_pairs(text))
    if environ is None:
        environ = os.environ
    pairs += list(_env_pairs(environ))

    locations: dict = {}
    for where, key, raw in pairs:
        if key not in _KNOWN_KEYS:
            suggestion = difflib.get_close_matches(key, _KNOWN_KEYS, n=1, cutoff=0.4)
            hint = f"; did you mean {suggestion[0]!r}?" if suggestion else ""
            message = f"{where}: unknown key {key!r}{hint}"
            if strict or values.get("run.strict", False):
                raise ConfigError(message)
            warnings.warn(message, stacklevel=2)
            continue
        values[key] = _parse_value(key, raw, where)
        locations[key] = where

    def rng_check(key, ok, msg):
        if key in values and not ok(values[key]):
            raise ConfigError(f"{locations[key]}: {key} {msg} (got {values[key]!r})")

    rng_check("network.density", lambda v: v > 0, "must be positive")
    rng_check("channel.alpha_l", lambda v: v > 0, "must be positive")
    rng_check("channel.r_los", lambda v: v > 0, "must be positive")
    rng_check("channel.f_c", lambda v: v > 0, "must be positive")
    rng_check("antenna.sectors_exp", lambda v: 0 <= v <= 8, "must lie in [0, 8]")
    rng_check("antenna.sla_db", lambda v: v > 0, "must be positive")
    rng_check("channel.m_s", lambda v: v >= 1, "must be at least 1")
    rng_check("channel.m_x", lambda v: v >= 1, "must be at least 1")
    rng_check("run.trials", lambda v: v >= 1, "must be at least 1")
    rng_check("run.workers", lambda v: v >= 1, "must be at least 1")

    base = ExperimentConfig()
    antenna_kwargs = dict(
        g_max_db=values.get("antenna.g_max_db", base.params.antenna.g_max_db),
        sla_db=values.get("antenna.sla_db", base.params.antenna.sla_db),
        sectors_exp=values.get("antenna.sectors_exp", base.params.antenna.sectors_exp),
    )
    if "antenna.phi_3db" in values:
        antenna_kwargs["phi_3db"] = values["antenna.phi_3db"]
    channel = ChannelParams(
        alpha_l=values.get("channel.alpha_l", base.params.channel.alpha_l),
        f_c=values.get("channel.f_c", base.params.channel.f_c),
        m_s=values.get("channel.m_s", base.params.channel.m_s),
        m_x=values.get("channel.m_x", base.params.channel.m_x),
        r_los=values.get("channel.r_los", base.params.channel.r_los),
        tx_power_w=float(dbm_to_watts(values["channel.tx_power_dbm"]))
        if "channel.tx_power_dbm" in values else base.params.channel.tx_power_w,
        noise_w=float(dbm_to_watts(values["channel.noise_dbm"]))
        if "channel.noise_dbm" in values else base.params.channel.noise_w,
    )
    params = NetworkParams(
        density=values.get("network.density", base.params.density),
        antenna=AntennaConfig(**antenna_kwargs),
        channel=channel,
    )
    return ExperimentConfig(
        scenario=values.get("scenario", base.scenario),
        params=params,
        engines=values.get("run.engines", base.engines),
        policies=values.get("run.policies", base.policies),
        seed=values.get("run.seed", base.seed),
        trials=values.get("run.trials", base.trials),
        workers=values.get("run.workers", base.workers),
        out_dir=values.get("run.out_dir", base.out_dir),
        strict=values.get("run.strict", strict),
        gamma_grid_db=values.get("grid.gamma_db", base.gamma_grid_db),
        fig7_gamma_db=values.get("grid.fig7_gamma_db", base.fig7_gamma_db),
        density_sweep=values.get("sweep.density", base.density_sweep),
        sector_sweep=values.get("sweep.sectors", base.sector_sweep),
    )


# ---------------------------------------------------------------------------
# Scenario runners
# ---------------------------------------------------------------------------


def _curve_key(policy: str, **labels) -> str:
    parts = [policy] + [f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                        for k, v in labels.items()]
    return ";".join(parts)


def _with(params: NetworkParams, density=None, sectors_exp=None) -> NetworkParams:
    out = params
    if density is not None:
        out = replace(out, density=density)
    if sectors_exp is not None:
        out = replace(out, antenna=replace(out.antenna, sectors_exp=sectors_exp, phi_3db=None))
    return out


def _scenario_fig4(config: ExperimentConfig, rows: dict) -> None:
    for density in config.density_sweep:
        params = _with(config.params, density=density)
        levels = default_power_levels(params)
        levels_db = 10.0 * np.log10(levels)
        for policy in ("P1", "P3"):
            key = _curve_key(policy, density=density)
            if "mc" in config.engines:
                plan = SimPlan(params=params, policy=policy, thresholds_db=(0.0,),
                               n_trials=config.trials, master_seed=config.seed)
                curve = run_power_ccdf(plan, policy=policy, levels=levels,
                                       n_workers=config.workers)
                rows["mc"] += [(x, v, s, "mc", key) for x, v, s
                               in zip(levels_db, curve.ccdf, curve.stderr)]
            if "analytic" in config.engines:
                if policy == "P1":
                    vals = analytic.serving_power_ccdf(levels, params, conditioned=True)
                else:
                    vals = analytic.nearest_power_ccdf(levels, params, conditioned=True)
                rows["analytic"] += [(x, v, 0.0, "analytic", key)
                                     for x, v in zip(levels_db, vals)]


def _coverage_rows(config: ExperimentConfig, rows: dict, policies, sectors) -> None:
    for m in sectors:
        params = _with(config.params, sectors_exp=m)
        for policy in policies:
            key = _curve_key(policy, sectors_exp=m)
            if "mc" in config.engines:
                plan = SimPlan(params=params, policy=policy,
                               thresholds_db=config.gamma_grid_db,
                               n_trials=config.trials, master_seed=config.seed)
                curve = run_coverage(plan, n_workers=config.workers)
                rows["mc"] += [(x, v, s, "mc", key) for x, v, s
                               in zip(curve.thresholds_db, curve.p_cov, curve.stderr)]
            if "analytic" in config.engines:
                fn = {"P1": analytic.coverage_p1, "P2": analytic.coverage_p2,
                      "P3": analytic.coverage_p3}[policy]
                for g_db in config.gamma_grid_db:
                    value = fn(10.0 ** (g_db / 10.0), params)
                    rows["analytic"].append((g_db, value, 0.0, "analytic", key))


def _scenario_fig5(config: ExperimentConfig, rows: dict) -> None:
    _coverage_rows(config, rows, ("P1", "P3"), config.sector_sweep)


def _scenario_fig6(config: ExperimentConfig, rows: dict) -> None:
    _coverage_rows(config, rows, ("P1", "P2"), config.sector_sweep)


def _scenario_fig7(config: ExperimentConfig, rows: dict) -> None:
    gamma = 10.0 ** (config.fig7_gamma_db / 10.0)
    for density in config.density_sweep:
        for m in config.sector_sweep:
            params = _with(config.params, density=density, sectors_exp=m)
            for policy in ("P1", "P3"):
                key = _curve_key(policy, density=density)
                if "analytic" in config.engines:
                    fn = analytic.coverage_p1 if policy == "P1" else analytic.coverage_p3
                    rows["analytic"].append((float(m), fn(gamma, params), 0.0, "analytic", key))
                if "mc" in config.engines:
                    plan = SimPlan(params=params, policy=policy,
                                   thresholds_db=(config.fig7_gamma_db,),
                                   n_trials=config.trials, master_seed=config.seed)
                    curve = run_coverage(plan, n_workers=config.workers)
                    rows["mc"].append((float(m), float(curve.p_cov[0]),
                                       float(curve.stderr[0]), "mc", key))


def _scenario_fig8(config: ExperimentConfig, rows: dict) -> None:
    for m in config.sector_sweep:
        params = _with(config.params, sectors_exp=m)
        if "dominant" in config.engines:
            for policy, fn in (("P2", dominant.coverage_dom_p2),
                               ("P3", dominant.coverage_dom_p3)):
                key = _curve_key(f"{policy}-dominant", sectors_exp=m)
                for g_db in config.gamma_grid_db:
                    rows["dominant"].append((g_db, fn(10.0 ** (g_db / 10.0), params),
                                             0.0, "dominant", key))
        if "analytic" in config.engines:
            key = _curve_key("P1", sectors_exp=m)
            for g_db in config.gamma_grid_db:
                value = analytic.coverage_p1(10.0 ** (g_db / 10.0), params)
                rows["analytic"].append((g_db, value, 0.0, "analytic", key))
        if "mc" in config.engines:
            plan = SimPlan(params=params, policy="P1", thresholds_db=config.gamma_grid_db,
                           n_trials=config.trials, master_seed=config.seed)
            curve = run_coverage(plan, n_workers=config.workers)
            key = _curve_key("P1", sectors_exp=m)
            rows["mc"] += [(x, v, s, "mc", key) for x, v, s
                           in zip(curve.thresholds_db, curve.p_cov, curve.stderr)]


def _scenario_custom(config: ExperimentConfig, rows: dict) -> None:
    for policy in config.policies:
        key = policy
        if "mc" in config.engines:
            plan = SimPlan(params=config.params, policy=policy,
                           thresholds_db=config.gamma_grid_db,
                           n_trials=config.trials, master_seed=config.seed)
            curve = run_coverage(plan, n_workers=config.workers)
            rows["mc"] += [(x, v, s, "mc", key) for x, v, s
                           in zip(curve.thresholds_db, curve.p_cov, curve.stderr)]
        if "analytic" in config.engines:
            fn = {"P1": analytic.coverage_p1, "P2": analytic.coverage_p2,
                  "P3": analytic.coverage_p3}[policy]
            for g_db in config.gamma_grid_db:
                rows["analytic"].append((g_db, fn(10.0 ** (g_db / 10.0), config.params),
                                         0.0, "analytic", key))
        if "dominant" in config.engines and policy in ("P2", "P3"):
            fn = dominant.coverage_dom_p2 if policy == "P2" else dominant.coverage_dom_p3
            for g_db in config.gamma_grid_db:
                rows["dominant"].append((g_db, fn(10.0 ** (g_db / 10.0), config.params),
                                         0.0, "dominant", f"{policy}-dominant"))


_RUNNERS = {
    "fig4": _scenario_fig4,
    "fig5": _scenario_fig5,
    "fig6": _scenario_fig6,
    "fig7": _scenario_fig7,
    "fig8": _scenario_fig8,
    "custom": _scenario_custom,
}


def _write_csv(path: Path, rows) -> None:
    lines = ["x,value,stderr,engine,policy"]
    lines += [f"{x:.10e},{v:.10e},{s:.10e},{engine},{key}"
              for x, v, s, engine, key in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def run_experiment(config: ExperimentConfig) -> list[Path]:
    """Run one scenario and emit per-engine CSVs plus a JSON manifest."""
    out_dir = Path(config.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out_dir}: {exc}") from exc
    runner = _RUNNERS[config.scenario]

    rows = {engine: [] for engine in config.engines}
    runtimes = {}
    start = time.perf_counter()
    runner(config, rows)
    runtimes["total"] = time.perf_counter() - start

    written = []
    for engine, engine_rows in rows.items():
        if not engine_rows:
            continue
        path = out_dir / f"{config.scenario}_{engine}.csv"
        _write_csv(path, engine_rows)
        written.append(path)

    extras = {}
    if config.scenario == "fig8" and "dominant" in config.engines:
        report = dominant.build_discrepancy_report(
            config.params, seed=config.seed, n_trials=min(config.trials, 200_000))
        report_path = out_dir / "discrepancies.json"
        report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
        written.append(report_path)
        extras["discrepancy_report"] = report_path.name

    manifest = {
        "scenario": config.scenario,
        "config": config.to_flat(),
        "package": {"name": "mmwcov", "version": __version__},
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "seed": config.seed,
        "runtimes_s": runtimes,
        "outputs": [p.name for p in written],
        "tolerance_flags": {
            "void_conditioning": "probability laws renormalized on a nonempty disk",
            "arbitrated_defaults": {
                "p1_exclusion": "all-beams",
                "p2_exclusion": "grid",
                "p2_gain_ratio_density": "negative exponential argument",
                "p3_distance_ratio_constant": "2/alpha",
                "p3_dominant_sir_pairing": "product",
            },
        },
        **extras,
    }
    manifest_path = out_dir / f"{config.scenario}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    written.append(manifest_path)
    return written
