"""Quadrature-based evaluation of the coverage model.

Mirrors the Monte Carlo engine: serving-power law, conditional interference
Laplace transforms over policy-specific regions, and the coverage integrals
for the three association policies.

Two knobs deserve a note.  Laws with a finite void mass (no transmitter in
the disk) expose both the raw form and a ``conditioned`` form renormalized on
the nonempty event, matching the simulator's conditioning.  Interference
regions expose ``exclusion`` variants: the simple one-sided / single-beam
descriptions, and sharper variants ("exact" for P1, "grid" for P2) that keep
out interferers around every beam maximum, which is what the selection rule
actually implies; the Monte Carlo engine arbitrates which variant a given
study should use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _special

from .numerics import LaplaceEvaluator, QuadratureSpec, integrate_1d
from .radio import NetworkParams, beam_maxima_pmf, gain_3gpp, gain_approx

TWO_PI = 2.0 * math.pi
_LN10 = math.log(10.0)

__all__ = [
    "ServingPowerLaw",
    "ExclusionZone",
    "serving_power_law",
    "serving_power_pdf",
    "serving_power_cdf",
    "serving_power_ccdf",
    "nearest_power_ccdf",
    "phi_c_pdf",
    "laplace_p1",
    "laplace_p2",
    "laplace_p3",
    "coverage_p1",
    "coverage_p2",
    "coverage_p3",
    "P1_EXCLUSIONS",
    "P2_EXCLUSIONS",
]

P1_EXCLUSIONS = ("single-beam", "all-beams")
P2_EXCLUSIONS = ("one-sided", "symmetric", "grid")

# Quadrature specs for the coverage integrals: the inner/outer split keeps the
# combined error comfortably below the cross-engine comparison tolerances.
_OUTER_SPEC = QuadratureSpec(rel_tol=2e-5, abs_tol=1e-8, max_subdivisions=4000)
_INNER_SPEC = QuadratureSpec(rel_tol=1e-5, abs_tol=1e-9, max_subdivisions=4000)

# Fraction of the disk radius below which radial mass is negligible for the
# interference exponent (the integrand is bounded by r there).
_R_FLOOR_FRAC = 1e-6

_N_PHI = 32          # Gauss-Legendre order for wide angular panels
_N_PHI_NARROW = 12   # order for the short panels of the per-beam regions
_N_RAD = 20          # order per radial log-panel
_RAD_EDGES = np.array([0.0, 0.9, 2.7, 8.1])  # log-radius panel starts above the lower edge


@lru_cache(maxsize=32)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _curvature(cfg) -> float:
    """kappa such that the mainlobe gain is g_max * 10**(-kappa * offset**2)."""
    return 1.2 / cfg.phi_3db**2


# ---------------------------------------------------------------------------
# Serving-power law (maximum over transmitters of gain(misalignment) * r**-alpha)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ServingPowerLaw:
    """Distribution of the normalized maximum received power.

    Per transmitter the best beam is the nearest maximum, so the misalignment
    is uniform on [0, beam_spacing/2] and independent of the radius; the
    maximum over a Poisson number of such draws has the closed form below
    (gaussian-in-angle integrals reduce to erf).  The raw cdf carries the
    void mass at ``w_min``; ``conditioned=True`` renormalizes on a nonempty
    disk, matching the simulation engine.
    """

    params: NetworkParams

    def __post_init__(self) -> None:
        cfg = self.params.antenna
        if 0.5 * cfg.beam_spacing > cfg.phi_a:
            raise ValueError("beam spacing exceeds the mainlobe width; the "
                             "serving-power law assumes mainlobe misalignment")

    @property
    def _half(self) -> float:
        return 0.5 * self.params.antenna.beam_spacing

    @property
    def w_min(self) -> float:
        cfg, ch = self.params.antenna, self.params.channel
        g_lo = gain_approx(self._half, cfg)
        return g_lo * self.params.r_los ** (-ch.alpha_l)

    @property
    def void_mass(self) -> float:
        return self.params.void_probability

    def psi(self, w):
        """Upper gain limit compatible with power level ``w`` inside the disk."""
        alpha = self.params.channel.alpha_l
        return np.minimum(np.asarray(w, dtype=float) * self.params.r_los**alpha,
                          self.params.antenna.g_max)

    def _gauss_profile(self):
        cfg, ch = self.params.antenna, self.params.channel
        q = (2.0 / ch.alpha_l) * _curvature(cfg) * _LN10
        return q, math.sqrt(math.pi / (4.0 * q))

    def _phi_lo(self, w):
        """Misalignment below which a transmitter at the disk edge still beats ``w``."""
        cfg = self.params.antenna
        y = self.psi(w)
        kappa = _curvature(cfg)
        arg = np.maximum(np.log10(cfg.g_max / y), 0.0) / kappa
        return np.sqrt(arg)

    def inner_pdf(self, w):
        """Density of a single transmitter's normalized power."""
        cfg, ch = self.params.antenna, self.params.channel
        w_arr = np.asarray(w, dtype=float)
        alpha, r_l = ch.alpha_l, self.params.r_los
        q, amp = self._gauss_profile()
        lo = self._phi_lo(w_arr)
        # clamp: rounding can push the window a few ulp negative at w_min
        window = np.maximum(
            amp * (_special.erf(math.sqrt(q) * self._half) - _special.erf(np.sqrt(q) * lo)), 0.0)
        beta = (alpha + 2.0) / alpha
        dens = (4.0 * cfg.g_max ** (2.0 / alpha) / (self.params.antenna.beam_spacing * alpha * r_l**2)
                * w_arr ** (-beta) * window)
        out = np.where(w_arr >= self.w_min, dens, 0.0)
        return float(out) if out.ndim == 0 else out

    def inner_cdf(self, w):
        cfg, ch = self.params.antenna, self.params.channel
        w_arr = np.asarray(w, dtype=float)
        alpha, r_l = ch.alpha_l, self.params.r_los
        q, amp = self._gauss_profile()
        lo = self._phi_lo(w_arr)
        window = np.maximum(
            amp * (_special.erf(math.sqrt(q) * self._half) - _special.erf(np.sqrt(q) * lo)), 0.0)
        half = self._half
        tail = cfg.g_max ** (2.0 / alpha) / (np.maximum(w_arr, self.w_min) ** (2.0 / alpha) * r_l**2)
        cdf = (2.0 / self.params.antenna.beam_spacing) * (np.maximum(half - lo, 0.0) - tail * window)
        out = np.clip(np.where(w_arr >= self.w_min, cdf, 0.0), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, s0, conditioned: bool = False):
        m = self.params.mean_count
        raw = np.exp(-m * (1.0 - self.inner_cdf(s0)))
        s_arr = np.asarray(s0, dtype=float)
        raw = np.where(s_arr >= self.w_min, raw, 0.0 if conditioned else self.void_mass)
        if conditioned:
            raw = np.clip((raw - self.void_mass) / (1.0 - self.void_mass), 0.0, 1.0)
        return float(raw) if raw.ndim == 0 else raw

    def pdf(self, s0, conditioned: bool = False):
        m = self.params.mean_count
        dens = m * self.inner_pdf(s0) * np.exp(-m * (1.0 - self.inner_cdf(s0)))
        if conditioned:
            dens = dens / (1.0 - self.void_mass)
        return float(dens) if np.ndim(dens) == 0 else dens

    def ccdf(self, s0, conditioned: bool = False):
        return 1.0 - self.cdf(s0, conditioned=conditioned)

    def quantile(self, p: float, conditioned: bool = True) -> float:
        """Numeric inverse of the cdf by bisection (monotone)."""
        lo, hi = self.w_min, self.w_min * 2.0
        while self.cdf(hi, conditioned=conditioned) < p:
            hi *= 2.0
            if hi > self.w_min * 1e12:
                raise RuntimeError("quantile bracket failed")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.cdf(mid, conditioned=conditioned) < p:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


@lru_cache(maxsize=16)
def serving_power_law(params: NetworkParams) -> ServingPowerLaw:
    return ServingPowerLaw(params)


def serving_power_pdf(s0, params: NetworkParams, conditioned: bool = False):
    return serving_power_law(params).pdf(s0, conditioned=conditioned)


def serving_power_cdf(s0, params: NetworkParams, conditioned: bool = False):
    return serving_power_law(params).cdf(s0, conditioned=conditioned)


def serving_power_ccdf(s0, params: NetworkParams, conditioned: bool = False):
    return serving_power_law(params).ccdf(s0, conditioned=conditioned)


def nearest_power_ccdf(tau, params: NetworkParams, conditioned: bool = True):
    """ccdf of the boresight power g_max * r1**(-alpha) from the nearest transmitter."""
    cfg, ch = params.antenna, params.channel
    tau_arr = np.asarray(tau, dtype=float)
    radius = np.minimum((cfg.g_max / tau_arr) ** (1.0 / ch.alpha_l), params.r_los)
    prob = 1.0 - np.exp(-params.density * math.pi * radius**2)
    if conditioned:
        prob = prob / (1.0 - params.void_probability)
    out = np.clip(prob, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def phi_c_pdf(phi_c, params: NetworkParams, conditioned: bool = False):
    """Density of the minimum angular distance over all beams and transmitters.

    Support [0, beam_spacing/2]; the raw form leaves the void mass in place.
    """
    cfg = params.antenna
    phi_arr = np.asarray(phi_c, dtype=float)
    rate = params.density * cfg.n_beams * params.r_los**2
    dens = rate * np.exp(-rate * phi_arr)
    out = np.where((phi_arr >= 0.0) & (phi_arr <= 0.5 * cfg.beam_spacing), dens, 0.0)
    if conditioned:
        out = out / (1.0 - params.void_probability)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Interference Laplace exponents over the policy regions
# ---------------------------------------------------------------------------


class _RegionExponent:
    """Laplace exponent F(s) = -lambda * Iint (1 - (1 + c s)^-m) r dr dphi on a
    fixed panelized Gauss-Legendre grid, with analytic s-derivatives."""

    def __init__(self, density: float, m_x: int, c: np.ndarray, w: np.ndarray):
        self.density = density
        self.m_x = m_x
        self.c = c
        self.w = w
        self._cpow = {0: np.ones_like(c), 1: c}

    def _pow(self, k: int) -> np.ndarray:
        if k not in self._cpow:
            self._cpow[k] = self._cpow[k - 1] * self.c
        return self._cpow[k]

    def exponent(self, s):
        s_arr = np.asarray(s, dtype=float)
        u = 1.0 + s_arr[..., None] * self.c
        val = -self.density * ((1.0 - u ** (-self.m_x)) * self.w).sum(axis=-1)
        return float(val) if val.ndim == 0 else val

    def exponent_deriv(self, s, k: int):
        if k < 1:
            raise ValueError("derivative order must be >= 1")
        s_arr = np.asarray(s, dtype=float)
        u = 1.0 + s_arr[..., None] * self.c
        rising = math.prod(range(self.m_x, self.m_x + k))
        val = (self.density * (-1.0) ** k * rising
               * (self._pow(k) * u ** (-(self.m_x + k)) * self.w).sum(axis=-1))
        return float(val) if val.ndim == 0 else val

    def to_evaluator(self, max_order: int) -> LaplaceEvaluator:
        derivs = tuple(
            (lambda s, _k=k: self.exponent_deriv(s, _k)) for k in range(1, max_order + 1)
        )
        return LaplaceEvaluator(exponent_fn=self.exponent, exponent_derivs=derivs,
                                max_order=max_order)


def _radial_weights(r_lo: np.ndarray, r_hi: float, n: int = _N_RAD):
    """Nodes/weights of int f(r) r dr over [r_lo_i, r_hi] on log-radius panels."""
    v_lo = np.log(r_lo)
    v_hi = math.log(r_hi)
    starts = np.minimum(v_lo[:, None] + _RAD_EDGES[None, :], v_hi)
    ends = np.concatenate([starts[:, 1:], np.full((r_lo.size, 1), v_hi)], axis=1)
    x, w = _leggauss(n)
    mid = 0.5 * (starts + ends)[..., None]
    half = 0.5 * (ends - starts)[..., None]
    v = mid + half * x
    weight = (half * w) * np.exp(2.0 * v)
    flat = r_lo.size
    return np.exp(v).reshape(flat, -1), weight.reshape(flat, -1)


def _assemble_exponent(params: NetworkParams, panels) -> _RegionExponent:
    """Build a region exponent from angular panels.

    Each panel is ``(a, b, order, gain_fn, rlo_fn, mult)``;  ``order=None``
    marks a panel whose gain and lower radius are constant, which is then
    integrated exactly as width * (single radial integral).
    """
    cfg, ch = params.antenna, params.channel
    ang_parts, w_parts = [], []
    gain_parts, rlo_parts = [], []
    for a, b, order, gain_fn, rlo_fn, mult in panels:
        if b - a <= 1e-13:
            continue
        if order is None:
            nodes = np.array([0.5 * (a + b)])
            wts = np.array([(b - a) * mult])
        else:
            x, w = _leggauss(order)
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
            wts = 0.5 * (b - a) * w * mult
        ang_parts.append(nodes)
        w_parts.append(wts)
        gain_parts.append(np.asarray(gain_fn(nodes), dtype=float))
        rlo_parts.append(np.asarray(rlo_fn(nodes), dtype=float))
    ang_w = np.concatenate(w_parts)
    gains = np.concatenate(gain_parts)
    r_lo = np.concatenate(rlo_parts)
    r, rad_w = _radial_weights(r_lo, params.r_los)
    amp = ch.tx_power_w * ch.path_gain_const * cfg.g_max / ch.m_x
    c = (amp * gains[:, None] * r ** (-ch.alpha_l)).ravel()
    w_total = (ang_w[:, None] * rad_w).ravel()
    return _RegionExponent(params.density, ch.m_x, c, w_total)


@dataclass(frozen=True)
class ExclusionZone:
    """Keep-out boundary induced by conditioning on the serving power level."""

    params: NetworkParams
    s_th: float

    def r_min(self, delta_phi):
        cfg, ch = self.params.antenna, self.params.channel
        g = gain_3gpp(delta_phi, cfg)
        out = np.minimum((g / self.s_th) ** (1.0 / ch.alpha_l), self.params.r_los)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def region(self) -> str:
        return "r_min(phi) <= r <= R_los, 0 <= phi < 2*pi"


def _exclusion_angle(params: NetworkParams, s_th: float) -> float:
    """Offset below which the keep-out radius saturates at the disk edge."""
    cfg, ch = params.antenna, params.channel
    y = s_th * params.r_los**ch.alpha_l
    if y >= cfg.g_max:
        return 0.0
    return min(math.sqrt(math.log10(cfg.g_max / y) / _curvature(cfg)), cfg.phi_a)


def _p1_exponent(params: NetworkParams, s_th: float, exclusion: str) -> _RegionExponent:
    cfg, ch = params.antenna, params.channel
    law = serving_power_law(params)
    if s_th < law.w_min:
        raise ValueError("serving power below the support of the serving law")
    r_l = params.r_los
    alpha = ch.alpha_l
    inv_alpha = 1.0 / alpha
    floor = cfg.phi_a
    phi_star = _exclusion_angle(params, s_th)

    def rlo_from_chosen(delta):
        return np.minimum((gain_3gpp(delta, cfg) / s_th) ** inv_alpha, r_l)

    if exclusion == "single-beam":
        panels = [(phi_star, floor, _N_PHI, lambda d: gain_3gpp(d, cfg), rlo_from_chosen, 2.0)]
        if floor < math.pi:
            panels.append((floor, math.pi, None, lambda d: gain_3gpp(d, cfg), rlo_from_chosen, 2.0))
        return _assemble_exponent(params, panels)

    if exclusion != "all-beams":
        raise ValueError(f"unknown P1 exclusion {exclusion!r}; expected one of {P1_EXCLUSIONS}")

    # Keep-out around *every* beam maximum: a transmitter beats s_th whenever
    # its own best-beam gain does, so the empty bands repeat with the beam grid.
    step = cfg.beam_spacing

    def fold(delta):
        t = np.asarray(delta, dtype=float) % step
        return np.minimum(t, step - t)

    def rlo_exact(delta):
        return np.minimum((gain_approx(fold(delta), cfg) / s_th) ** inv_alpha, r_l)

    edges = {0.0, math.pi, min(floor, math.pi)}
    k = 0
    while k * step <= math.pi + step:
        for e in (k * step - phi_star, k * step, k * step + phi_star,
                  k * step + 0.5 * step):
            if 0.0 <= e <= math.pi:
                edges.add(e)
        k += 1
    edges = sorted(edges)
    panels = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 1e-13:
            continue
        midpoint = 0.5 * (a + b)
        if fold(midpoint) < phi_star:          # inside a keep-out band
            continue
        panels.append((a, b, _N_PHI_NARROW, lambda d: gain_3gpp(d, cfg), rlo_exact, 2.0))
    return _assemble_exponent(params, panels)


def _p2_exponent(params: NetworkParams, phi_c: float, exclusion: str) -> _RegionExponent:
    cfg = params.antenna
    r_l = params.r_los
    floor = cfg.phi_a
    r_floor = _R_FLOOR_FRAC * r_l

    def rlo(delta):
        return np.full(np.shape(np.asarray(delta)), r_floor)

    def gain_fold(psi):
        psi_arr = np.asarray(psi, dtype=float)
        folded = np.minimum(psi_arr % TWO_PI, TWO_PI - psi_arr % TWO_PI)
        return gain_3gpp(folded, cfg)

    if exclusion in ("one-sided", "symmetric"):
        def side_panels(lower):
            out = []
            if lower < floor:
                out.append((lower, min(floor, math.pi), _N_PHI,
                            lambda d: gain_3gpp(d, cfg), rlo, 1.0))
            flat_lo = max(lower, floor)
            if flat_lo < math.pi:
                out.append((flat_lo, math.pi, None, lambda d: gain_3gpp(d, cfg), rlo, 1.0))
            return out

        one_side = side_panels(phi_c)
        if exclusion == "symmetric":
            panels = [(a, b, n, g, r, 2.0 * m) for a, b, n, g, r, m in one_side]
        else:
            panels = one_side + side_panels(0.0)
        return _assemble_exponent(params, panels)

    if exclusion != "grid":
        raise ValueError(f"unknown P2 exclusion {exclusion!r}; expected one of {P2_EXCLUSIONS}")

    # Keep-out of half-width phi_c around every beam maximum.  In link-relative
    # azimuth the maxima sit at k*step - phi_c (the serving link is phi_c off
    # its beam); the excluded azimuth bands are (k*step - 2 phi_c, k*step),
    # which for k = 1 .. n_beams tile [0, 2*pi] without wrap handling.
    step = cfg.beam_spacing
    bands = []
    if phi_c > 0.0:
        for k in range(1, cfg.n_beams + 1):
            bands.append((max(0.0, k * step - 2.0 * phi_c), min(TWO_PI, k * step)))
    edges = {0.0, TWO_PI, math.pi}
    for f in (floor, TWO_PI - floor):
        if 0.0 < f < TWO_PI:
            edges.add(f)
    for lo, hi in bands:
        edges.add(lo)
        edges.add(hi)
    edges = sorted(edges)

    def in_band(x):
        return any(lo - 1e-15 <= x <= hi + 1e-15 for lo, hi in bands)

    panels = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 1e-13 or in_band(0.5 * (a + b)):
            continue
        fold_mid = min(0.5 * (a + b), TWO_PI - 0.5 * (a + b))
        order = None if fold_mid >= floor else _N_PHI_NARROW
        panels.append((a, b, order, gain_fold, rlo, 1.0))
    return _assemble_exponent(params, panels)


def _p3_exponent(params: NetworkParams, r1: float) -> _RegionExponent:
    cfg = params.antenna
    r_l = params.r_los
    floor = cfg.phi_a
    r_lo_val = min(max(r1, _R_FLOOR_FRAC * r_l), r_l * (1.0 - 1e-12))

    def rlo(delta):
        return np.full(np.shape(np.asarray(delta)), r_lo_val)

    panels = [(0.0, min(floor, math.pi), _N_PHI, lambda d: gain_3gpp(d, cfg), rlo, 2.0)]
    if floor < math.pi:
        panels.append((floor, math.pi, None, lambda d: gain_3gpp(d, cfg), rlo, 2.0))
    return _assemble_exponent(params, panels)


def _deriv_budget(params: NetworkParams) -> int:
    return max(params.channel.m_s - 1, 2)


def laplace_p1(s_th: float, beam_direction: float | None, params: NetworkParams,
               exclusion: str = "all-beams") -> LaplaceEvaluator:
    """Conditional interference Laplace transform given the serving power level.

    ``beam_direction`` is accepted for interface completeness; by isotropy the
    transform does not depend on it.
    """
    del beam_direction
    return _p1_exponent(params, s_th, exclusion).to_evaluator(_deriv_budget(params))


def laplace_p2(phi_c: float, beam_direction: float | None, params: NetworkParams,
               exclusion: str = "grid") -> LaplaceEvaluator:
    """Conditional interference Laplace transform given the serving angular distance."""
    del beam_direction
    if not 0.0 <= phi_c <= 0.5 * params.antenna.beam_spacing:
        raise ValueError("phi_c outside [0, beam_spacing/2]")
    return _p2_exponent(params, phi_c, exclusion).to_evaluator(_deriv_budget(params))


def laplace_p3(r1: float, params: NetworkParams) -> LaplaceEvaluator:
    """Conditional interference Laplace transform given the serving distance."""
    if not 0.0 <= r1 <= params.r_los:
        raise ValueError("r1 outside [0, R_los]")
    return _p3_exponent(params, r1).to_evaluator(_deriv_budget(params))


# ---------------------------------------------------------------------------
# Coverage integrals
# ---------------------------------------------------------------------------


def _conditional_coverage(expo: _RegionExponent, s, params: NetworkParams):
    """Coverage given the interference exponent, integrated over the gamma fade:
    sum_{k < m_s} ((-s)^k / k!) d^k/ds^k [exp(-noise s) L_I(s)]."""
    ch = params.channel
    m_s, noise = ch.m_s, ch.noise_w
    s_arr = np.asarray(s, dtype=float)
    levels = [np.exp(expo.exponent(s_arr) - noise * s_arr)]
    if m_s == 1:
        return levels[0]
    f_derivs = [expo.exponent_deriv(s_arr, k) for k in range(1, m_s)]
    f_derivs[0] = f_derivs[0] - noise
    for k in range(1, m_s):
        acc = np.zeros_like(levels[0])
        for j in range(k):
            acc = acc + math.comb(k - 1, j) * f_derivs[k - j - 1] * levels[j]
        levels.append(acc)
    total = np.zeros_like(levels[0])
    for k in range(m_s):
        total = total + (-s_arr) ** k / math.factorial(k) * levels[k]
    return total


def _beam_average(single_direction_value):
    """Average a per-beam-direction computation over the maxima pmf."""

    def run(params, collapse_beams):
        if collapse_beams:
            return single_direction_value(None)
        return sum(p * single_direction_value(d) for d, p in beam_maxima_pmf(params.antenna))

    return run


def coverage_p1(gamma: float, params: NetworkParams, exclusion: str = "all-beams",
                collapse_beams: bool = True) -> float:
    """Coverage probability under maximum-power association (linear threshold)."""
    cfg, ch = params.antenna, params.channel
    law = serving_power_law(params)
    s_const = ch.m_s * gamma / (ch.tx_power_w * cfg.g_max * ch.path_gain_const)

    def for_direction(_direction):
        def integrand(s_th):
            s_th = np.atleast_1d(s_th)
            cond = np.empty_like(s_th)
            for i, value in enumerate(s_th):
                expo = _p1_exponent(params, float(value), exclusion)
                cond[i] = _conditional_coverage(expo, s_const / value, params)
            return law.pdf(s_th, conditioned=True) * cond

        return integrate_1d(integrand, law.w_min, math.inf, _OUTER_SPEC)

    return float(np.clip(_beam_average(for_direction)(params, collapse_beams), 0.0, 1.0))


def coverage_p2(gamma: float, params: NetworkParams, exclusion: str = "grid",
                collapse_beams: bool = True) -> float:
    """Coverage probability under minimum-angular-distance association."""
    cfg, ch = params.antenna, params.channel
    r_l = params.r_los
    alpha = ch.alpha_l
    norm = 1.0 - params.void_probability

    def for_direction(_direction):
        def outer(phi_cs):
            phi_cs = np.atleast_1d(phi_cs)
            vals = np.empty_like(phi_cs)
            for i, pc in enumerate(phi_cs):
                expo = _p2_exponent(params, float(pc), exclusion)
                s_coef = ch.m_s * gamma / (ch.tx_power_w * cfg.g_max * ch.path_gain_const
                                           * gain_approx(float(pc), cfg))

                def inner(d0):
                    return (2.0 * d0 / r_l**2) * _conditional_coverage(
                        expo, s_coef * d0**alpha, params)

                vals[i] = integrate_1d(inner, 0.0, r_l, _INNER_SPEC)
            return phi_c_pdf(phi_cs, params) / norm * vals

        return integrate_1d(outer, 0.0, 0.5 * cfg.beam_spacing, _OUTER_SPEC)

    return float(np.clip(_beam_average(for_direction)(params, collapse_beams), 0.0, 1.0))


def coverage_p3(gamma: float, params: NetworkParams) -> float:
    """Coverage probability under nearest-transmitter association."""
    cfg, ch = params.antenna, params.channel
    r_l = params.r_los
    lam = params.density
    norm = 1.0 - params.void_probability
    s_const = ch.m_s * gamma / (ch.tx_power_w * ch.path_gain_const * cfg.g_max**2)

    def integrand(r1):
        r1 = np.atleast_1d(r1)
        cond = np.empty_like(r1)
        for i, value in enumerate(r1):
            expo = _p3_exponent(params, float(value))
            cond[i] = _conditional_coverage(expo, s_const * value**ch.alpha_l, params)
        f_r1 = 2.0 * math.pi * lam * r1 * np.exp(-lam * math.pi * r1**2) / norm
        return f_r1 * cond

    return float(np.clip(integrate_1d(integrand, 0.0, r_l, _OUTER_SPEC), 0.0, 1.0))
