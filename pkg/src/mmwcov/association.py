"""User-association policies and per-field SINR assembly.

Three policies are supported:

* P1 -- maximum received power over all (transmitter, receive-beam) pairs,
* P2 -- minimum angular distance over all (transmitter, receive-beam) pairs,
* P3 -- minimum Euclidean distance (receive beam steered onto the server).

The interference reference direction differs per policy: the selected beam
maximum for P1, and the serving azimuth for P2/P3 (the receive pattern is
treated as centered on the serving link).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PointField, PolarPoint, angular_offset
from .radio import AntennaConfig, ChannelParams, beam_maxima_pmf, gain_3gpp, gain_approx, sample_fading

__all__ = [
    "AssociationOutcome",
    "SinrSample",
    "associate_p1",
    "associate_p2",
    "associate_p3",
    "compute_sinr",
]


@dataclass(frozen=True)
class AssociationOutcome:
    """Which transmitter serves, through which receive beam, and at what offset."""

    serving: PolarPoint
    serving_index: int
    beam_index: int          # 1-based position in the beam grid
    beam_direction: float
    serving_offset: float    # |beam direction - serving azimuth|, wrapped to [0, pi]
    policy: str


@dataclass(frozen=True)
class SinrSample:
    signal: float
    interference: float
    noise: float

    @property
    def sinr(self) -> float:
        return self.signal / (self.interference + self.noise)


def _beam_directions(cfg: AntennaConfig) -> np.ndarray:
    return np.array([d for d, _ in beam_maxima_pmf(cfg)])


def _pick(field: PointField, keys: tuple, policy: str, cfg: AntennaConfig | None,
          offsets=None, beams=None) -> AssociationOutcome:
    order = np.lexsort(keys)
    best = int(order[0])
    if offsets is None:
        # P3: the receive beam is steered onto the server, zero offset.
        return AssociationOutcome(
            serving=field.point(best), serving_index=best, beam_index=0,
            beam_direction=float(field.phi[best]), serving_offset=0.0, policy=policy,
        )
    i, b = divmod(best, offsets.shape[1])
    dirs = _beam_directions(cfg)
    return AssociationOutcome(
        serving=field.point(i), serving_index=i, beam_index=b + 1,
        beam_direction=float(dirs[b]), serving_offset=float(offsets[i, b]), policy=policy,
    )


def _pair_arrays(field: PointField, cfg: AntennaConfig):
    dirs = _beam_directions(cfg)
    offsets = angular_offset(field.phi[:, None], dirs[None, :])
    shape = offsets.shape
    r = np.broadcast_to(field.r[:, None], shape).ravel()
    phi = np.broadcast_to(field.phi[:, None], shape).ravel()
    beam = np.broadcast_to(np.arange(shape[1]), shape).ravel()
    return offsets, r, phi, beam


def associate_p1(field: PointField, cfg: AntennaConfig, ch: ChannelParams) -> AssociationOutcome:
    """Maximize gain(offset) * r**(-alpha) jointly over transmitters and beams.

    Ties resolve by smaller radius, then smaller azimuth, then lower beam index.
    """
    if field.n == 0:
        raise ValueError("cannot associate on an empty field")
    offsets, r, phi, beam = _pair_arrays(field, cfg)
    power = gain_approx(offsets, cfg).ravel() * r ** (-ch.alpha_l)
    return _pick(field, (beam, phi, r, -power), "P1", cfg, offsets=offsets)


def associate_p2(field: PointField, cfg: AntennaConfig) -> AssociationOutcome:
    """Minimize the (wrapped) angular distance jointly over transmitters and beams."""
    if field.n == 0:
        raise ValueError("cannot associate on an empty field")
    offsets, r, phi, beam = _pair_arrays(field, cfg)
    return _pick(field, (beam, phi, r, offsets.ravel()), "P2", cfg, offsets=offsets)


def associate_p3(field: PointField) -> AssociationOutcome:
    """Serve from the nearest transmitter; assume a perfectly aligned beam."""
    if field.n == 0:
        raise ValueError("cannot associate on an empty field")
    return _pick(field, (field.phi, field.r), "P3", None)


def compute_sinr(field: PointField, outcome: AssociationOutcome, cfg: AntennaConfig,
                 ch: ChannelParams, rng: np.random.Generator) -> SinrSample:
    """Assemble the downlink SINR for one associated field.

    The serving fade is drawn first (shape ``m_s``), then one fade per field
    point (shape ``m_x``); the serving point's interferer fade is discarded.
    Interferer gains use the exact receive pattern at the offset from the
    policy's reference direction; the serving gain uses the two-branch form
    for P1/P2 and boresight for P3 (both antenna ends aligned).
    """
    if outcome.serving_index >= field.n:
        raise ValueError("association outcome does not match the field")
    h_s = float(sample_fading(ch.m_s, rng))
    h_x = sample_fading(ch.m_x, rng, size=field.n)

    p, k_const = ch.tx_power_w, ch.path_gain_const
    if outcome.policy == "P1":
        reference = outcome.beam_direction
        g_serve = gain_approx(outcome.serving_offset, cfg)
    elif outcome.policy == "P2":
        reference = outcome.serving.phi
        g_serve = gain_approx(outcome.serving_offset, cfg)
    elif outcome.policy == "P3":
        reference = outcome.serving.phi
        g_serve = cfg.g_max
    else:
        raise ValueError(f"unknown policy {outcome.policy!r}")

    signal = p * h_s * cfg.g_max * g_serve * k_const * outcome.serving.r ** (-ch.alpha_l)
    mask = np.arange(field.n) != outcome.serving_index
    gains = gain_3gpp(angular_offset(reference, field.phi[mask]), cfg)
    interference = float(
        (p * cfg.g_max * k_const * h_x[mask] * gains * field.r[mask] ** (-ch.alpha_l)).sum()
    )
    return SinrSample(signal=float(signal), interference=interference, noise=ch.noise_w)
