"""Probabilistic LoS air-to-ground channel.

Large-scale loss on a UAV-user link blends LoS and NLoS excess attenuation
by the elevation-dependent LoS probability:

    theta   = (180/pi) * arcsin(h / d)
    P_LoS   = clamp([b1 * (theta - xi)]^b2, 0, 1)
    L_eff   = 10*log10(K0) + 10*alpha*log10(d)
              + 10*log10(P_LoS * kappa_LoS + (1 - P_LoS) * kappa_NLoS)

with kappa_* the linear excess-loss factors and K0 the reference loss at
1 m (free-space by default). Small-scale fading is unit-mean exponential
power fading applied multiplicatively to the linear gain 10^(-L_eff/10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig

SPEED_OF_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class ChannelParams:
    b1: float            # LoS slope [1/deg]
    b2: float            # LoS exponent
    xi_deg: float        # LoS angle offset [deg]
    alpha: float         # path loss exponent
    kappa_los: float     # linear LoS excess loss (>= 1)
    kappa_nlos: float    # linear NLoS excess loss (>= kappa_los)
    k0: float            # reference loss at 1 m, linear

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "ChannelParams":
        return cls(
            b1=cfg.plos_b1,
            b2=cfg.plos_b2,
            xi_deg=cfg.plos_xi_deg,
            alpha=cfg.path_alpha,
            kappa_los=10.0 ** (cfg.kappa_los_db / 10.0),
            kappa_nlos=10.0 ** (cfg.kappa_nlos_db / 10.0),
            k0=cfg.ref_loss_k0_value(),
        )


@dataclass(frozen=True)
class LinkGeometry:
    """3-D distance [m] and elevation angle [deg] of one UAV-user link."""

    distance_m: float
    theta_deg: float


def link_geometry(uav_pos, user_pos) -> LinkGeometry:
    """Geometry between a UAV at (x, y, h) and a ground user at (x, y, 0)."""
    ux, uy, uh = float(uav_pos[0]), float(uav_pos[1]), float(uav_pos[2])
    gx, gy = float(user_pos[0]), float(user_pos[1])
    if uh <= 0.0:
        raise ValueError("UAV altitude must be positive")
    d = math.sqrt((ux - gx) ** 2 + (uy - gy) ** 2 + uh ** 2)
    theta = math.degrees(math.asin(uh / d))
    return LinkGeometry(distance_m=d, theta_deg=theta)


def los_probability(theta_deg, p: ChannelParams):
    """P_LoS(theta); scalar or ndarray in, same shape out."""
    base = p.b1 * (np.asarray(theta_deg, dtype=float) - p.xi_deg)
    prob = np.where(base > 0.0, np.power(np.maximum(base, 0.0), p.b2), 0.0)
    prob = np.clip(prob, 0.0, 1.0)
    if np.isscalar(theta_deg):
        return float(prob)
    return prob


def effective_path_loss_db(distance_m, theta_deg, p: ChannelParams):
    """LoS/NLoS-blended large-scale loss in dB; vectorized."""
    d = np.asarray(distance_m, dtype=float)
    plos = los_probability(theta_deg, p)
    excess = plos * p.kappa_los + (1.0 - plos) * p.kappa_nlos
    loss = 10.0 * np.log10(p.k0) + 10.0 * p.alpha * np.log10(d) + 10.0 * np.log10(excess)
    if np.isscalar(distance_m):
        return float(loss)
    return loss


def sample_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential power fading |f|^2."""
    return rng.exponential(1.0, size)


def channel_gain(loss_db, fading):
    """Linear power gain 10^(-L/10) scaled by a fading draw."""
    g = np.power(10.0, -np.asarray(loss_db, dtype=float) / 10.0) * fading
    if np.isscalar(loss_db) and np.isscalar(fading):
        return float(g)
    return g


def link_matrix(uav_xy: np.ndarray, altitude_m: float, users_xy: np.ndarray,
                p: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    """(n_users, n_uav) distances and large-scale losses for a whole slot."""
    diff = users_xy[:, None, :] - uav_xy[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2) + altitude_m ** 2)
    theta = np.degrees(np.arcsin(altitude_m / d))
    return d, effective_path_loss_db(d, theta, p)
