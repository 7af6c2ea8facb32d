"""Uplink radio layer: power control, association, interference, outage.

Per slot, each user sets its transmit power open-loop against the path loss
of the ABS it was associated with in the previous slot, then associates to
the ABS with the strongest received power this slot. Interference at an ABS
is the total received power of users served elsewhere (single shared
channel, intra-cell users are orthogonal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig


def dbm_to_watt(p_dbm):
    return np.power(10.0, (np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


def db_to_linear(x_db):
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)


@dataclass
class LinkState:
    """All per-slot radio quantities, user-indexed arrays."""

    gains: np.ndarray        # (n_users, n_uav) linear gain incl. fading
    tx_power_w: np.ndarray   # (n_users,)
    serving_prev: np.ndarray  # (n_users,) ABS used for power control
    assoc: np.ndarray        # (n_users,) ABS serving this slot
    interference_w: np.ndarray  # (n_users,) inter-cell power at the serving ABS
    sinr: np.ndarray         # (n_users,) linear
    rate_bps: np.ndarray     # (n_users,)
    outage: np.ndarray       # (n_users,) bool, sinr below threshold


def tx_power_dbm(pl_serving_db, cfg: ScenarioConfig):
    """Open-loop power control, capped at p_max_dbm; vectorized."""
    pl = np.asarray(pl_serving_db, dtype=float)
    p = cfg.p0_dbm + cfg.alpha_ol * pl + 10.0 * np.log10(cfg.n_rb)
    p = np.minimum(cfg.p_max_dbm, p)
    if np.isscalar(pl_serving_db):
        return float(p)
    return p


def associate(rx_power_w: np.ndarray) -> np.ndarray:
    """Strongest-received-power association; ties go to the lowest index."""
    return np.argmax(rx_power_w, axis=1)


def interference(i: int, state: LinkState) -> float:
    """Inter-cell interference seen by user i at its serving ABS [W]."""
    n = state.assoc[i]
    others = state.assoc != n
    return float((state.tx_power_w[others] * state.gains[others, n]).sum())


def sinr(i: int, state: LinkState, noise_w: float) -> float:
    n = state.assoc[i]
    sig = state.tx_power_w[i] * state.gains[i, n]
    return float(sig / (noise_w + state.interference_w[i]))


def rate_bps(sinr_lin, bandwidth_hz: float):
    return bandwidth_hz * np.log2(1.0 + np.asarray(sinr_lin, dtype=float))


def evaluate_slot(large_scale_db: np.ndarray, fading: np.ndarray,
                  prev_assoc: np.ndarray | None, cfg: ScenarioConfig) -> LinkState:
    """Run the slot pipeline for all users at once.

    prev_assoc is last slot's association; None (first slot) falls back to
    the strongest large-scale link, fading excluded.
    """
    n_users = large_scale_db.shape[0]
    if prev_assoc is None:
        serving_prev = np.argmin(large_scale_db, axis=1)
    else:
        serving_prev = prev_assoc
    pl_serving = large_scale_db[np.arange(n_users), serving_prev]
    p_w = dbm_to_watt(tx_power_dbm(pl_serving, cfg))

    gains = db_to_linear(-large_scale_db) * fading
    rx = p_w[:, None] * gains                      # (n_users, n_uav)
    assoc = associate(rx)

    # inter-cell interference at ABS n: power arriving at n from users served
    # elsewhere; user-independent per ABS, so each user reads their column.
    # Masked sum, not colsum-minus-own: the subtraction leaves cancellation
    # residue that breaks the exact I = 0 case of an interference-free cell.
    sig = rx[np.arange(n_users), assoc]
    out_of_cell = assoc[:, None] != np.arange(rx.shape[1])[None, :]
    interf_abs = np.where(out_of_cell, rx, 0.0).sum(axis=0)
    interf = interf_abs[assoc]

    noise_w = float(dbm_to_watt(cfg.noise_dbm))
    snr = sig / (noise_w + interf)
    gamma_lin = float(db_to_linear(cfg.gamma_th_db))
    return LinkState(
        gains=gains,
        tx_power_w=p_w,
        serving_prev=serving_prev,
        assoc=assoc,
        interference_w=interf,
        sinr=snr,
        rate_bps=rate_bps(snr, cfg.bandwidth_hz),
        outage=snr < gamma_lin,
    )


@dataclass(frozen=True)
class OutageStats:
    """Outage fractions of one slot (or averaged over many)."""

    per_abs: np.ndarray   # (n_uav,) outage fraction among users served there
    network: float        # fraction over all users
    priority: float       # fraction among priority users
    regular: float        # fraction among non-priority users


def outage_stats(state: LinkState, priority_mask: np.ndarray, n_uav: int) -> OutageStats:
    """Class and per-ABS outage fractions; empty groups count as 0."""
    out = state.outage
    served = np.bincount(state.assoc, minlength=n_uav).astype(float)
    out_per = np.bincount(state.assoc, weights=out, minlength=n_uav)
    per_abs = np.divide(out_per, served, out=np.zeros(n_uav), where=served > 0)
    n_pr = int(priority_mask.sum())
    n_nr = int((~priority_mask).sum())
    pr = float(out[priority_mask].sum() / n_pr) if n_pr else 0.0
    nr = float(out[~priority_mask].sum() / n_nr) if n_nr else 0.0
    return OutageStats(
        per_abs=per_abs,
        network=float(out.mean()),
        priority=pr,
        regular=nr,
    )
