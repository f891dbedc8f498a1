"""Physical-layer math: antenna patterns, path loss, SINR, Shannon capacity.

All functions accept scalars or numpy arrays (broadcasting) and return a
Python float for scalar input. Powers are dBm, gains dB, distances meters.
The SINR is always formed in linear milliwatts.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

# Antenna pattern kinds.
NULL_STEER_TWO_ELEMENT = "NullSteerTwoElement"
ISOTROPIC = "Isotropic"
COSINE_POWER = "CosinePower"

DEFAULT_NULL_FLOOR_DB = -60.0


@dataclass(frozen=True)
class GainPattern:
    """Antenna gain pattern with a steerable reference direction.

    For NullSteerTwoElement the reference direction is the null; for
    CosinePower it is the boresight. The floor clamps the deepest notch so
    link budgets stay finite.
    """

    kind: str = NULL_STEER_TWO_ELEMENT
    null_depth_floor_db: float = DEFAULT_NULL_FLOOR_DB
    q: float = 1.0
    max_gain_db: float = 0.0

    def __post_init__(self):
        if self.kind not in (NULL_STEER_TWO_ELEMENT, ISOTROPIC, COSINE_POWER):
            raise ValueError("unknown pattern kind: %r" % self.kind)
        if not self.null_depth_floor_db < 0:
            raise ValueError("null_depth_floor_db must be < 0")
        if self.kind == COSINE_POWER and self.q < 1:
            raise ValueError("CosinePower needs q >= 1")


def null_steer_pattern(floor_db: float = DEFAULT_NULL_FLOOR_DB) -> GainPattern:
    return GainPattern(NULL_STEER_TWO_ELEMENT, floor_db)


def isotropic_pattern(max_gain_db: float = 0.0) -> GainPattern:
    return GainPattern(ISOTROPIC, DEFAULT_NULL_FLOOR_DB, 1.0, max_gain_db)


def cosine_power_pattern(
    q: float, max_gain_db: float = 0.0, floor_db: float = DEFAULT_NULL_FLOOR_DB
) -> GainPattern:
    return GainPattern(COSINE_POWER, floor_db, q, max_gain_db)


@dataclass(frozen=True)
class LinkBudget:
    """One directed link's power bookkeeping; rx = tx + gains - loss exactly."""

    tx_power_dbm: float
    tx_gain_db: float
    rx_gain_db: float
    path_loss_db: float
    rx_power_dbm: float

    def __post_init__(self):
        expect = self.tx_power_dbm + self.tx_gain_db + self.rx_gain_db - self.path_loss_db
        if self.rx_power_dbm != expect:
            raise ValueError("rx_power_dbm must equal tx + gains - loss exactly")


def link_budget(
    tx_power_dbm: float, tx_gain_db: float, rx_gain_db: float, loss_db: float
) -> LinkBudget:
    rx = received_power_dbm(tx_power_dbm, tx_gain_db, rx_gain_db, loss_db)
    return LinkBudget(tx_power_dbm, tx_gain_db, rx_gain_db, loss_db, rx)


def _ret(out: np.ndarray):
    return out.item() if out.ndim == 0 else out


def dbm_to_mw(dbm):
    """10^(dBm/10); -inf maps to exactly 0 mW (disabled-source sentinel)."""
    arr = np.asarray(dbm, dtype=float)
    return _ret(np.power(10.0, arr / 10.0))


def mw_to_dbm(mw):
    arr = np.asarray(mw, dtype=float)
    if np.any(arr < 0):
        raise ValueError("power in mW must be >= 0")
    with np.errstate(divide="ignore"):
        return _ret(10.0 * np.log10(arr))


def path_loss_db(d_m, cfg: ScenarioConfig, chi_db=0.0):
    """Log-distance path loss: L_d0 + 10 n log10(d/d0) + chi.

    Distances below d0 clamp to d0 (the model is invalid there and loss must
    not go negative); d <= 0 is rejected.
    """
    d = np.asarray(d_m, dtype=float)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise ValueError("distance must be finite and > 0")
    chi = np.asarray(chi_db, dtype=float)
    if not np.all(np.isfinite(chi)):
        raise ValueError("chi_db must be finite")
    eff = np.maximum(d, cfg.ref_distance_m)
    loss = (
        cfg.ref_path_loss_db
        + 10.0 * cfg.path_loss_exponent * np.log10(eff / cfg.ref_distance_m)
        + chi
    )
    return _ret(loss)


def signed_offset_deg(target_bearing_deg, reference_deg):
    """Angular offset target - reference wrapped into (-180, 180]."""
    t = np.asarray(target_bearing_deg, dtype=float)
    r = np.asarray(reference_deg, dtype=float)
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(r))):
        raise ValueError("angles must be finite")
    delta = np.mod(t - r, 360.0)
    delta = np.where(delta > 180.0, delta - 360.0, delta)
    return _ret(delta)


def antenna_gain_db(pattern: GainPattern, boresight_or_null_deg, target_bearing_deg):
    """Pattern gain toward a target bearing, clamped at the null floor.

    NullSteerTwoElement: linear gain |sin(delta/2)| with the null at
    delta = 0 and the 0 dB maximum at delta = +-180. CosinePower: a
    max_gain_db + 10 q log10(cos delta) lobe inside |delta| < 90, floor
    outside. Isotropic ignores the angles.
    """
    delta = np.asarray(
        signed_offset_deg(target_bearing_deg, boresight_or_null_deg), dtype=float
    )
    floor = pattern.null_depth_floor_db
    if pattern.kind == ISOTROPIC:
        out = np.full_like(delta, pattern.max_gain_db)
    elif pattern.kind == NULL_STEER_TWO_ELEMENT:
        g = np.abs(np.sin(np.radians(delta) / 2.0))
        with np.errstate(divide="ignore"):
            out = np.maximum(20.0 * np.log10(g), floor)
    else:  # COSINE_POWER
        rad = np.radians(delta)
        cos = np.cos(rad)
        in_beam = np.abs(delta) < 90.0
        with np.errstate(divide="ignore", invalid="ignore"):
            lobe = pattern.max_gain_db + 10.0 * pattern.q * np.log10(
                np.where(in_beam, cos, 1.0)
            )
        out = np.where(in_beam, np.maximum(lobe, floor), floor)
    return _ret(np.asarray(out))


def received_power_dbm(tx_dbm, g_tx_db, g_rx_db, loss_db):
    """P_Rx = P_Tx + G_Tx + G_Rx - L, all in dB domain."""
    out = (
        np.asarray(tx_dbm, dtype=float)
        + np.asarray(g_tx_db, dtype=float)
        + np.asarray(g_rx_db, dtype=float)
        - np.asarray(loss_db, dtype=float)
    )
    return _ret(out)


def sinr_linear(rx_dbm, interference_dbm, noise_dbm):
    """SINR in linear units; interference_dbm may be -inf (no interference)."""
    rx = np.asarray(dbm_to_mw(rx_dbm), dtype=float)
    intf = np.asarray(dbm_to_mw(interference_dbm), dtype=float)
    noise = np.asarray(dbm_to_mw(noise_dbm), dtype=float)
    return _ret(rx / (intf + noise))


def shannon_capacity_bps(bandwidth_hz, sinr):
    """C = B log2(1 + SINR)."""
    b = np.asarray(bandwidth_hz, dtype=float)
    s = np.asarray(sinr, dtype=float)
    if np.any(b <= 0):
        raise ValueError("bandwidth must be > 0")
    if np.any(s < 0):
        raise ValueError("sinr must be >= 0")
    return _ret(b * np.log2(1.0 + s))
