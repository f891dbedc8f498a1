"""Swarm link graph and fitness: per-timeslot F_t and per-epoch objective.

The swarm is a complete graph; each undirected edge carries a capacity
derived from the two directed SINRs (min by default). Per-timeslot fitness is
F_t = C_avg^alpha * C_min^beta and an epoch scores the mean of F_t over its
decision slots (slot 0 is the given initial condition and is never scored).

Everything funnels through link_stats_batch, which evaluates whole stacks of
candidate states in one vectorized pass; the scalar link_report is the same
code run on a single state, so batch and scalar results are identical.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ScenarioConfig
from .radio import (
    antenna_gain_db,
    cosine_power_pattern,
    dbm_to_mw,
    isotropic_pattern,
    null_steer_pattern,
    path_loss_db,
)
from .state import SwarmState, Vec2

# Undirected edge capacity from the two directed capacities.
EDGE_MODE_MIN = "min"
EDGE_MODE_MEAN = "mean"
EDGE_MODE_DIRECTED = "directed"  # aggregate all N(N-1) directed links


@dataclass(frozen=True)
class LinkReport:
    """Per-edge capacities plus the aggregates that form F_t."""

    edge_capacities_bps: dict  # {(i, j): bps}; unordered pairs unless directed mode
    c_avg_bps: float
    c_min_bps: float
    fitness: float


@dataclass(frozen=True)
class EpochObjective:
    per_slot: tuple  # LinkReport for slots 1..T
    objective: float  # mean of per-slot fitness


def bearing_deg(from_xy, to_xy):
    """Bearing of to relative to from, CCW from +x, wrapped to [0, 360)."""
    a = np.asarray(from_xy, dtype=float)
    b = np.asarray(to_xy, dtype=float)
    d = b - a
    ang = np.degrees(np.arctan2(d[..., 1], d[..., 0]))
    ang = np.mod(ang, 360.0)
    ang = np.where(ang == 360.0, 0.0, ang)
    return ang.item() if ang.ndim == 0 else ang


def uav_pattern(cfg: ScenarioConfig):
    return null_steer_pattern(cfg.null_depth_floor_db)


def _jammer_pattern(cfg: ScenarioConfig):
    jp = cfg.jammer_pattern
    if jp.kind == "Isotropic":
        return isotropic_pattern(jp.max_gain_db)
    return cosine_power_pattern(jp.q, jp.max_gain_db, cfg.null_depth_floor_db)


def _clamped_distance(d: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    # Coincident endpoints are legal under Rule 1; the log-distance model
    # clamps below d0 anyway, so lift zeros up to d0 before the loss call.
    return np.maximum(d, cfg.ref_distance_m)


def link_stats_batch(
    positions: np.ndarray,
    null_angles_deg: np.ndarray,
    jammer,
    cfg: ScenarioConfig,
    edge_mode: str = EDGE_MODE_MIN,
    shadow_rng: Optional[np.random.Generator] = None,
):
    """Evaluate stacks of swarm states in one pass.

    positions: (..., N, 2); null_angles_deg: (..., N); jammer: (2,) or
    broadcastable (..., 2). Returns (edge_bps, c_avg, c_min, fitness) where
    edge_bps has shape (..., P) over unordered pairs in lexicographic order
    (or (..., N*(N-1)) directed pairs in directed mode) and the rest drop the
    last axis.
    """
    pos = np.asarray(positions, dtype=float)
    ang = np.asarray(null_angles_deg, dtype=float)
    jam = np.asarray(jammer, dtype=float)
    n = pos.shape[-2]
    if pos.shape[-1] != 2 or ang.shape[-1] != n:
        raise ValueError("positions (..., N, 2) and null_angles_deg (..., N) required")
    jam = np.broadcast_to(jam, pos.shape[:-2] + (2,))
    pattern = uav_pattern(cfg)

    # Jammer-to-UAV geometry, one interference power per receiver.
    jam_off = pos - jam[..., None, :]                      # (..., N, 2)
    d_jam = np.linalg.norm(jam_off, axis=-1)               # (..., N)
    bear_uav_to_jam = np.degrees(np.arctan2(-jam_off[..., 1], -jam_off[..., 0]))
    bear_jam_to_uav = np.degrees(np.arctan2(jam_off[..., 1], jam_off[..., 0]))
    chi_jam = 0.0
    if shadow_rng is not None and cfg.shadowing_sigma_db > 0:
        chi_jam = shadow_rng.normal(0.0, cfg.shadowing_sigma_db, size=d_jam.shape)
    loss_jam = path_loss_db(_clamped_distance(d_jam, cfg), cfg, chi_jam)
    g_rx_toward_jam = antenna_gain_db(pattern, ang, bear_uav_to_jam)
    jp = cfg.jammer_pattern
    if jp.kind == "Isotropic":
        g_jam = np.full(d_jam.shape, jp.max_gain_db)
    else:
        # Cosine-power jammer aims at the swarm centroid.
        centroid = pos.mean(axis=-2)                       # (..., 2)
        boresight = bearing_deg(jam, centroid)             # (...)
        g_jam = antenna_gain_db(
            _jammer_pattern(cfg), np.asarray(boresight)[..., None], bear_jam_to_uav
        )
    interference_dbm = cfg.jammer_power_dbm + g_jam + g_rx_toward_jam - loss_jam
    interference_mw = np.asarray(dbm_to_mw(interference_dbm))
    noise_mw = dbm_to_mw(cfg.noise_power_dbm)

    # Directed UAV links over unordered pairs (iu, ju), both directions.
    iu, ju = np.triu_indices(n, 1)
    off = pos[..., ju, :] - pos[..., iu, :]                # (..., P, 2)
    d_pair = np.linalg.norm(off, axis=-1)                  # (..., P)
    bear_ij = np.degrees(np.arctan2(off[..., 1], off[..., 0]))   # i -> j
    bear_ji = np.degrees(np.arctan2(-off[..., 1], -off[..., 0]))  # j -> i
    chi_ij = chi_ji = 0.0
    if shadow_rng is not None and cfg.shadowing_sigma_db > 0:
        chi_ij = shadow_rng.normal(0.0, cfg.shadowing_sigma_db, size=d_pair.shape)
        chi_ji = shadow_rng.normal(0.0, cfg.shadowing_sigma_db, size=d_pair.shape)
    loss_ij = path_loss_db(_clamped_distance(d_pair, cfg), cfg, chi_ij)
    loss_ji = path_loss_db(_clamped_distance(d_pair, cfg), cfg, chi_ji)

    ang_i = ang[..., iu]
    ang_j = ang[..., ju]
    g_i_toward_j = antenna_gain_db(pattern, ang_i, bear_ij)
    g_j_toward_i = antenna_gain_db(pattern, ang_j, bear_ji)

    # Directed capacity i -> j: receiver is j.
    rx_ij_dbm = cfg.uav_tx_power_dbm + g_i_toward_j + g_j_toward_i - loss_ij
    rx_ji_dbm = cfg.uav_tx_power_dbm + g_j_toward_i + g_i_toward_j - loss_ji
    sinr_ij = np.asarray(dbm_to_mw(rx_ij_dbm)) / (interference_mw[..., ju] + noise_mw)
    sinr_ji = np.asarray(dbm_to_mw(rx_ji_dbm)) / (interference_mw[..., iu] + noise_mw)
    cap_ij = cfg.bandwidth_hz * np.log2(1.0 + sinr_ij)
    cap_ji = cfg.bandwidth_hz * np.log2(1.0 + sinr_ji)

    if edge_mode == EDGE_MODE_MIN:
        edges = np.minimum(cap_ij, cap_ji)
    elif edge_mode == EDGE_MODE_MEAN:
        edges = 0.5 * (cap_ij + cap_ji)
    elif edge_mode == EDGE_MODE_DIRECTED:
        edges = np.concatenate([cap_ij, cap_ji], axis=-1)
    else:
        raise ValueError("unknown edge_mode: %r" % edge_mode)

    c_avg = edges.mean(axis=-1)
    c_min = edges.min(axis=-1)
    fitness = np.power(c_avg, cfg.alpha) * np.power(c_min, cfg.beta)
    return edges, c_avg, c_min, fitness


def directed_capacity_bps(
    state: SwarmState,
    tx: int,
    rx: int,
    cfg: ScenarioConfig,
    shadow_rng: Optional[np.random.Generator] = None,
) -> float:
    """Capacity of the single directed link tx -> rx."""
    n = state.num_uavs
    if tx == rx or not (0 <= tx < n and 0 <= rx < n):
        raise IndexError("tx/rx must be distinct valid UAV indices")
    pos = state.positions
    pattern = uav_pattern(cfg)

    d = float(np.linalg.norm(pos[rx] - pos[tx]))
    chi = 0.0
    if shadow_rng is not None and cfg.shadowing_sigma_db > 0:
        chi = float(shadow_rng.normal(0.0, cfg.shadowing_sigma_db))
    loss = path_loss_db(max(d, cfg.ref_distance_m), cfg, chi)
    g_tx = antenna_gain_db(pattern, state.null_angles_deg[tx], bearing_deg(pos[tx], pos[rx]))
    g_rx = antenna_gain_db(pattern, state.null_angles_deg[rx], bearing_deg(pos[rx], pos[tx]))
    rx_dbm = cfg.uav_tx_power_dbm + g_tx + g_rx - loss

    jam = np.asarray(state.jammer, dtype=float)
    d_jam = float(np.linalg.norm(pos[rx] - jam))
    chi_jam = 0.0
    if shadow_rng is not None and cfg.shadowing_sigma_db > 0:
        chi_jam = float(shadow_rng.normal(0.0, cfg.shadowing_sigma_db))
    loss_jam = path_loss_db(max(d_jam, cfg.ref_distance_m), cfg, chi_jam)
    g_rx_toward_jam = antenna_gain_db(
        pattern, state.null_angles_deg[rx], bearing_deg(pos[rx], jam)
    )
    jp = cfg.jammer_pattern
    if jp.kind == "Isotropic":
        g_jam = jp.max_gain_db
    else:
        boresight = bearing_deg(jam, pos.mean(axis=0))
        g_jam = antenna_gain_db(_jammer_pattern(cfg), boresight, bearing_deg(jam, pos[rx]))
    interference_dbm = cfg.jammer_power_dbm + g_jam + g_rx_toward_jam - loss_jam

    sinr = dbm_to_mw(rx_dbm) / (dbm_to_mw(interference_dbm) + dbm_to_mw(cfg.noise_power_dbm))
    return float(cfg.bandwidth_hz * np.log2(1.0 + sinr))


def link_report(
    state: SwarmState,
    cfg: ScenarioConfig,
    edge_mode: str = EDGE_MODE_MIN,
    shadow_rng: Optional[np.random.Generator] = None,
) -> LinkReport:
    """Full swarm link graph for one timeslot state."""
    edges, c_avg, c_min, fitness = link_stats_batch(
        state.positions,
        state.null_angles_deg,
        np.asarray(state.jammer, dtype=float),
        cfg,
        edge_mode=edge_mode,
        shadow_rng=shadow_rng,
    )
    n = state.num_uavs
    iu, ju = np.triu_indices(n, 1)
    if edge_mode == EDGE_MODE_DIRECTED:
        keys = [(int(i), int(j)) for i, j in zip(iu, ju)]
        keys += [(int(j), int(i)) for i, j in zip(iu, ju)]
    else:
        keys = [(int(i), int(j)) for i, j in zip(iu, ju)]
    caps = {key: float(c) for key, c in zip(keys, np.atleast_1d(edges))}
    return LinkReport(caps, float(c_avg), float(c_min), float(fitness))


def null_at_jammer_angles(positions: np.ndarray, jammer) -> np.ndarray:
    """Null orientation policy: every UAV points its null at the jammer."""
    pos = np.asarray(positions, dtype=float)
    jam = np.asarray(jammer, dtype=float)
    return np.asarray(bearing_deg(pos, np.broadcast_to(jam, pos.shape)))


def epoch_objective(
    plan_block: np.ndarray,
    jammer,
    cfg: ScenarioConfig,
    edge_mode: str = EDGE_MODE_MIN,
    shadow_rng: Optional[np.random.Generator] = None,
) -> EpochObjective:
    """Score one epoch block (N, T+1, 2); slots 1..T, null-at-jammer policy."""
    block = np.asarray(plan_block, dtype=float)
    if block.ndim != 3 or block.shape[2] != 2 or block.shape[1] < 2:
        raise ValueError("plan block must be (N, T+1, 2) with T >= 1")
    jam = Vec2(float(np.asarray(jammer)[0]), float(np.asarray(jammer)[1]))
    reports = []
    for s in range(1, block.shape[1]):
        state = SwarmState(block[:, s, :], null_at_jammer_angles(block[:, s, :], jam), jam)
        reports.append(link_report(state, cfg, edge_mode=edge_mode, shadow_rng=shadow_rng))
    objective = float(np.mean([r.fitness for r in reports]))
    return EpochObjective(tuple(reports), objective)


def epoch_fitness_batch(
    blocks: np.ndarray,
    jammer,
    cfg: ScenarioConfig,
    edge_mode: str = EDGE_MODE_MIN,
) -> np.ndarray:
    """Mean per-slot fitness for stacks of epoch blocks (..., N, S, 2).

    Scores slots 1..S-1 under the null-at-jammer policy; deterministic
    (shadowing is a scalar-path feature and stays off here).
    """
    arr = np.asarray(blocks, dtype=float)
    if arr.ndim < 3 or arr.shape[-1] != 2 or arr.shape[-2] < 2:
        raise ValueError("blocks must be (..., N, S, 2) with S >= 2")
    scored = np.moveaxis(arr[..., 1:, :], -2, -3)          # (..., T, N, 2)
    jam = np.asarray(jammer, dtype=float)
    angles = np.asarray(
        bearing_deg(scored, np.broadcast_to(jam, scored.shape))
    )
    _, _, _, fitness = link_stats_batch(scored, angles, jam, cfg, edge_mode=edge_mode)
    return fitness.mean(axis=-1)
