"""Single-epoch decision process over the corridor cells.

Episodes run one epoch: T position-adjustment steps, orientations pinned to
the null-at-jammer policy. Actions are componentwise fractions of the per-
slot speed budget; the realized step is projected into the next slot cell
and the Euclidean speed disc, so every emitted trajectory passes the same
checker the optimizer uses. Rewards are slot fitness over reward_scale;
Rule 3 violations end the episode with zero reward, Rule 2 zeroes the final
reward only.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .config import CollisionRule, ScenarioConfig, make_default_config, substream
from .motion import clamp_step, segment_pair_min_distance, slot_cell
from .objective import link_report, null_at_jammer_angles
from .state import SwarmState, Vec2, as_position_array

RANDOMIZE_FIXED = "Fixed"
RANDOMIZE_RANDOMIZED = "Randomized"
EPISODE_SINGLE_EPOCH = "SingleEpoch"

JAMMER_NORM_RANGE_M = 500.0  # m, divisor for the jammer offset feature
CAP_LOG_SCALE = 0.1  # multiplier on log10(1 + C_ij)
DEFAULT_REWARD_SCALE = 1e6
RESET_MAX_TRIES = 1000


@dataclass(frozen=True)
class EnvConfig:
    base: ScenarioConfig = field(default_factory=make_default_config)
    randomize: str = RANDOMIZE_RANDOMIZED
    fixed_initials: Optional[np.ndarray] = None
    fixed_jammer: Optional[Vec2] = None
    reward_scale: float = DEFAULT_REWARD_SCALE
    episode_mode: str = EPISODE_SINGLE_EPOCH
    jammer_x_range: Tuple[float, float] = (0.0, 60.0)
    jammer_y_range: Tuple[float, float] = (500.0, 500.0)

    def __post_init__(self):
        if self.randomize not in (RANDOMIZE_FIXED, RANDOMIZE_RANDOMIZED):
            raise ValueError("randomize must be Fixed or Randomized")
        if self.episode_mode != EPISODE_SINGLE_EPOCH:
            raise ValueError("only SingleEpoch episodes are supported")
        if self.reward_scale <= 0:
            raise ValueError("reward_scale must be positive")
        if self.randomize == RANDOMIZE_FIXED:
            if self.fixed_initials is None or self.fixed_jammer is None:
                raise ValueError("Fixed mode requires fixed_initials and fixed_jammer")
            pos = as_position_array(self.fixed_initials, self.base.num_uavs)
            pos.setflags(write=False)
            object.__setattr__(self, "fixed_initials", pos)
            object.__setattr__(
                self,
                "fixed_jammer",
                Vec2(float(self.fixed_jammer[0]), float(self.fixed_jammer[1])),
            )


@dataclass(frozen=True)
class Observation:
    uav_positions_norm: np.ndarray  # (2N,), position within the current cell
    jammer_rel_norm: np.ndarray  # (2,), offset from cell center / norm range
    slot_index_norm: float
    edge_capacities_log: np.ndarray  # (N(N-1)/2,)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                self.uav_positions_norm,
                self.jammer_rel_norm,
                [self.slot_index_norm],
                self.edge_capacities_log,
            ]
        )


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict


class Env:
    """Strictly sequential single-episode environment; reset() starts over."""

    def __init__(self, env_cfg: EnvConfig):
        self.env_cfg = env_cfg
        self.cfg = env_cfg.base
        self._positions = None  # (N, slot+1, 2) realized so far
        self._jammer = None
        self._slot = 0
        self._done = True

    @property
    def slot(self) -> int:
        return self._slot

    @property
    def done(self) -> bool:
        return self._done

    @property
    def num_steps(self) -> int:
        return self.cfg.scored_slots

    def realized_block(self) -> np.ndarray:
        """Trajectory so far, (N, slots_taken + 1, 2)."""
        if self._positions is None:
            raise RuntimeError("reset the environment first")
        return self._positions.copy()

    @property
    def jammer(self) -> Vec2:
        if self._jammer is None:
            raise RuntimeError("reset the environment first")
        return self._jammer

    def reset(self, seed: int) -> Observation:
        cfg = self.cfg
        ec = self.env_cfg
        if ec.randomize == RANDOMIZE_FIXED:
            initials = ec.fixed_initials.copy()
            jammer = ec.fixed_jammer
        else:
            rng = substream(seed, "env")
            cell = slot_cell(0, 0, cfg)
            need_sep = cfg.collision_rule == CollisionRule.RULE3 and cfg.num_uavs > 1
            for _ in range(RESET_MAX_TRIES):
                initials = np.column_stack(
                    [
                        rng.uniform(cell.x_min, cell.x_max, cfg.num_uavs),
                        rng.uniform(cell.y_min, cell.y_max, cfg.num_uavs),
                    ]
                )
                if not need_sep or self._pairwise_min(initials) >= cfg.min_separation_m:
                    break
            else:
                raise RuntimeError("could not draw a separated initial formation")
            jammer = Vec2(
                float(rng.uniform(*ec.jammer_x_range)),
                float(rng.uniform(*ec.jammer_y_range)),
            )
        self._positions = initials[:, None, :].copy()
        self._jammer = jammer
        self._slot = 0
        self._done = False
        return self._observe()

    @staticmethod
    def _pairwise_min(positions: np.ndarray) -> float:
        iu, ju = np.triu_indices(positions.shape[0], 1)
        return float(np.linalg.norm(positions[iu] - positions[ju], axis=1).min())

    def _observe(self) -> Observation:
        cfg = self.cfg
        cell = slot_cell(0, self._slot, cfg)
        pos = self._positions[:, -1, :]
        norm = (pos - [cell.x_min, cell.y_min]) / cfg.cell_size_m
        jam = np.asarray(self._jammer, dtype=float)
        jam_rel = (jam - np.asarray(cell.center)) / JAMMER_NORM_RANGE_M
        report = self._report(pos)
        caps = np.array(
            [report.edge_capacities_bps[k] for k in sorted(report.edge_capacities_bps)]
        )
        return Observation(
            uav_positions_norm=norm.reshape(-1),
            jammer_rel_norm=jam_rel,
            slot_index_norm=self._slot / cfg.scored_slots,
            edge_capacities_log=CAP_LOG_SCALE * np.log10(1.0 + caps),
        )

    def _report(self, positions: np.ndarray):
        angles = null_at_jammer_angles(positions, self._jammer)
        state = SwarmState(positions, angles, self._jammer)
        return link_report(state, self.cfg)

    def step(self, action) -> StepResult:
        if self._done or self._positions is None:
            raise RuntimeError("episode is done; reset the environment")
        cfg = self.cfg
        n, t = cfg.num_uavs, cfg.scored_slots
        act = np.clip(np.asarray(action, dtype=float).reshape(-1), -1.0, 1.0)
        if act.shape[0] != 2 * n:
            raise ValueError("action must have 2N = %d components" % (2 * n))

        prev = self._positions[:, -1, :]
        disp = act.reshape(n, 2) * cfg.max_step_m
        next_slot = self._slot + 1
        cell = slot_cell(0, next_slot, cfg)
        new = np.empty_like(prev)
        for i in range(n):
            new[i] = clamp_step(prev[i], prev[i] + disp[i], cell, cfg.max_step_m)

        violation = None
        if cfg.collision_rule == CollisionRule.RULE3 and n > 1:
            for i in range(n):
                for j in range(i + 1, n):
                    d = segment_pair_min_distance(prev[i], new[i], prev[j], new[j])
                    if d < cfg.min_separation_m:
                        violation = "TrajectoryOverlap"
                        break
                if violation:
                    break

        self._positions = np.concatenate([self._positions, new[:, None, :]], axis=1)
        self._slot = next_slot

        report = self._report(new)
        fitness = report.fitness
        reward = fitness / self.env_cfg.reward_scale
        done = next_slot == t
        if violation is not None:
            reward = 0.0
            done = True
        elif done and cfg.collision_rule == CollisionRule.RULE2 and n > 1:
            if self._pairwise_min(new) < cfg.min_separation_m:
                violation = "FinalOverlap"
                reward = 0.0
        self._done = done
        info = {"fitness": fitness, "slot": next_slot, "violation": violation}
        return StepResult(self._observe(), float(reward), done, info)
