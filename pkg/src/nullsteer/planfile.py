"""Plan files: one JSON header line, then one line per epoch block.

The header pins the config hash, swarm shape, rule, jammer, and the
adaptive rotation angle (null for canonical runs). Epoch lines carry the
(N, T+1, 2) block row-major as [uav][slot] = [x, y] plus the epoch fitness.
Reading rebuilds the TrajectoryPlan, which re-asserts the chaining equality.
"""

import json
from typing import Tuple

import numpy as np

from .config import ScenarioConfig, config_hash
from .state import TrajectoryPlan, Vec2


def write_plan(path, plan: TrajectoryPlan, jammer, cfg: ScenarioConfig) -> None:
    header = {
        "kind": "plan",
        "cfg_hash": config_hash(cfg),
        "n": cfg.num_uavs,
        "t": cfg.scored_slots,
        "rule": cfg.collision_rule.value,
        "jammer": [float(jammer[0]), float(jammer[1])],
        "rotation_angle_deg": plan.rotation_angle_deg,
        "completed": plan.completed,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for e, block in enumerate(plan.epochs):
            row = {
                "epoch": e,
                "fitness": plan.fitness_per_epoch[e],
                "block": np.asarray(block).tolist(),
            }
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")


def read_plan(path) -> Tuple[dict, TrajectoryPlan]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "plan":
            raise ValueError("not a plan file: %r" % (path,))
        blocks = []
        fits = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            blocks.append(np.asarray(row["block"], dtype=float))
            fits.append(float(row["fitness"]))
    rotation = header.get("rotation_angle_deg")
    plan = TrajectoryPlan(
        epochs=tuple(blocks),
        fitness_per_epoch=tuple(fits),
        rotation_angle_deg=None if rotation is None else float(rotation),
        completed=bool(header.get("completed", False)),
    )
    return header, plan


def plan_jammer(header: dict) -> Vec2:
    jx, jy = header["jammer"]
    return Vec2(float(jx), float(jy))
