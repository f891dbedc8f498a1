"""Shared value types: positions, swarm snapshots, and multi-epoch plans.

Positions are plain (x, y) meters. Matrix-shaped data is stored as numpy
arrays with the convention block[uav, slot] = (x, y); arrays are flagged
read-only after construction so instances can be shared freely.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .config import wrap_angle_deg


class Vec2(NamedTuple):
    x: float
    y: float


def as_position_array(points, n: Optional[int] = None) -> np.ndarray:
    """Coerce a sequence of (x, y) into a float (len, 2) array, validated."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected shape (n, 2), got %r" % (arr.shape,))
    if n is not None and arr.shape[0] != n:
        raise ValueError("expected %d positions, got %d" % (n, arr.shape[0]))
    if not np.all(np.isfinite(arr)):
        raise ValueError("positions must be finite")
    return arr


@dataclass(frozen=True)
class SwarmState:
    """One timeslot snapshot: UAV positions, null orientations, jammer."""

    positions: np.ndarray        # (N, 2) meters
    null_angles_deg: np.ndarray  # (N,) degrees in [0, 360)
    jammer: Vec2

    def __post_init__(self):
        pos = as_position_array(self.positions)
        ang = np.array(
            [wrap_angle_deg(float(a)) for a in np.asarray(self.null_angles_deg, dtype=float)]
        )
        if ang.shape != (pos.shape[0],):
            raise ValueError(
                "need one null angle per UAV: %r vs %d UAVs" % (ang.shape, pos.shape[0])
            )
        jam = Vec2(float(self.jammer[0]), float(self.jammer[1]))
        if not (np.isfinite(jam.x) and np.isfinite(jam.y)):
            raise ValueError("jammer position must be finite")
        pos.setflags(write=False)
        ang.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "null_angles_deg", ang)
        object.__setattr__(self, "jammer", jam)

    @property
    def num_uavs(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class TrajectoryPlan:
    """Best Solution Matrix: per-epoch N x (T+1) position blocks.

    Column 0 of each epoch holds that epoch's initial positions; column T of
    epoch e must equal column 0 of epoch e+1 exactly (final positions define
    the next initial conditions). ``completed`` records whether the mission
    reached its target band before the epoch limit.
    """

    epochs: tuple                     # tuple of (N, T+1, 2) arrays
    fitness_per_epoch: tuple          # one value per epoch, all >= 0
    rotation_angle_deg: Optional[float] = None
    completed: bool = True

    def __post_init__(self):
        blocks = []
        for k, block in enumerate(self.epochs):
            arr = np.asarray(block, dtype=float)
            if arr.ndim != 3 or arr.shape[2] != 2:
                raise ValueError("epoch %d: expected (N, T+1, 2), got %r" % (k, arr.shape))
            if not np.all(np.isfinite(arr)):
                raise ValueError("epoch %d: positions must be finite" % k)
            arr.setflags(write=False)
            blocks.append(arr)
        fitness = tuple(float(f) for f in self.fitness_per_epoch)
        if len(fitness) != len(blocks):
            raise ValueError(
                "fitness_per_epoch length %d != num epochs %d" % (len(fitness), len(blocks))
            )
        if any(f < 0 for f in fitness):
            raise ValueError("fitness values must be >= 0")
        for k in range(len(blocks) - 1):
            if blocks[k].shape != blocks[k + 1].shape:
                raise ValueError("epoch blocks must share one shape")
            if not np.array_equal(blocks[k][:, -1, :], blocks[k + 1][:, 0, :]):
                raise ValueError(
                    "epoch %d final positions must equal epoch %d initials exactly"
                    % (k, k + 1)
                )
        object.__setattr__(self, "epochs", tuple(blocks))
        object.__setattr__(self, "fitness_per_epoch", fitness)

    @property
    def num_epochs(self) -> int:
        return len(self.epochs)

    def final_positions(self) -> np.ndarray:
        if not self.epochs:
            raise ValueError("plan has no epochs")
        return self.epochs[-1][:, -1, :]

    def objective(self) -> float:
        """Mean per-epoch fitness over the whole mission."""
        if not self.fitness_per_epoch:
            return 0.0
        return float(np.mean(self.fitness_per_epoch))
