"""Moving-corridor geometry, speed feasibility, and the collision rules.

The corridor advances along +y. Epoch e slot s occupies a cell_size square
whose longitudinal offset is e * advance + s * step, step = advance / T with
advance = epoch_length - cell_size; slot T of one epoch is exactly slot 0 of
the next, which is what lets missions chain epochs. Lateral bounds are fixed
at [0, cell_size].

Rule 1 permits all collisions, Rule 2 constrains the final slot, Rule 3
constrains every instant of the piecewise-linear motion via the closed-form
segment-pair minimum distance. A separation of exactly d_min is legal;
violations are strict '<'.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .config import CollisionRule, ScenarioConfig

# Slack absorbing last-ulp error from speed-limited step construction; far
# below any physical scale in the model.
SPEED_TOL_M = 1e-9

# Finding kinds.
NO_VIOLATION = "None"
FINAL_OVERLAP = "FinalOverlap"
TRAJECTORY_OVERLAP = "TrajectoryOverlap"
SPEED_VIOLATION = "SpeedViolation"
BOUNDS_VIOLATION = "BoundsViolation"


@dataclass(frozen=True)
class SlotCell:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def contains(self, point) -> bool:
        x, y = float(point[0]), float(point[1])
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def clamp(self, points: np.ndarray) -> np.ndarray:
        arr = np.asarray(points, dtype=float)
        lo = np.array([self.x_min, self.y_min])
        hi = np.array([self.x_max, self.y_max])
        return np.clip(arr, lo, hi)

    @property
    def center(self) -> Tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))


@dataclass(frozen=True)
class CollisionFinding:
    """Outcome of a plan check; kind == "None" means the plan is clean.

    pair is (i, j) for pairwise findings and (i, i) for single-UAV findings
    (speed, bounds). slot is the destination slot of the offending segment.
    min_dist_m carries the quantity that tripped the finding: the offending
    separation, the excess displacement, or the out-of-bounds excursion; for
    clean plans it is the smallest separation the active rule examined
    (inf when the rule examined none).
    """

    kind: str = NO_VIOLATION
    pair: Optional[Tuple[int, int]] = None
    slot: Optional[int] = None
    min_dist_m: float = math.inf

    def __bool__(self) -> bool:
        # Truthy when something was actually found, like re.match.
        return self.kind != NO_VIOLATION


def slot_cell(epoch: int, slot: int, cfg: ScenarioConfig) -> SlotCell:
    """Cell occupied at (epoch, slot); slot must lie in 0..T."""
    t = cfg.scored_slots
    if not 0 <= slot <= t:
        raise ValueError("slot %d out of range 0..%d" % (slot, t))
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    step = cfg.epoch_advance_m / t if t > 0 else 0.0
    lo = epoch * cfg.epoch_advance_m + slot * step
    return SlotCell(0.0, cfg.cell_size_m, lo, lo + cfg.cell_size_m)


def mission_band_for_target(target_y: float, cfg: ScenarioConfig) -> Tuple[float, float]:
    """Final-cell band of the first epoch whose end cell contains target_y."""
    advance = cfg.epoch_advance_m
    if advance <= 0:
        return (0.0, cfg.cell_size_m)
    k = max(1, math.ceil((target_y - cfg.cell_size_m) / advance))
    return (k * advance, k * advance + cfg.cell_size_m)


def speed_feasible(p_a, p_b, cfg: ScenarioConfig) -> bool:
    """True iff the displacement fits in one timeslot at v_max."""
    d = math.hypot(float(p_b[0]) - float(p_a[0]), float(p_b[1]) - float(p_a[1]))
    return d <= cfg.max_step_m + SPEED_TOL_M


def segment_pair_min_distance(a0, a1, b0, b1) -> float:
    """Minimum distance between two synchronously traversed segments.

    Both agents move linearly over s in [0, 1]; the squared gap is quadratic
    in s, so the minimum is at the clamped vertex.
    """
    return float(
        segment_pair_min_distance_batch(
            np.asarray(a0, float), np.asarray(a1, float),
            np.asarray(b0, float), np.asarray(b1, float),
        )
    )


def segment_pair_min_distance_batch(a0, a1, b0, b1) -> np.ndarray:
    """Vectorized segment_pair_min_distance over (..., 2) endpoint arrays."""
    r0 = np.asarray(a0, float) - np.asarray(b0, float)
    v = (np.asarray(a1, float) - np.asarray(a0, float)) - (
        np.asarray(b1, float) - np.asarray(b0, float)
    )
    vv = np.sum(v * v, axis=-1)
    rv = np.sum(r0 * v, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(vv > 0, -rv / np.where(vv > 0, vv, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    gap = r0 + s[..., None] * v
    return np.sqrt(np.sum(gap * gap, axis=-1))


def clamp_step(prev, target, cell: SlotCell, limit_m: float) -> np.ndarray:
    """Pull target into the cell and onto the speed disc around prev.

    First clamps target to the cell; if the clamped point is farther than
    limit_m from prev, walks it back along the in-cell segment toward
    clamp(prev) until the limit is met. Returns clamp(prev) outright when
    even that anchor exceeds the limit (infeasible corridor configuration;
    the plan checker will flag it).
    """
    prev = np.asarray(prev, dtype=float)
    q = cell.clamp(target)
    delta = q - prev
    if np.linalg.norm(delta) <= limit_m:
        return q
    anchor = cell.clamp(prev)
    w = anchor - prev
    wlen = float(np.linalg.norm(w))
    if wlen > limit_m:
        return anchor
    u = q - anchor
    uu = float(np.dot(u, u))
    if uu == 0.0:
        return anchor
    # Largest t in [0, 1] with |w + t u| = limit; f(0) <= 0 <= f(1) holds here.
    b = 2.0 * float(np.dot(w, u))
    c = float(np.dot(w, w)) - limit_m * limit_m
    disc = max(b * b - 4.0 * uu * c, 0.0)
    t = (-b + math.sqrt(disc)) / (2.0 * uu)
    t = min(max(t, 0.0), 1.0)
    return anchor + t * u


def rotate_about(points, center, angle_deg: float) -> np.ndarray:
    """Rotate (..., 2) points CCW about center; angle 0 is a strict no-op."""
    arr = np.asarray(points, dtype=float)
    if angle_deg == 0.0:
        return arr.copy()
    ctr = np.asarray(center, dtype=float)
    rad = math.radians(angle_deg)
    cos, sin = math.cos(rad), math.sin(rad)
    rel = arr - ctr
    out = np.empty_like(rel)
    out[..., 0] = cos * rel[..., 0] - sin * rel[..., 1]
    out[..., 1] = sin * rel[..., 0] + cos * rel[..., 1]
    return out + ctr


def _bounds_excursion(block: np.ndarray, cfg: ScenarioConfig, epoch: int) -> np.ndarray:
    """Distance of each (uav, slot) position outside its slot cell."""
    n, slots, _ = block.shape
    out = np.zeros((n, slots))
    for s in range(slots):
        cell = slot_cell(epoch, s, cfg)
        lo = np.array([cell.x_min, cell.y_min])
        hi = np.array([cell.x_max, cell.y_max])
        below = np.maximum(lo - block[:, s, :], 0.0)
        above = np.maximum(block[:, s, :] - hi, 0.0)
        out[:, s] = np.linalg.norm(below + above, axis=-1)
    return out


def check_plan(block, cfg: ScenarioConfig, epoch: int = 0) -> CollisionFinding:
    """Check one epoch block (N, T+1, 2) under the active collision rule.

    Speed and slot-cell bounds are always checked; the rule adds its
    distance constraints. The first finding wins, scanned deterministically:
    bounds (uav-major, slots ascending), then speed, then the rule's checks
    (pairs lexicographic, slots ascending within a pair).
    """
    arr = np.asarray(block, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("block must be (N, T+1, 2), got %r" % (arr.shape,))
    n, slots, _ = arr.shape

    excursion = _bounds_excursion(arr, cfg, epoch)
    for i in range(n):
        for s in range(slots):
            if excursion[i, s] > 0.0:
                return CollisionFinding(BOUNDS_VIOLATION, (i, i), s, float(excursion[i, s]))

    limit = cfg.max_step_m + SPEED_TOL_M
    steps = np.linalg.norm(np.diff(arr, axis=1), axis=-1)  # (N, T)
    for i in range(n):
        for s in range(1, slots):
            if steps[i, s - 1] > limit:
                return CollisionFinding(SPEED_VIOLATION, (i, i), s, float(steps[i, s - 1]))

    rule = cfg.collision_rule
    if rule == CollisionRule.RULE1 or n < 2:
        return CollisionFinding()

    d_min = cfg.min_separation_m
    checked = math.inf
    if rule == CollisionRule.RULE2:
        final = arr[:, -1, :]
        for i in range(n):
            for j in range(i + 1, n):
                d = float(np.linalg.norm(final[i] - final[j]))
                checked = min(checked, d)
                if d < d_min:
                    return CollisionFinding(FINAL_OVERLAP, (i, j), slots - 1, d)
        return CollisionFinding(min_dist_m=checked)

    # Rule 3: every pair, every consecutive-slot segment. A single-slot block
    # has no segments; separation is enforced at the lone instant instead.
    if slots == 1:
        for i in range(n):
            for j in range(i + 1, n):
                d = float(np.linalg.norm(arr[i, 0] - arr[j, 0]))
                checked = min(checked, d)
                if d < d_min:
                    return CollisionFinding(TRAJECTORY_OVERLAP, (i, j), 0, d)
        return CollisionFinding(min_dist_m=checked)
    for i in range(n):
        for j in range(i + 1, n):
            for s in range(1, slots):
                d = segment_pair_min_distance(
                    arr[i, s - 1], arr[i, s], arr[j, s - 1], arr[j, s]
                )
                checked = min(checked, d)
                if d < d_min:
                    return CollisionFinding(TRAJECTORY_OVERLAP, (i, j), s, d)
    return CollisionFinding(min_dist_m=checked)


def check_plan_ok_batch(blocks, cfg: ScenarioConfig, epoch: int = 0) -> np.ndarray:
    """Vectorized feasibility mask for stacks of epoch blocks (..., N, S, 2).

    True where check_plan would report no finding; used by the optimizer's
    zero-fitness penalty. Agrees with check_plan by construction (same
    bounds, speed, and rule arithmetic).
    """
    arr = np.asarray(blocks, dtype=float)
    if arr.ndim < 3 or arr.shape[-1] != 2:
        raise ValueError("blocks must be (..., N, S, 2)")
    n, slots = arr.shape[-3], arr.shape[-2]
    batch = arr.shape[:-3]
    ok = np.ones(batch, dtype=bool)

    for s in range(slots):
        cell = slot_cell(epoch, s, cfg)
        p = arr[..., s, :]
        inside = (
            (p[..., 0] >= cell.x_min)
            & (p[..., 0] <= cell.x_max)
            & (p[..., 1] >= cell.y_min)
            & (p[..., 1] <= cell.y_max)
        )
        ok &= inside.all(axis=-1)

    limit = cfg.max_step_m + SPEED_TOL_M
    steps = np.linalg.norm(np.diff(arr, axis=-2), axis=-1)  # (..., N, S-1)
    ok &= (steps <= limit).all(axis=(-1, -2))

    rule = cfg.collision_rule
    if rule == CollisionRule.RULE1 or n < 2:
        return ok
    iu, ju = np.triu_indices(n, 1)
    d_min = cfg.min_separation_m
    if rule == CollisionRule.RULE2:
        final = arr[..., -1, :]
        gap = np.linalg.norm(final[..., iu, :] - final[..., ju, :], axis=-1)
        ok &= (gap >= d_min).all(axis=-1)
        return ok
    if slots == 1:
        p = arr[..., 0, :]
        gap = np.linalg.norm(p[..., iu, :] - p[..., ju, :], axis=-1)
        ok &= (gap >= d_min).all(axis=-1)
        return ok
    a0 = arr[..., iu, :-1, :]
    a1 = arr[..., iu, 1:, :]
    b0 = arr[..., ju, :-1, :]
    b1 = arr[..., ju, 1:, :]
    dist = segment_pair_min_distance_batch(a0, a1, b0, b1)  # (..., P, S-1)
    ok &= (dist >= d_min).all(axis=(-1, -2))
    return ok
