"""Real-coded GA over the three scenario families, plus mission chaining.

Modes:
  OrientationOnly    - N null-angle genes, positions fixed (static formation).
  JointStatic        - N triples (x, y, theta gene) inside the start cell.
  PositionProgressing- N x T slot positions; orientations follow the
                       null-at-jammer policy.

Angle genes are signed offsets from the UAV's bearing to the jammer, so a
zero gene decodes to a null aimed exactly at the jammer. An absolute-angle
encoding is unsearchable here: at the default jammer power the fitness ridge
is only a fraction of a degree wide, and Gaussian mutation essentially never
lands on it. The offset encoding is the same search space under a coordinate
change that keeps the ridge at the origin.

Constraint handling is a zero-fitness penalty over clamped decodes: genes are
clamped into their slot cells (angle offsets wrapped), then speed/bounds and
the active collision rule are checked; any finding zeroes the fitness.
Initial populations are uniform except for one heuristic individual at the
null-toward-jammer configuration (elitism then pins the best-ever fitness at
or above that baseline); progressing populations are built speed-feasible by
a random walk (uniform genes are almost never speed-feasible across a whole
epoch), with greedy separation resampling under Rules 2 and 3.
"""

import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .config import CollisionRule, ScenarioConfig, substream, wrap_angle_deg
from .motion import (
    check_plan_ok_batch,
    clamp_step,
    mission_band_for_target,
    rotate_about,
    segment_pair_min_distance,
    slot_cell,
)
from .objective import (
    bearing_deg,
    epoch_fitness_batch,
    link_stats_batch,
    null_at_jammer_angles,
)
from .radio import signed_offset_deg
from .state import TrajectoryPlan, Vec2, as_position_array

MODE_ORIENTATION_ONLY = "OrientationOnly"
MODE_JOINT_STATIC = "JointStatic"
MODE_POSITION_PROGRESSING = "PositionProgressing"
MODES = (MODE_ORIENTATION_ONLY, MODE_JOINT_STATIC, MODE_POSITION_PROGRESSING)

INIT_MAX_TRIES = 100
DEFAULT_MAX_EPOCHS = 32
MISSION_EPOCH_MAX_TRIES = 8  # fresh optimizer runs before a mission epoch gives up


@dataclass(frozen=True)
class GaParams:
    population_size: int = 50
    generations: int = 50
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma_frac: float = 0.1  # fraction of cell span, all gene kinds
    elitism: int = 2
    mode: str = MODE_ORIENTATION_ONLY

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be in [0, population_size)")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError("%s must be in [0, 1]" % name)
        if self.mutation_sigma_frac < 0:
            raise ValueError("mutation_sigma_frac must be >= 0")
        if self.mode not in MODES:
            raise ValueError("unknown mode: %r" % self.mode)


@dataclass(frozen=True)
class GaContext:
    """Fixed problem data one GA run optimizes against."""

    initial_positions: np.ndarray  # (N, 2), slot-0 positions
    jammer: Vec2
    cfg: ScenarioConfig
    epoch: int = 0

    def __post_init__(self):
        pos = as_position_array(self.initial_positions, self.cfg.num_uavs)
        pos.setflags(write=False)
        object.__setattr__(self, "initial_positions", pos)
        object.__setattr__(
            self, "jammer", Vec2(float(self.jammer[0]), float(self.jammer[1]))
        )


@dataclass(frozen=True)
class GaResult:
    best_genome: np.ndarray
    best_fitness: float
    fitness_history: tuple  # best-so-far after init and after each generation
    evaluations: int
    wall_time_s: float


def genome_length(params: GaParams, ctx: GaContext) -> int:
    n = ctx.cfg.num_uavs
    if params.mode == MODE_ORIENTATION_ONLY:
        return n
    if params.mode == MODE_JOINT_STATIC:
        return 3 * n
    t = ctx.cfg.scored_slots
    if t < 1:
        raise ValueError("PositionProgressing needs slots_per_epoch >= 2")
    return n * t * 2


# --- decoding ---------------------------------------------------------------

def _decode_angles(offsets: np.ndarray, positions: np.ndarray, jammer) -> np.ndarray:
    """Null angles from offset genes: jammer bearing plus the signed offset."""
    base = null_at_jammer_angles(positions, jammer)
    return np.mod(base + offsets, 360.0)


def decode_static(genome: np.ndarray, params: GaParams, ctx: GaContext):
    """Genome -> (positions (N, 2), null angles (N,)) for the static modes."""
    n = ctx.cfg.num_uavs
    genes = np.asarray(genome, dtype=float)
    cell = slot_cell(ctx.epoch, 0, ctx.cfg)
    if params.mode == MODE_ORIENTATION_ONLY:
        positions = ctx.initial_positions.copy()
        return positions, _decode_angles(genes.reshape(n), positions, ctx.jammer)
    if params.mode != MODE_JOINT_STATIC:
        raise ValueError("decode_static needs a static mode")
    triples = genes.reshape(n, 3)
    positions = cell.clamp(triples[:, :2])
    return positions, _decode_angles(triples[:, 2], positions, ctx.jammer)


def decode_progressing(genome: np.ndarray, ctx: GaContext) -> np.ndarray:
    """Genome -> full epoch block (N, T+1, 2) with slot 0 = the initials."""
    cfg = ctx.cfg
    n, t = cfg.num_uavs, cfg.scored_slots
    genes = np.asarray(genome, dtype=float).reshape(n, t, 2)
    block = np.empty((n, t + 1, 2))
    block[:, 0, :] = ctx.initial_positions
    for s in range(1, t + 1):
        block[:, s, :] = slot_cell(ctx.epoch, s, cfg).clamp(genes[:, s - 1, :])
    return block


def _static_feasible(positions: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """Pairwise-separation mask for stacks of static formations (..., N, 2)."""
    if cfg.collision_rule == CollisionRule.RULE1 or cfg.num_uavs < 2:
        return np.ones(positions.shape[:-2], dtype=bool)
    iu, ju = np.triu_indices(cfg.num_uavs, 1)
    gap = np.linalg.norm(positions[..., iu, :] - positions[..., ju, :], axis=-1)
    return (gap >= cfg.min_separation_m).all(axis=-1)


def evaluate_batch(genomes: np.ndarray, params: GaParams, ctx: GaContext) -> np.ndarray:
    """Fitness for a stack of genomes (M, G); infeasible decodes score 0."""
    cfg = ctx.cfg
    n = cfg.num_uavs
    genes = np.asarray(genomes, dtype=float)
    if genes.ndim != 2 or genes.shape[1] != genome_length(params, ctx):
        raise ValueError("genomes must be (M, %d)" % genome_length(params, ctx))
    m = genes.shape[0]
    jam = np.asarray(ctx.jammer, dtype=float)

    if params.mode == MODE_POSITION_PROGRESSING:
        t = cfg.scored_slots
        blocks = np.empty((m, n, t + 1, 2))
        blocks[:, :, 0, :] = ctx.initial_positions
        slots = genes.reshape(m, n, t, 2)
        for s in range(1, t + 1):
            blocks[:, :, s, :] = slot_cell(ctx.epoch, s, cfg).clamp(slots[:, :, s - 1, :])
        ok = check_plan_ok_batch(blocks, cfg, epoch=ctx.epoch)
        fitness = epoch_fitness_batch(blocks, jam, cfg)
        return np.where(ok, fitness, 0.0)

    if params.mode == MODE_ORIENTATION_ONLY:
        positions = np.broadcast_to(ctx.initial_positions, (m, n, 2))
        angles = _decode_angles(genes.reshape(m, n), positions, jam)
    else:
        triples = genes.reshape(m, n, 3)
        cell = slot_cell(ctx.epoch, 0, cfg)
        positions = cell.clamp(triples[:, :, :2])
        angles = _decode_angles(triples[:, :, 2], positions, jam)
    ok = _static_feasible(positions, cfg)
    _, _, _, fitness = link_stats_batch(positions, angles, jam, cfg)
    return np.where(ok, fitness, 0.0)


def evaluate(genome: np.ndarray, params: GaParams, ctx: GaContext) -> float:
    """Single-genome fitness; identical to the batched path."""
    return float(evaluate_batch(np.asarray(genome, dtype=float)[None, :], params, ctx)[0])


# --- population construction ------------------------------------------------

def _uniform_disc(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random())
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return np.array([r * np.cos(phi), r * np.sin(phi)])


def _walk_genome(params: GaParams, ctx: GaContext, rng: np.random.Generator) -> np.ndarray:
    """Speed-feasible random-walk trajectory genome, greedy under Rules 2/3."""
    cfg = ctx.cfg
    n, t = cfg.num_uavs, cfg.scored_slots
    rule = cfg.collision_rule
    limit = cfg.max_step_m
    prev = ctx.initial_positions.copy()
    out = np.empty((n, t, 2))
    for s in range(1, t + 1):
        cell = slot_cell(ctx.epoch, s, cfg)
        nxt = np.empty((n, 2))
        for i in range(n):
            cand = None
            for _ in range(INIT_MAX_TRIES):
                cand = clamp_step(prev[i], prev[i] + _uniform_disc(rng, limit), cell, limit)
                clear = True
                if rule == CollisionRule.RULE3:
                    for j in range(i):
                        d = segment_pair_min_distance(prev[i], cand, prev[j], nxt[j])
                        if d < cfg.min_separation_m:
                            clear = False
                            break
                elif rule == CollisionRule.RULE2 and s == t:
                    for j in range(i):
                        if np.linalg.norm(cand - nxt[j]) < cfg.min_separation_m:
                            clear = False
                            break
                if clear:
                    break
            nxt[i] = cand
        out[:, s - 1, :] = nxt
        prev = nxt
    return out.reshape(-1)


def init_population(params: GaParams, ctx: GaContext, rng: np.random.Generator) -> np.ndarray:
    cfg = ctx.cfg
    n = cfg.num_uavs
    pop = params.population_size
    if params.mode == MODE_ORIENTATION_ONLY:
        genomes = rng.uniform(-180.0, 180.0, size=(pop, n))
        genomes[0] = 0.0  # heuristic individual: nulls exactly at the jammer
        return genomes
    if params.mode == MODE_JOINT_STATIC:
        cell = slot_cell(ctx.epoch, 0, cfg)
        genomes = np.empty((pop, 3 * n))
        need_sep = cfg.collision_rule != CollisionRule.RULE1
        for k in range(pop):
            positions = None
            for _ in range(INIT_MAX_TRIES):
                positions = np.column_stack(
                    [
                        rng.uniform(cell.x_min, cell.x_max, n),
                        rng.uniform(cell.y_min, cell.y_max, n),
                    ]
                )
                if not need_sep or bool(_static_feasible(positions, cfg)):
                    break
            triples = np.column_stack([positions, rng.uniform(-180.0, 180.0, n)])
            genomes[k] = triples.reshape(-1)
        # heuristic individual: stay at the initials, nulls at the jammer
        genomes[0] = np.column_stack(
            [ctx.initial_positions, np.zeros(n)]
        ).reshape(-1)
        return genomes
    return np.stack([_walk_genome(params, ctx, rng) for _ in range(pop)])


def _wrap_offset(values: np.ndarray) -> np.ndarray:
    return np.mod(values + 180.0, 360.0) - 180.0


def _normalize(genes: np.ndarray, params: GaParams, ctx: GaContext) -> np.ndarray:
    """Clamp positions into their cells and wrap angle offsets, in place."""
    cfg = ctx.cfg
    n = cfg.num_uavs
    if params.mode == MODE_ORIENTATION_ONLY:
        return _wrap_offset(genes)
    if params.mode == MODE_JOINT_STATIC:
        cell = slot_cell(ctx.epoch, 0, cfg)
        triples = genes.reshape(-1, n, 3)
        triples[:, :, :2] = cell.clamp(triples[:, :, :2])
        triples[:, :, 2] = _wrap_offset(triples[:, :, 2])
        return triples.reshape(genes.shape)
    t = cfg.scored_slots
    slots = genes.reshape(-1, n, t, 2)
    for s in range(1, t + 1):
        slots[:, :, s - 1, :] = slot_cell(ctx.epoch, s, cfg).clamp(slots[:, :, s - 1, :])
    return slots.reshape(genes.shape)


def _sigma_vector(params: GaParams, ctx: GaContext) -> np.ndarray:
    """Per-gene mutation sigma: the same cell-span fraction for every gene."""
    sigma = params.mutation_sigma_frac * ctx.cfg.cell_size_m
    return np.full(genome_length(params, ctx), sigma)


def _tournament(fitness: np.ndarray, rng: np.random.Generator, k: int) -> int:
    idx = rng.integers(0, fitness.shape[0], size=k)
    return int(idx[np.argmax(fitness[idx])])


def _run_ga(params: GaParams, ctx: GaContext, rng: np.random.Generator,
            progress: Optional[Callable[[int, float], None]] = None) -> GaResult:
    started = time.perf_counter()
    glen = genome_length(params, ctx)
    sigma = _sigma_vector(params, ctx)
    population = init_population(params, ctx, rng)
    fitness = evaluate_batch(population, params, ctx)
    evaluations = params.population_size

    best_idx = int(np.argmax(fitness))
    best_genome = population[best_idx].copy()
    best_fitness = float(fitness[best_idx])
    history = [best_fitness]
    if progress is not None:
        progress(0, best_fitness)

    for gen in range(1, params.generations + 1):
        order = np.argsort(-fitness, kind="stable")
        nxt = [population[i].copy() for i in order[: params.elitism]]
        while len(nxt) < params.population_size:
            a = population[_tournament(fitness, rng, params.tournament_size)]
            b = population[_tournament(fitness, rng, params.tournament_size)]
            c1, c2 = a.copy(), b.copy()
            if rng.random() < params.crossover_rate:
                swap = rng.random(glen) < 0.5
                c1[swap], c2[swap] = b[swap], a[swap]
            for child in (c1, c2):
                mask = rng.random(glen) < params.mutation_rate
                noise = rng.normal(0.0, 1.0, glen) * sigma
                child[mask] += noise[mask]
                if len(nxt) < params.population_size:
                    nxt.append(child)
        population = _normalize(np.stack(nxt), params, ctx)
        fitness = evaluate_batch(population, params, ctx)
        evaluations += params.population_size

        gen_best = int(np.argmax(fitness))
        if float(fitness[gen_best]) > best_fitness:
            best_fitness = float(fitness[gen_best])
            best_genome = population[gen_best].copy()
        history.append(best_fitness)
        if progress is not None:
            progress(gen, best_fitness)

    return GaResult(
        best_genome=best_genome,
        best_fitness=best_fitness,
        fitness_history=tuple(history),
        evaluations=evaluations,
        wall_time_s=time.perf_counter() - started,
    )


def run_ga(params: GaParams, ctx: GaContext, seed: int,
           progress: Optional[Callable[[int, float], None]] = None) -> GaResult:
    """Deterministic GA run; same seed gives the same result (wall time aside)."""
    return _run_ga(params, ctx, substream(seed, "ga"), progress)


# --- multi-epoch missions ---------------------------------------------------

def _check_start(initials: np.ndarray, cfg: ScenarioConfig) -> None:
    cell = slot_cell(0, 0, cfg)
    for i, p in enumerate(initials):
        if not cell.contains(p):
            raise ValueError(
                "infeasible start: UAV %d at (%r, %r) outside the slot-0 cell"
                % (i, float(p[0]), float(p[1]))
            )
    if cfg.collision_rule == CollisionRule.RULE3 and not bool(
        _static_feasible(initials, cfg)
    ):
        raise ValueError("infeasible start: initial separation below d_min under Rule3")


def run_mission(
    params: GaParams,
    initial_positions,
    jammer,
    target_band: Tuple[float, float],
    cfg: ScenarioConfig,
    seed: int,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
) -> TrajectoryPlan:
    """Chain epochs until every UAV's y lies in target_band, or max_epochs.

    Each epoch runs one PositionProgressing GA whose slot-0 positions are the
    previous epoch's final positions, so the chaining equality is exact. An
    epoch whose whole population comes back infeasible (zero best fitness)
    is rerun from fresh seed substreams; missions never embed a block that
    fails the collision check, and raise if the retries run out.
    """
    if params.mode != MODE_POSITION_PROGRESSING:
        raise ValueError("run_mission requires PositionProgressing mode")
    lo, hi = float(target_band[0]), float(target_band[1])
    if not lo <= hi:
        raise ValueError("target_band must satisfy lo <= hi")
    initials = as_position_array(initial_positions, cfg.num_uavs)
    _check_start(initials, cfg)

    def reached(positions: np.ndarray) -> bool:
        return bool(np.all((positions[:, 1] >= lo) & (positions[:, 1] <= hi)))

    blocks = []
    fits = []
    current = initials
    completed = reached(current)
    for epoch in range(max_epochs):
        if completed:
            break
        ctx = GaContext(current, Vec2(float(jammer[0]), float(jammer[1])), cfg, epoch=epoch)
        result = _run_ga(params, ctx, substream(seed, "ga-epoch-%d" % epoch))
        for retry in range(1, MISSION_EPOCH_MAX_TRIES):
            if result.best_fitness > 0.0:
                break
            result = _run_ga(
                params, ctx, substream(seed, "ga-epoch-%d-retry-%d" % (epoch, retry))
            )
        if result.best_fitness <= 0.0:
            raise RuntimeError(
                "epoch %d: no feasible plan in %d optimizer runs"
                % (epoch, MISSION_EPOCH_MAX_TRIES)
            )
        block = decode_progressing(result.best_genome, ctx)
        blocks.append(block)
        fits.append(result.best_fitness)
        current = block[:, -1, :]
        completed = reached(current)
    return TrajectoryPlan(tuple(blocks), tuple(fits), None, completed)


def run_adaptive(
    params: GaParams,
    initial_positions,
    jammer,
    target,
    cfg: ScenarioConfig,
    seed: int,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
) -> TrajectoryPlan:
    """Optimize toward an arbitrary target by rotating into the +y corridor.

    Rotates jammer, target, and initials about the swarm's center of mass so
    the center-to-target direction becomes +y, runs the canonical mission,
    and rotates the solution back. Initials must lie within the circle of
    radius cell/2 inscribed in the slot-0 cell; note the rotation is about
    the center of mass, so a strongly off-center swarm can still leave the
    cell after rotation, which run_mission reports as an infeasible start.
    """
    initials = as_position_array(initial_positions, cfg.num_uavs)
    cell = slot_cell(0, 0, cfg)
    center = np.asarray(cell.center)
    radius = cfg.cell_size_m / 2.0
    dist = np.linalg.norm(initials - center, axis=1)
    if np.any(dist > radius):
        raise ValueError(
            "initial positions must lie within the inscribed circle "
            "(radius %r about %r)" % (radius, tuple(center))
        )

    com = initials.mean(axis=0)
    tgt = np.asarray([float(target[0]), float(target[1])])
    jam = np.asarray([float(jammer[0]), float(jammer[1])])
    theta = float(signed_offset_deg(90.0, bearing_deg(com, tgt)))

    rot_init = rotate_about(initials, com, theta)
    rot_jam = rotate_about(jam, com, theta)
    rot_tgt = rotate_about(tgt, com, theta)
    band = mission_band_for_target(float(rot_tgt[1]), cfg)
    plan = run_mission(
        params, rot_init, Vec2(rot_jam[0], rot_jam[1]), band, cfg, seed, max_epochs
    )
    back = tuple(rotate_about(block, com, -theta) for block in plan.epochs)
    return TrajectoryPlan(back, plan.fitness_per_epoch, theta, plan.completed)
