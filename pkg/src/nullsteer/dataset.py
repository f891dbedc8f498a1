"""Optimizer-labeled sample generation, predictor scoring, metric tables.

Dataset files are line-delimited JSON: one header line carrying the config
hash, swarm shape, and collision rule, then one record per line with fields
features[], label[][], fitness, rule, seed, generator. Training sets draw
initial positions from the discrete cell grid; test sets draw them
continuously. All draws flow from per-record seed substreams, so a dataset
is byte-identical across reruns of the same seed.
"""

import csv
import json
import warnings
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import make_features
from .config import CollisionRule, ScenarioConfig, config_hash, substream
from .ga import GaContext, GaParams, MODE_POSITION_PROGRESSING, decode_progressing, run_ga
from .motion import check_plan, slot_cell
from .objective import link_stats_batch, null_at_jammer_angles
from .state import Vec2

GENERATOR_GA = "GA"
RESAMPLE_MAX_TRIES = 20  # fresh scenario draws before an infeasible sample is dropped
SEPARATION_MAX_TRIES = 1000


@dataclass(frozen=True)
class SampleRecord:
    features: np.ndarray  # 2 + 2N values, jammer then initials
    label_block: np.ndarray  # (N, T, 2) positions for slots 1..T
    fitness: float
    collision_rule: CollisionRule
    seed: int
    generator: str = GENERATOR_GA

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        l = np.asarray(self.label_block, dtype=float)
        if l.ndim != 3 or l.shape[2] != 2:
            raise ValueError("label_block must be (N, T, 2)")
        if f.shape != (2 + 2 * l.shape[0],):
            raise ValueError("feature length must be 2 + 2N")
        f.setflags(write=False)
        l.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "label_block", l)

    @property
    def jammer(self) -> Vec2:
        return Vec2(float(self.features[0]), float(self.features[1]))

    @property
    def initial_positions(self) -> np.ndarray:
        return self.features[2:].reshape(-1, 2)


@dataclass(frozen=True)
class SampleSpec:
    count: int
    continuous: bool = False  # False: grid initials (train); True: uniform (test)
    jammer_x_range: Tuple[float, float] = (0.0, 60.0)
    jammer_y_range: Tuple[float, float] = (500.0, 500.0)

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")
        for name in ("jammer_x_range", "jammer_y_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError("%s must satisfy lo <= hi" % name)


@dataclass(frozen=True)
class MetricTable:
    mean_fitness: float
    mean_c_avg_bps: float
    mean_c_min_bps: float
    collision_pct: float
    med_m: float
    mean_wall_time_s: float


def grid_points(cfg: ScenarioConfig) -> List[Vec2]:
    """Centers of the grid_resolution^2 subdivision of the slot-0 cell."""
    g = cfg.grid_resolution
    if g < 1:
        raise ValueError("grid_resolution must be >= 1")
    cell = slot_cell(0, 0, cfg)
    pitch = cfg.cell_size_m / g
    points = []
    for iy in range(g):
        for ix in range(g):
            points.append(
                Vec2(cell.x_min + (ix + 0.5) * pitch, cell.y_min + (iy + 0.5) * pitch)
            )
    return points


def _min_gap(positions: np.ndarray) -> float:
    iu, ju = np.triu_indices(positions.shape[0], 1)
    return float(np.linalg.norm(positions[iu] - positions[ju], axis=1).min())


def _draw_initials(
    rng: np.random.Generator, cfg: ScenarioConfig, continuous: bool
) -> np.ndarray:
    """Initial formation draw; Rule 3 requires d_min separation at slot 0."""
    n = cfg.num_uavs
    cell = slot_cell(0, 0, cfg)
    need_sep = cfg.collision_rule == CollisionRule.RULE3 and n > 1
    if not continuous:
        points = np.asarray(grid_points(cfg), dtype=float)
        if n > points.shape[0]:
            raise ValueError("more UAVs than grid points")
    for _ in range(SEPARATION_MAX_TRIES):
        if continuous:
            pos = np.column_stack(
                [
                    rng.uniform(cell.x_min, cell.x_max, n),
                    rng.uniform(cell.y_min, cell.y_max, n),
                ]
            )
        else:
            pos = points[rng.choice(points.shape[0], size=n, replace=False)]
        if not need_sep or _min_gap(pos) >= cfg.min_separation_m:
            return pos
    raise ValueError("could not draw a separated formation; d_min too large")


def generate_dataset(
    cfg: ScenarioConfig,
    ga_params: GaParams,
    spec: SampleSpec,
    seed: int,
    path: Optional[str] = None,
    progress=None,
) -> List[SampleRecord]:
    """GA-label `spec.count` scenarios; optionally stream records to `path`.

    Each record gets its own seed substream, so reruns are byte-identical.
    Scenarios whose GA run finds no feasible individual are redrawn up to
    RESAMPLE_MAX_TRIES times, then dropped with a warning.
    """
    if ga_params.mode != MODE_POSITION_PROGRESSING:
        raise ValueError("dataset labels require PositionProgressing mode")
    records = []
    fh = open(path, "w") if path is not None else None
    try:
        if fh is not None:
            fh.write(_header_line(cfg))
        for idx in range(spec.count):
            rng = substream(seed, "dataset-%d" % idx)
            record = None
            for _ in range(RESAMPLE_MAX_TRIES):
                jam = Vec2(
                    float(rng.uniform(*spec.jammer_x_range)),
                    float(rng.uniform(*spec.jammer_y_range)),
                )
                initials = _draw_initials(rng, cfg, spec.continuous)
                ga_seed = int(rng.integers(0, 2**31 - 1))
                ctx = GaContext(initials, jam, cfg)
                result = run_ga(ga_params, ctx, ga_seed)
                if result.best_fitness > 0.0:
                    block = decode_progressing(result.best_genome, ctx)
                    record = SampleRecord(
                        features=make_features(jam, initials),
                        label_block=block[:, 1:, :],
                        fitness=result.best_fitness,
                        collision_rule=cfg.collision_rule,
                        seed=ga_seed,
                        generator=GENERATOR_GA,
                    )
                    break
            if record is None:
                warnings.warn(
                    "sample %d: no feasible GA result after %d scenario draws; dropped"
                    % (idx, RESAMPLE_MAX_TRIES)
                )
                continue
            records.append(record)
            if fh is not None:
                fh.write(_record_line(record))
            if progress is not None:
                progress(idx, record)
    finally:
        if fh is not None:
            fh.close()
    return records


def _header_line(cfg: ScenarioConfig) -> str:
    header = {
        "kind": "dataset",
        "cfg_hash": config_hash(cfg),
        "n": cfg.num_uavs,
        "t": cfg.scored_slots,
        "rule": cfg.collision_rule.value,
    }
    return json.dumps(header, separators=(",", ":")) + "\n"


def _record_line(record: SampleRecord) -> str:
    row = {
        "features": record.features.tolist(),
        "label": record.label_block.reshape(-1, 2).tolist(),
        "fitness": record.fitness,
        "rule": record.collision_rule.value,
        "seed": record.seed,
        "generator": record.generator,
    }
    return json.dumps(row, separators=(",", ":")) + "\n"


def write_dataset(records: Sequence[SampleRecord], path, cfg: ScenarioConfig) -> None:
    with open(path, "w") as fh:
        fh.write(_header_line(cfg))
        for record in records:
            fh.write(_record_line(record))


def read_dataset(path):
    """Returns (header dict, list of SampleRecord)."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "dataset":
            raise ValueError("not a dataset file: %r" % (path,))
        n, t = int(header["n"]), int(header["t"])
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            records.append(
                SampleRecord(
                    features=np.asarray(row["features"], dtype=float),
                    label_block=np.asarray(row["label"], dtype=float).reshape(n, t, 2),
                    fitness=float(row["fitness"]),
                    collision_rule=CollisionRule(row["rule"]),
                    seed=int(row["seed"]),
                    generator=str(row["generator"]),
                )
            )
    return header, records


def evaluate_predictor(
    predictions: Sequence[np.ndarray],
    records: Sequence[SampleRecord],
    cfg: ScenarioConfig,
    wall_time_s: float = 0.0,
) -> MetricTable:
    """Score predicted plan blocks against their reference records.

    Fitness is zeroed for plans with any finding under cfg's rule; capacities
    are still reported from the evaluated geometry. MED is the mean distance
    between predicted and reference final positions. wall_time_s is whatever
    the caller measured for producing the predictions; it is averaged over
    samples.
    """
    if len(predictions) != len(records):
        raise ValueError("predictions and records must align one-to-one")
    if not records:
        raise ValueError("nothing to evaluate")
    n, t = cfg.num_uavs, cfg.scored_slots
    blocks = np.stack([np.asarray(p, dtype=float) for p in predictions])
    if blocks.shape[1:] != (n, t + 1, 2):
        raise ValueError("plan blocks must be (N, T+1, 2)")
    m = blocks.shape[0]

    clean = np.empty(m, dtype=bool)
    for i in range(m):
        clean[i] = not check_plan(blocks[i], cfg, epoch=0)

    # One batched link evaluation over (sample, slot): scored slots only.
    scored = np.moveaxis(blocks[:, :, 1:, :], 1, 2)  # (M, T, N, 2)
    jammers = np.stack([r.features[:2] for r in records])[:, None, :]  # (M, 1, 2)
    angles = null_at_jammer_angles(scored, jammers[:, :, None, :])
    _, c_avg, c_min, fitness = link_stats_batch(scored, angles, jammers, cfg)

    finals = blocks[:, :, -1, :]
    refs = np.stack([r.label_block[:, -1, :] for r in records])
    med = float(np.linalg.norm(finals - refs, axis=2).mean())

    per_sample_fitness = np.where(clean, fitness.mean(axis=1), 0.0)
    return MetricTable(
        mean_fitness=float(per_sample_fitness.mean()),
        mean_c_avg_bps=float(c_avg.mean()),
        mean_c_min_bps=float(c_min.mean()),
        collision_pct=float(100.0 * (1.0 - clean.mean())),
        med_m=med,
        mean_wall_time_s=float(wall_time_s) / m,
    )


METRIC_CSV_COLUMNS = (
    "algorithm",
    "rule",
    "mean_fitness",
    "mean_c_avg_bps",
    "mean_c_min_bps",
    "collision_pct",
    "med_m",
    "mean_wall_time_s",
)


def write_metrics_csv(rows: Iterable[Tuple[str, str, MetricTable]], path) -> None:
    """Flat CSV mirror of the metric table, one row per (algorithm, rule)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_CSV_COLUMNS)
        for algorithm, rule, table in rows:
            writer.writerow(
                [
                    algorithm,
                    rule,
                    repr(table.mean_fitness),
                    repr(table.mean_c_avg_bps),
                    repr(table.mean_c_min_bps),
                    repr(table.collision_pct),
                    repr(table.med_m),
                    repr(table.mean_wall_time_s),
                ]
            )


def write_metrics_jsonl(rows: Iterable[Tuple[str, str, MetricTable]], path) -> None:
    """Structured twin of the CSV: one JSON object per row."""
    with open(path, "w") as fh:
        for algorithm, rule, table in rows:
            row = {"algorithm": algorithm, "rule": rule}
            row.update(
                {
                    "mean_fitness": table.mean_fitness,
                    "mean_c_avg_bps": table.mean_c_avg_bps,
                    "mean_c_min_bps": table.mean_c_min_bps,
                    "collision_pct": table.collision_pct,
                    "med_m": table.med_m,
                    "mean_wall_time_s": table.mean_wall_time_s,
                }
            )
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
