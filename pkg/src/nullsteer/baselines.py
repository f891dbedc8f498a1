"""Comparison strategies: random plans, null-at-jammer, KNN interpolation.

The KNN model memorizes optimizer-labeled samples and predicts a full
per-slot trajectory by distance-weighted averaging over the k nearest
feature rows. Features are [jammer x, jammer y, uav0 x, uav0 y, ...] in
meters, unscaled; labels are the flattened (N, T, 2) slot positions.
"""

import json
from dataclasses import dataclass

import numpy as np

from .config import substream
from .ga import GaContext
from .motion import check_plan, slot_cell
from .objective import bearing_deg

WEIGHT_EPSILON_M = 1e-9  # m, keeps 1/d finite near exact matches
RANDOM_PLAN_MAX_TRIES = 1000


def make_features(jammer, initial_positions) -> np.ndarray:
    """Feature vector: jammer x, y then each UAV's x, y in index order."""
    pos = np.asarray(initial_positions, dtype=float)
    return np.concatenate([np.asarray(jammer, dtype=float).reshape(2), pos.reshape(-1)])


def split_features(features: np.ndarray):
    """Inverse of make_features: (jammer (2,), initials (N, 2))."""
    f = np.asarray(features, dtype=float)
    if f.ndim != 1 or f.shape[0] < 4 or f.shape[0] % 2 != 0:
        raise ValueError("features must be a flat vector of 2 + 2N values")
    return f[:2], f[2:].reshape(-1, 2)


def null_at_jammer(positions, jammer) -> np.ndarray:
    """Baseline orientation: each null aimed straight at the jammer.

    Rejects UAVs coincident with the jammer (the bearing is undefined there).
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    jam = np.asarray(jammer, dtype=float).reshape(2)
    d = np.linalg.norm(pos - jam, axis=1)
    if np.any(d == 0.0):
        raise ValueError("UAV coincident with the jammer: bearing undefined")
    return np.asarray(bearing_deg(pos, np.broadcast_to(jam, pos.shape)))


def random_plan(ctx: GaContext, seed: int, respect_rule: bool = True):
    """Uniform per-slot-cell random trajectory block for ctx's epoch.

    Returns (block, finding). With respect_rule, draws are rejection-sampled
    against check_plan up to RANDOM_PLAN_MAX_TRIES; if no clean draw appears
    the last one is returned with its finding, so callers always get a plan
    plus the verdict on it.
    """
    cfg = ctx.cfg
    n, t = cfg.num_uavs, cfg.scored_slots
    rng = substream(seed, "baseline")
    tries = RANDOM_PLAN_MAX_TRIES if respect_rule else 1
    block = None
    finding = None
    for _ in range(tries):
        block = np.empty((n, t + 1, 2))
        block[:, 0, :] = ctx.initial_positions
        for s in range(1, t + 1):
            cell = slot_cell(ctx.epoch, s, cfg)
            block[:, s, 0] = rng.uniform(cell.x_min, cell.x_max, n)
            block[:, s, 1] = rng.uniform(cell.y_min, cell.y_max, n)
        finding = check_plan(block, cfg, epoch=ctx.epoch)
        if not finding:
            break
    return block, finding


@dataclass(frozen=True)
class KnnModel:
    k: int
    features: np.ndarray  # (M, 2 + 2N)
    labels: np.ndarray  # (M, N * T * 2), row-major over (uav, slot, xy)
    num_uavs: int
    scored_slots: int
    weight_epsilon: float = WEIGHT_EPSILON_M

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        l = np.asarray(self.labels, dtype=float)
        if f.ndim != 2 or l.ndim != 2 or f.shape[0] != l.shape[0]:
            raise ValueError("features and labels must be matrices with equal rows")
        if not 1 <= self.k <= f.shape[0]:
            raise ValueError("k must be in [1, sample count]")
        if f.shape[1] != 2 + 2 * self.num_uavs:
            raise ValueError("feature width must be 2 + 2N")
        if l.shape[1] != self.num_uavs * self.scored_slots * 2:
            raise ValueError("label width must be N * T * 2")
        f.setflags(write=False)
        l.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", l)


def knn_fit(records, k: int) -> KnnModel:
    """Index optimizer-labeled records; no computation beyond stacking.

    Records must be homogeneous in N and T; mixed shapes are rejected.
    """
    records = list(records)
    if not records:
        raise ValueError("dataset is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(records):
        raise ValueError("k exceeds the sample count")
    shape = np.asarray(records[0].label_block).shape
    n = shape[0]
    for r in records:
        b = np.asarray(r.label_block, dtype=float)
        if b.shape != shape:
            raise ValueError("mixed label shapes in dataset")
        if np.asarray(r.features).shape != (2 + 2 * n,):
            raise ValueError("feature length inconsistent with N")
    feats = np.stack([np.asarray(r.features, dtype=float) for r in records])
    labels = np.stack(
        [np.asarray(r.label_block, dtype=float).reshape(-1) for r in records]
    )
    return KnnModel(k, feats, labels, num_uavs=n, scored_slots=shape[1])


def knn_predict(model: KnnModel, features) -> np.ndarray:
    """Distance-weighted average of the k nearest labels -> (N, T+1, 2) block.

    Slot 0 comes from the query features. A zero-distance row short-circuits
    to its stored label verbatim; distance ties break toward the lower row
    index (stable sort).
    """
    q = np.asarray(features, dtype=float).reshape(-1)
    if q.shape[0] != model.features.shape[1]:
        raise ValueError("query feature dimension mismatch")
    d = np.linalg.norm(model.features - q, axis=1)
    exact = np.nonzero(d == 0.0)[0]
    if exact.size:
        flat = model.labels[int(exact[0])]
    else:
        idx = np.argsort(d, kind="stable")[: model.k]
        w = 1.0 / (d[idx] + model.weight_epsilon)
        flat = (w[:, None] * model.labels[idx]).sum(axis=0) / w.sum()
    n, t = model.num_uavs, model.scored_slots
    block = np.empty((n, t + 1, 2))
    _, initials = split_features(q)
    block[:, 0, :] = initials
    block[:, 1:, :] = flat.reshape(n, t, 2)
    return block


def save_knn_model(model: KnnModel, path) -> None:
    """One header line, then one line per stored sample."""
    with open(path, "w") as fh:
        header = {
            "kind": "knn-model",
            "k": model.k,
            "weight_epsilon": model.weight_epsilon,
            "n": model.num_uavs,
            "t": model.scored_slots,
        }
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for f, l in zip(model.features, model.labels):
            row = {"features": f.tolist(), "label": l.tolist()}
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")


def load_knn_model(path) -> KnnModel:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "knn-model":
            raise ValueError("not a knn-model file: %r" % (path,))
        feats, labels = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            feats.append(row["features"])
            labels.append(row["label"])
    return KnnModel(
        k=int(header["k"]),
        features=np.asarray(feats, dtype=float),
        labels=np.asarray(labels, dtype=float),
        num_uavs=int(header["n"]),
        scored_slots=int(header["t"]),
        weight_epsilon=float(header["weight_epsilon"]),
    )
