"""Label scenarios with the optimizer, then see how far plain recall gets.

Generates a small optimizer-labeled training set, fits the distance
weighted nearest-neighbor predictor on it, and scores predictor, reference
labels, and a random-trajectory baseline on held-out scenarios.
"""

import time

from nullsteer.baselines import knn_fit, knn_predict, random_plan
from nullsteer.config import make_default_config
from nullsteer.dataset import SampleSpec, evaluate_predictor, generate_dataset
from nullsteer.ga import GaContext, GaParams, MODE_POSITION_PROGRESSING

import numpy as np

cfg = make_default_config()
ga = GaParams(population_size=16, generations=12, mode=MODE_POSITION_PROGRESSING)

t0 = time.perf_counter()
train = generate_dataset(cfg, ga, SampleSpec(count=60), seed=100)
test = generate_dataset(cfg, ga, SampleSpec(count=20, continuous=True), seed=101)
print("labeled %d train + %d test scenarios in %.1f s" % (
    len(train), len(test), time.perf_counter() - t0))

model = knn_fit(train, k=2)

rows = []
t0 = time.perf_counter()
knn_preds = [knn_predict(model, r.features) for r in test]
rows.append(("KNN (K=2)", evaluate_predictor(
    knn_preds, test, cfg, wall_time_s=time.perf_counter() - t0)))

ga_blocks = [
    np.concatenate([r.initial_positions[:, None, :], r.label_block], axis=1)
    for r in test
]
rows.append(("GA labels", evaluate_predictor(ga_blocks, test, cfg)))

random_blocks = [
    random_plan(GaContext(r.initial_positions, r.jammer, cfg), seed=i)[0]
    for i, r in enumerate(test)
]
rows.append(("Random", evaluate_predictor(random_blocks, test, cfg)))

print("\n%-10s %14s %10s %9s %8s" % (
    "predictor", "mean fitness", "MED m", "collide%", "ms/query"))
for name, table in rows:
    print("%-10s %14.4e %10.2f %9.1f %8.2f" % (
        name, table.mean_fitness, table.med_m, table.collision_pct,
        1e3 * table.mean_wall_time_s))

print("\nrecall on the training set itself is exact:")
fit = evaluate_predictor(
    [knn_predict(knn_fit(train, k=1), r.features) for r in train], train, cfg)
print("  MED %.1f m, mean fitness matches stored labels to %.1e" % (
    fit.med_m,
    abs(fit.mean_fitness - float(np.mean([r.fitness for r in train])))
    / fit.mean_fitness))
