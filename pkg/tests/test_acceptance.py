"""Release gate: nine numbered criteria, each with its stated tolerance.

Every criterion is one test, so the verbose run shows one pass/fail line
per criterion. Prints carry the measured margins for anyone running -s.
The dataset-backed criteria (7, 8) share one module-scoped build.
"""

import dataclasses
import json
import time

import numpy as np
import pytest

from nullsteer.baselines import knn_fit, knn_predict, random_plan
from nullsteer.config import CollisionRule, make_default_config, substream
from nullsteer.dataset import (
    METRIC_CSV_COLUMNS,
    SampleSpec,
    evaluate_predictor,
    generate_dataset,
    write_metrics_csv,
)
from nullsteer.dataset import _draw_initials
from nullsteer.env import DEFAULT_REWARD_SCALE, Env, EnvConfig, RANDOMIZE_FIXED
from nullsteer.ga import (
    GaContext,
    GaParams,
    MODE_JOINT_STATIC,
    MODE_POSITION_PROGRESSING,
    genome_length,
    run_adaptive,
    run_ga,
    run_mission,
)
from nullsteer.motion import (
    check_plan,
    mission_band_for_target,
    rotate_about,
    segment_pair_min_distance_batch,
)
from nullsteer.objective import epoch_objective, link_report, null_at_jammer_angles
from nullsteer.radio import path_loss_db, shannon_capacity_bps
from nullsteer.server import ProtocolSession
from nullsteer.state import SwarmState, Vec2

CFG = make_default_config()
JAMMER = Vec2(30.0, 500.0)

DATASET_GA = GaParams(
    population_size=16, generations=12, mode=MODE_POSITION_PROGRESSING
)
TRAIN_COUNT = 1000
TEST_COUNT = 100


@pytest.fixture(scope="module")
def desk_datasets():
    """1000 grid-drawn train and 100 continuous test records per rule."""
    out = {}
    for idx, rule in enumerate(
        (CollisionRule.RULE1, CollisionRule.RULE2, CollisionRule.RULE3)
    ):
        cfg = dataclasses.replace(CFG, collision_rule=rule)
        train = generate_dataset(
            cfg, DATASET_GA, SampleSpec(count=TRAIN_COUNT), seed=40 + idx
        )
        test = generate_dataset(
            cfg, DATASET_GA, SampleSpec(count=TEST_COUNT, continuous=True),
            seed=50 + idx,
        )
        out[rule] = (cfg, train, test)
    return out


def test_criterion_1_radio_closed_forms():
    t0 = time.perf_counter()
    assert path_loss_db(1.0, CFG) == 30.0
    assert path_loss_db(10.0, CFG) == 57.0  # 30 + 10 * 2.7 * log10(10)
    assert shannon_capacity_bps(20e6, 1.0) == 2e7
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print("criterion 1: PASS - landmarks exact, %.4f s" % elapsed)


def test_criterion_2_ga_beats_null_toward_jammer_baseline():
    params = GaParams(population_size=50, generations=50, mode=MODE_JOINT_STATIC)
    t0 = time.perf_counter()
    wins = 0
    improvements = []
    for seed in range(20):
        initials = _draw_initials(substream(seed, "formation"), CFG, continuous=True)
        base = link_report(
            SwarmState(initials, null_at_jammer_angles(initials, JAMMER), JAMMER), CFG
        ).fitness
        result = run_ga(params, GaContext(initials, JAMMER, CFG), seed)
        wins += result.best_fitness >= base
        improvements.append((result.best_fitness - base) / base)
    elapsed = time.perf_counter() - t0
    mean_improvement = float(np.mean(improvements))
    assert wins >= 19  # >= 95% of 20 formations
    assert mean_improvement >= 1.0  # >= +100%
    assert elapsed <= 300.0
    print(
        "criterion 2: PASS - %d/20 wins, mean improvement %+.0f%%, %.1f s"
        % (wins, 100 * mean_improvement, elapsed)
    )


def test_criterion_3_position_only_matches_joint():
    # position-only arm: the trajectory encoder on a non-advancing corridor,
    # one scored slot, orientations pinned; same population and generations
    cfg_pos = dataclasses.replace(CFG, slots_per_epoch=2, epoch_length_m=60.0)
    joint_params = GaParams(population_size=30, generations=20, mode=MODE_JOINT_STATIC)
    pos_params = GaParams(
        population_size=30, generations=20, mode=MODE_POSITION_PROGRESSING
    )
    probe = _draw_initials(substream(0, "probe"), CFG, continuous=True)
    len_pos = genome_length(pos_params, GaContext(probe, JAMMER, cfg_pos))
    len_joint = genome_length(joint_params, GaContext(probe, JAMMER, CFG))
    assert len_pos < len_joint  # 8 genes vs 12: the dimensionality reduction

    joint_fitness, pos_fitness = [], []
    for seed in range(10):
        initials = _draw_initials(substream(1000 + seed, "formation"), CFG, True)
        joint = run_ga(joint_params, GaContext(initials, JAMMER, CFG), seed)
        pos = run_ga(pos_params, GaContext(initials, JAMMER, cfg_pos), seed)
        joint_fitness.append(joint.best_fitness)
        pos_fitness.append(pos.best_fitness)
    ratio = float(np.median(pos_fitness) / np.median(joint_fitness))
    assert ratio >= 0.8
    print(
        "criterion 3: PASS - median position-only/joint = %.2f, genome %d < %d"
        % (ratio, len_pos, len_joint)
    )


def _sampled_min_distance(a0, a1, b0, b1, grid=1001):
    """Two-stage time sampling of |(a0-b0) + t((a1-a0)-(b1-b0))|, t in [0,1].

    A coarse pass locates the bracketing interval, a second pass samples it
    at the same resolution, for an effective step of ~2e-6 per pair.
    """
    r0 = np.asarray(a0, float) - np.asarray(b0, float)
    v = (np.asarray(a1, float) - np.asarray(a0, float)) - (
        np.asarray(b1, float) - np.asarray(b0, float)
    )
    t = np.linspace(0.0, 1.0, grid)
    d2 = (r0[:, 0:1] + t * v[:, 0:1]) ** 2 + (r0[:, 1:2] + t * v[:, 1:2]) ** 2
    idx = d2.argmin(axis=1)
    coarse = d2[np.arange(d2.shape[0]), idx]
    lo = np.clip((idx - 1) / (grid - 1.0), 0.0, 1.0)
    hi = np.clip((idx + 1) / (grid - 1.0), 0.0, 1.0)
    t2 = lo[:, None] + (hi - lo)[:, None] * t
    d2b = (r0[:, 0:1] + t2 * v[:, 0:1]) ** 2 + (r0[:, 1:2] + t2 * v[:, 1:2]) ** 2
    return np.sqrt(np.minimum(coarse, d2b.min(axis=1)))


def test_criterion_4_collision_checker_soundness():
    cfg3 = dataclasses.replace(CFG, collision_rule=CollisionRule.RULE3)
    params = GaParams(population_size=16, generations=12, mode=MODE_POSITION_PROGRESSING)
    ts = np.linspace(0.0, 1.0, 10001)  # 1e-4 time step
    sampled_min = np.inf
    epochs_total = 0
    for seed in range(100):
        initials = _draw_initials(substream(seed, "acc4"), cfg3, continuous=True)
        jam = Vec2(float(substream(seed, "acc4-jam").uniform(0.0, 60.0)), 500.0)
        plan = run_mission(params, initials, jam, (120.0, 180.0), cfg3, seed=seed)
        assert plan.completed
        for e, block in enumerate(plan.epochs):
            # closed-form checker verdict
            assert not check_plan(block, cfg3, epoch=e)
            # time-sampling oracle must agree that nothing dips below d_min
            prev, nxt = block[:, :-1, :], block[:, 1:, :]
            iu, ju = np.triu_indices(block.shape[0], 1)
            a = prev[iu] - prev[ju]
            b = (nxt[iu] - prev[iu]) - (nxt[ju] - prev[ju])
            d2 = (a[..., 0:1] + ts * b[..., 0:1]) ** 2 + (
                a[..., 1:2] + ts * b[..., 1:2]
            ) ** 2
            sampled_min = min(sampled_min, float(np.sqrt(d2.min())))
            epochs_total += 1
        for k in range(plan.num_epochs - 1):
            assert np.array_equal(plan.epochs[k][:, -1, :], plan.epochs[k + 1][:, 0, :])
    assert sampled_min >= cfg3.min_separation_m

    # closed form vs sampled minimum on random segment pairs
    rng = substream(0, "acc4-pairs")
    m = 100_000
    worst = 0.0
    for start in range(0, m, 20_000):
        count = min(20_000, m - start)
        a0 = rng.uniform(0.0, 120.0, (count, 2))
        a1 = a0 + rng.uniform(-50.0, 50.0, (count, 2))
        b0 = rng.uniform(0.0, 120.0, (count, 2))
        b1 = b0 + rng.uniform(-50.0, 50.0, (count, 2))
        closed = segment_pair_min_distance_batch(a0, a1, b0, b1)
        sampled = _sampled_min_distance(a0, a1, b0, b1)
        worst = max(worst, float(np.abs(closed - sampled).max()))
    assert worst <= 1e-3
    print(
        "criterion 4: PASS - 100 missions (%d epochs) agree, min sampled %.3f m, "
        "pair deviation %.2e m" % (epochs_total, sampled_min, worst)
    )


def test_criterion_5_rotation_invariance():
    params = GaParams(population_size=10, generations=6, mode=MODE_POSITION_PROGRESSING)
    rng = substream(0, "acc5")
    worst = 0.0
    for seed in range(10):
        # compact draw: any rotation about the center of mass stays in-cell
        center = np.array([30.0, 30.0])
        initials = np.empty((4, 2))
        for i in range(4):
            r = 9.0 * np.sqrt(rng.random())
            phi = rng.uniform(0.0, 2.0 * np.pi)
            initials[i] = center + [r * np.cos(phi), r * np.sin(phi)]
        bearing = float(rng.uniform(0.0, 360.0))
        com = initials.mean(axis=0)
        target = com + 180.0 * np.array(
            [np.cos(np.radians(bearing)), np.sin(np.radians(bearing))]
        )
        jam = Vec2(float(rng.uniform(0.0, 60.0)), 500.0)

        plan = run_adaptive(params, initials, jam, target, CFG, seed=seed)
        theta = plan.rotation_angle_deg
        assert theta is not None  # the rotation is recorded on the plan
        rot_init = rotate_about(initials, com, theta)
        rot_jam = rotate_about(np.asarray(jam), com, theta)
        rot_tgt = rotate_about(target, com, theta)
        canon = run_mission(
            params, rot_init, Vec2(rot_jam[0], rot_jam[1]),
            mission_band_for_target(float(rot_tgt[1]), CFG), CFG, seed=seed,
        )
        assert plan.fitness_per_epoch == canon.fitness_per_epoch  # exact
        for mine, ref in zip(plan.epochs, canon.epochs):
            dev = float(np.abs(mine - rotate_about(ref, com, -theta)).max())
            worst = max(worst, dev)
    assert worst <= 1e-6
    print(
        "criterion 5: PASS - 10 bearings, exact fitness, trajectories within %.1e m"
        % worst
    )


def test_criterion_6_epoch_chaining_and_band_termination():
    params = GaParams(population_size=12, generations=8, mode=MODE_POSITION_PROGRESSING)
    initials = _draw_initials(substream(0, "formation"), CFG, continuous=True)
    plan = run_mission(params, initials, JAMMER, (300.0, 360.0), CFG, seed=0)
    assert plan.completed
    assert plan.num_epochs == 5  # 60 m advance per epoch into a 300 m-away band
    for k in range(plan.num_epochs - 1):
        assert np.array_equal(plan.epochs[k][:, -1, :], plan.epochs[k + 1][:, 0, :])
    finals = plan.final_positions()
    assert np.all((finals[:, 1] >= 300.0) & (finals[:, 1] <= 360.0))
    print("criterion 6: PASS - 5 epochs, exact handoffs, finals in band")


def test_criterion_7_knn_exact_recall(desk_datasets):
    cfg1, train, _ = desk_datasets[CollisionRule.RULE1]
    assert len(train) == TRAIN_COUNT
    t0 = time.perf_counter()
    model = knn_fit(train, k=1)
    predictions = [knn_predict(model, r.features) for r in train]
    table = evaluate_predictor(predictions, train, cfg1)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    assert table.med_m == 0.0
    assert table.collision_pct == 0.0
    stored_mean = float(np.mean([r.fitness for r in train]))
    assert table.mean_fitness == pytest.approx(stored_mean, rel=1e-9)
    # per-record: rescoring the recalled plan reproduces the stored fitness
    for record, block in zip(train[::97], predictions[::97]):
        redo = epoch_objective(block, record.jammer, cfg1).objective
        assert redo == pytest.approx(record.fitness, rel=1e-9)
    print(
        "criterion 7: PASS - MED 0, fitness recalled to %.1e rel, %.2f s on %d"
        % (abs(table.mean_fitness - stored_mean) / stored_mean, elapsed, len(train))
    )


def test_criterion_8_predictor_ordering(desk_datasets, tmp_path):
    rows = []
    summary = []
    for rule, (cfg, train, test) in desk_datasets.items():
        ga_blocks = [
            np.concatenate([r.initial_positions[:, None, :], r.label_block], axis=1)
            for r in test
        ]
        ga_table = evaluate_predictor(ga_blocks, test, cfg)
        random_blocks = []
        for i, r in enumerate(test):
            block, _ = random_plan(
                GaContext(r.initial_positions, r.jammer, cfg), seed=9000 + i
            )
            random_blocks.append(block)
        random_table = evaluate_predictor(random_blocks, test, cfg)
        assert ga_table.mean_fitness > random_table.mean_fitness
        rows.append(("GA (Ref)", rule.value, ga_table))
        rows.append(("Random", rule.value, random_table))
        summary.append(
            "%s GA %.2e > rnd %.2e"
            % (rule.value, ga_table.mean_fitness, random_table.mean_fitness)
        )
        if rule == CollisionRule.RULE1:
            model = knn_fit(train, k=2)
            knn_blocks = [knn_predict(model, r.features) for r in test]
            knn_table = evaluate_predictor(knn_blocks, test, cfg)
            assert knn_table.mean_fitness > random_table.mean_fitness
            rows.append(("KNN (K=2)", rule.value, knn_table))
            summary.append("Rule1 KNN %.2e > rnd" % knn_table.mean_fitness)

    path = tmp_path / "metrics.csv"
    write_metrics_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(METRIC_CSV_COLUMNS)  # exactly these columns
    assert len(lines) == 1 + len(rows)
    print("criterion 8: PASS - " + "; ".join(summary))


def test_criterion_9_protocol_transcript_and_reward_identity():
    initials = [[10.0, 30.0], [40.0, 30.0], [10.0, 55.0], [50.0, 60.0]]
    script = [
        json.dumps(
            {
                "cmd": "config",
                "randomize": "Fixed",
                "fixed_initials": initials,
                "fixed_jammer": [30.0, 500.0],
            }
        ),
        '{"cmd":"reset","seed":0}',
    ]
    rng = substream(0, "acc9")
    actions = [[round(float(v), 6) for v in rng.uniform(-1, 1, 8)] for _ in range(5)]
    for act in actions:
        script.append(json.dumps({"cmd": "step", "action": act}))
    script.append('{"cmd":"close"}')

    transcripts = []
    for _ in range(2):
        session = ProtocolSession(EnvConfig())
        transcripts.append("\n".join(session.handle_line(line) for line in script))
    assert transcripts[0] == transcripts[1]  # byte-identical replay

    replies = [json.loads(line) for line in transcripts[0].splitlines()]
    rewards = [r["reward"] for r in replies[2:7]]
    assert all(r["ok"] for r in replies)

    env = Env(
        EnvConfig(
            randomize=RANDOMIZE_FIXED,
            fixed_initials=np.asarray(initials),
            fixed_jammer=Vec2(30.0, 500.0),
        )
    )
    env.reset(seed=0)
    for act in actions:
        env.step(act)
    block = env.realized_block()
    objective = epoch_objective(block, Vec2(30.0, 500.0), CFG).objective
    identity = sum(rewards) * DEFAULT_REWARD_SCALE / CFG.scored_slots
    assert identity == pytest.approx(objective, rel=1e-9)
    print(
        "criterion 9: PASS - transcript stable, reward identity %.1e rel"
        % (abs(identity - objective) / objective)
    )
