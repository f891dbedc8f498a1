"""Command-line front end: experiments in, CSV/JSONL/SVG artifacts out.

Every subcommand resolves a ScenarioConfig (defaults, then the config file
named by --config or the NULLSTEER_CONFIG environment variable, then the
--rule override), seeds all randomness from --seed, and writes its outputs
under <out>/<command>-<cfg-hash>-s<seed>/ so distinct runs never collide.
Timing fields in results are measured, everything else is byte-reproducible.
"""

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from .baselines import knn_fit, knn_predict, null_at_jammer, random_plan
from .config import (
    CollisionRule,
    ScenarioConfig,
    config_hash,
    load_config,
    make_default_config,
    substream,
)
from .dataset import (
    MetricTable,
    SampleSpec,
    evaluate_predictor,
    generate_dataset,
    read_dataset,
    write_metrics_csv,
    write_metrics_jsonl,
)
from .env import EnvConfig
from .ga import (
    GaContext,
    GaParams,
    MODE_JOINT_STATIC,
    MODE_ORIENTATION_ONLY,
    MODE_POSITION_PROGRESSING,
    decode_progressing,
    decode_static,
    run_adaptive,
    run_ga,
    run_mission,
)
from .motion import check_plan, slot_cell
from .objective import link_report
from .planfile import plan_jammer, read_plan, write_plan
from .plots import curve_svg, plan_svg
from .server import serve_stdio, serve_tcp
from .state import SwarmState, TrajectoryPlan, Vec2

CONFIG_ENV_VAR = "NULLSTEER_CONFIG"
DEFAULT_JAMMER = (30.0, 500.0)

_MODE_FLAGS = {
    "orientation-only": MODE_ORIENTATION_ONLY,
    "joint": MODE_JOINT_STATIC,
    "progressing": MODE_POSITION_PROGRESSING,
}
_RULES = {1: CollisionRule.RULE1, 2: CollisionRule.RULE2, 3: CollisionRule.RULE3}


def _resolve_cfg(args) -> ScenarioConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path:
        cfg = load_config(path)
    else:
        cfg = make_default_config()
    rule = getattr(args, "rule", None)
    if rule is not None:
        cfg = dataclasses.replace(cfg, collision_rule=_RULES[rule])
    return cfg


def _run_dir(args, name: str, cfg: ScenarioConfig, tag: str = "") -> str:
    stem = "%s-%s-s%d" % (name, config_hash(cfg), args.seed)
    if tag:
        stem = "%s-%s-%s-s%d" % (name, tag, config_hash(cfg), args.seed)
    d = os.path.join(args.out, stem)
    os.makedirs(d, exist_ok=True)
    return d


def _draw_formation(cfg: ScenarioConfig, seed: int) -> np.ndarray:
    from .dataset import _draw_initials

    rng = substream(seed, "formation")
    return _draw_initials(rng, cfg, continuous=True)


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _metric_row_static(report) -> MetricTable:
    return MetricTable(
        mean_fitness=report.fitness,
        mean_c_avg_bps=report.c_avg_bps,
        mean_c_min_bps=report.c_min_bps,
        collision_pct=0.0,
        med_m=0.0,
        mean_wall_time_s=0.0,
    )


def cmd_ga_run(args) -> int:
    cfg = _resolve_cfg(args)
    out = _run_dir(args, "ga-run", cfg, tag=args.mode)
    mode = _MODE_FLAGS[args.mode]
    params = GaParams(
        population_size=args.pop, generations=args.gens, mode=mode
    )
    initials = _draw_formation(cfg, args.seed)
    jammer = Vec2(*args.jammer)
    ctx = GaContext(initials, jammer, cfg)
    result = run_ga(params, ctx, args.seed)

    base_angles = null_at_jammer(initials, jammer)
    base_fit = link_report(SwarmState(initials, base_angles, jammer), cfg).fitness

    result_obj = {
        "mode": args.mode,
        "seed": args.seed,
        "cfg_hash": config_hash(cfg),
        "best_fitness": result.best_fitness,
        "baseline_fitness": base_fit,
        "evaluations": result.evaluations,
        "wall_time_s": result.wall_time_s,
        "fitness_history": list(result.fitness_history),
        "best_genome": result.best_genome.tolist(),
    }

    if mode == MODE_POSITION_PROGRESSING:
        block = decode_progressing(result.best_genome, ctx)
        plan = TrajectoryPlan((block,), (result.best_fitness,), None, True)
        write_plan(os.path.join(out, "plan.jsonl"), plan, jammer, cfg)
        _write(
            os.path.join(out, "trajectory.svg"),
            plan_svg([block], jammer, cfg),
        )
        finals = block[:, -1, :]
        report = link_report(
            SwarmState(finals, null_at_jammer(finals, jammer), jammer), cfg
        )
    else:
        positions, angles = decode_static(result.best_genome, params, ctx)
        result_obj["positions"] = positions.tolist()
        result_obj["null_angles_deg"] = angles.tolist()
        report = link_report(SwarmState(positions, angles, jammer), cfg)
        _write(
            os.path.join(out, "formation.svg"),
            plan_svg([positions[:, None, :]], jammer, cfg, null_angles_deg=angles),
        )

    with open(os.path.join(out, "result.json"), "w") as fh:
        json.dump(result_obj, fh, indent=2)
        fh.write("\n")
    table = dataclasses.replace(
        _metric_row_static(report),
        mean_fitness=result.best_fitness,
        mean_wall_time_s=result.wall_time_s,
    )
    write_metrics_csv(
        [("GA (%s)" % args.mode, cfg.collision_rule.value, table)],
        os.path.join(out, "metrics.csv"),
    )
    _write(
        os.path.join(out, "history.svg"),
        curve_svg(
            [("best fitness", range(len(result.fitness_history)), result.fitness_history)],
            x_label="generation",
            y_label="fitness",
        ),
    )
    print(
        "ga-run %s: fitness %.6e  baseline %.6e  (%s)"
        % (args.mode, result.best_fitness, base_fit, out)
    )
    return 0


def _write_mission_outputs(out, plan, jammer, cfg) -> None:
    write_plan(os.path.join(out, "plan.jsonl"), plan, jammer, cfg)
    with open(os.path.join(out, "fitness.csv"), "w") as fh:
        fh.write("epoch,fitness\n")
        for e, f in enumerate(plan.fitness_per_epoch):
            fh.write("%d,%r\n" % (e, f))
    _write(
        os.path.join(out, "trajectory.svg"),
        plan_svg(list(plan.epochs), jammer, cfg),
    )


def cmd_mission(args) -> int:
    cfg = _resolve_cfg(args)
    out = _run_dir(args, "mission", cfg)
    params = GaParams(
        population_size=args.pop, generations=args.gens, mode=MODE_POSITION_PROGRESSING
    )
    initials = _draw_formation(cfg, args.seed)
    jammer = Vec2(*args.jammer)
    try:
        plan = run_mission(
            params, initials, jammer, tuple(args.target_band), cfg, args.seed,
            max_epochs=args.max_epochs,
        )
    except ValueError as exc:
        print("mission: %s" % exc, file=sys.stderr)
        return 2
    _write_mission_outputs(out, plan, jammer, cfg)
    print(
        "mission: epochs %d  completed %s  objective %.6e  (%s)"
        % (plan.num_epochs, plan.completed, plan.objective(), out)
    )
    return 0


def cmd_adaptive(args) -> int:
    cfg = _resolve_cfg(args)
    out = _run_dir(args, "adaptive", cfg)
    params = GaParams(
        population_size=args.pop, generations=args.gens, mode=MODE_POSITION_PROGRESSING
    )
    # The rotation pivots about the swarm's center of mass, so adaptive runs
    # start from the inscribed circle rather than an arbitrary formation.
    rng = substream(args.seed, "formation")
    cell = slot_cell(0, 0, cfg)
    center = np.asarray(cell.center)
    radius = cfg.cell_size_m / 2.0
    initials = np.empty((cfg.num_uavs, 2))
    for i in range(cfg.num_uavs):
        while True:
            p = rng.uniform(-radius, radius, 2)
            if np.linalg.norm(p) <= radius:
                initials[i] = center + p
                break
    jammer = Vec2(*args.jammer)
    try:
        plan = run_adaptive(
            params, initials, jammer, tuple(args.target), cfg, args.seed,
            max_epochs=args.max_epochs,
        )
    except ValueError as exc:
        print("adaptive: %s" % exc, file=sys.stderr)
        return 2
    _write_mission_outputs(out, plan, jammer, cfg)
    print(
        "adaptive: rotation %.3f deg  epochs %d  completed %s  (%s)"
        % (plan.rotation_angle_deg, plan.num_epochs, plan.completed, out)
    )
    return 0


def cmd_dataset(args) -> int:
    cfg = _resolve_cfg(args)
    out = _run_dir(args, "dataset", cfg)
    params = GaParams(
        population_size=args.pop, generations=args.gens, mode=MODE_POSITION_PROGRESSING
    )
    train_path = os.path.join(out, "train.jsonl")
    test_path = os.path.join(out, "test.jsonl")
    generate_dataset(
        cfg, params, SampleSpec(count=args.train, continuous=False), args.seed,
        path=train_path,
    )
    generate_dataset(
        cfg, params, SampleSpec(count=args.test, continuous=True), args.seed + 1,
        path=test_path,
    )
    print("dataset: %d train, %d test  (%s)" % (args.train, args.test, out))
    return 0


def _predict_all(args, cfg, records):
    """Returns (algorithm label, list of plan blocks)."""
    if args.predictor == "knn":
        if not args.train:
            raise ValueError("--train is required for the knn predictor")
        _, train_records = read_dataset(args.train)
        model = knn_fit(train_records, k=args.k)
        return "KNN (K=%d)" % args.k, [
            knn_predict(model, r.features) for r in records
        ]
    if args.predictor == "random":
        blocks = []
        for i, r in enumerate(records):
            ctx = GaContext(r.initial_positions, r.jammer, cfg)
            block, _ = random_plan(ctx, seed=args.seed + i)
            blocks.append(block)
        return "Random", blocks
    if args.predictor == "ga-ref":
        return "GA (Ref)", [
            np.concatenate([r.initial_positions[:, None, :], r.label_block], axis=1)
            for r in records
        ]
    if not args.preds:
        raise ValueError("--preds is required for the file predictor")
    _, pred_records = read_dataset(args.preds)
    if len(pred_records) != len(records):
        raise ValueError("prediction file does not align with the evaluation set")
    blocks = []
    for r, p in zip(records, pred_records):
        if not np.array_equal(r.features, p.features):
            raise ValueError("prediction features do not match the evaluation set")
        blocks.append(
            np.concatenate([r.initial_positions[:, None, :], p.label_block], axis=1)
        )
    name = pred_records[0].generator if pred_records else "File"
    return name, blocks


def cmd_eval(args) -> int:
    source = args.train if args.on == "train" else args.test
    if source is None:
        print("eval: --%s file required for --on %s" % (args.on, args.on), file=sys.stderr)
        return 2
    header, records = read_dataset(source)
    if not records:
        print("eval: empty dataset %r" % source, file=sys.stderr)
        return 2
    cfg = _resolve_cfg(args)
    if cfg.collision_rule.value != header["rule"]:
        cfg = dataclasses.replace(cfg, collision_rule=CollisionRule(header["rule"]))
    out = _run_dir(args, "eval", cfg)
    try:
        t0 = time.perf_counter()
        label, blocks = _predict_all(args, cfg, records)
        wall = time.perf_counter() - t0
    except (OSError, ValueError) as exc:
        print("eval: %s" % exc, file=sys.stderr)
        return 2
    table = evaluate_predictor(blocks, records, cfg, wall_time_s=wall)
    rows = [(label, cfg.collision_rule.value, table)]
    write_metrics_csv(rows, os.path.join(out, "metrics.csv"))
    write_metrics_jsonl(rows, os.path.join(out, "metrics.jsonl"))
    print(
        "eval %s on %s: fitness %.6e  collision %.2f%%  med %.3f m  (%s)"
        % (label, args.on, table.mean_fitness, table.collision_pct, table.med_m, out)
    )
    return 0


def cmd_serve(args) -> int:
    cfg = _resolve_cfg(args)
    env_cfg = EnvConfig(base=cfg, reward_scale=args.reward_scale)
    if args.port:
        serve_tcp(env_cfg, args.port)
    else:
        serve_stdio(env_cfg)
    return 0


def cmd_check(args) -> int:
    cfg = _resolve_cfg(args)
    try:
        header, plan = read_plan(args.plan)
    except (OSError, ValueError) as exc:
        print("check: %s" % exc, file=sys.stderr)
        return 2
    if header["rule"] != cfg.collision_rule.value:
        cfg = dataclasses.replace(cfg, collision_rule=CollisionRule(header["rule"]))
    bad = 0
    for e, block in enumerate(plan.epochs):
        finding = check_plan(block, cfg, epoch=e)
        if finding:
            bad += 1
            print(
                "epoch %d: %s pair=%s slot=%s min_dist=%.6f"
                % (e, finding.kind, finding.pair, finding.slot, finding.min_dist_m)
            )
        else:
            print("epoch %d: clean" % e)
    print("check: %d epoch(s), %d finding(s)" % (plan.num_epochs, bad))
    return 0 if bad == 0 else 1


def _add_common(p, seed_default=0):
    p.add_argument("--config", help="config file path (or $%s)" % CONFIG_ENV_VAR)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--rule", type=int, choices=(1, 2, 3), help="collision rule override")
    p.add_argument("--out", default="runs", help="output root directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullsteer",
        description="Anti-jamming swarm planning: GA, baselines, datasets, RL env.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ga-run", help="one GA optimization run")
    _add_common(p)
    p.add_argument("--mode", choices=sorted(_MODE_FLAGS), default="orientation-only")
    p.add_argument("--pop", type=int, default=50)
    p.add_argument("--gens", type=int, default=50)
    p.add_argument("--jammer", type=float, nargs=2, default=DEFAULT_JAMMER, metavar=("X", "Y"))
    p.set_defaults(func=cmd_ga_run)

    p = sub.add_parser("mission", help="multi-epoch corridor mission")
    _add_common(p)
    p.add_argument("--target-band", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--pop", type=int, default=30)
    p.add_argument("--gens", type=int, default=20)
    p.add_argument("--max-epochs", type=int, default=32)
    p.add_argument("--jammer", type=float, nargs=2, default=DEFAULT_JAMMER, metavar=("X", "Y"))
    p.set_defaults(func=cmd_mission)

    p = sub.add_parser("adaptive", help="mission toward an arbitrary target point")
    _add_common(p)
    p.add_argument("--target", type=float, nargs=2, required=True, metavar=("X", "Y"))
    p.add_argument("--pop", type=int, default=30)
    p.add_argument("--gens", type=int, default=20)
    p.add_argument("--max-epochs", type=int, default=32)
    p.add_argument("--jammer", type=float, nargs=2, default=DEFAULT_JAMMER, metavar=("X", "Y"))
    p.set_defaults(func=cmd_adaptive)

    p = sub.add_parser("dataset", help="generate GA-labeled train/test sets")
    _add_common(p)
    p.add_argument("--train", type=int, default=100)
    p.add_argument("--test", type=int, default=20)
    p.add_argument("--pop", type=int, default=24)
    p.add_argument("--gens", type=int, default=16)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("eval", help="score a predictor against a dataset")
    _add_common(p)
    p.add_argument("--predictor", choices=("knn", "random", "ga-ref", "file"), required=True)
    p.add_argument("--train", help="training dataset file (knn fit; eval set when --on train)")
    p.add_argument("--test", help="test dataset file")
    p.add_argument("--on", choices=("train", "test"), default="test")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--preds", help="predictions file for --predictor file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the environment protocol server")
    _add_common(p)
    p.add_argument("--port", type=int, default=0, help="TCP port; omit for stdio")
    p.add_argument("--reward-scale", type=float, default=1e6)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("check", help="verify a plan file against the collision rules")
    _add_common(p)
    p.add_argument("--plan", required=True, help="plan file to check")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
