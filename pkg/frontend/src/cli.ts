#!/usr/bin/env node
// Command-line front door: PPO training phases against a running env
// server, forest regression on plan datasets, policy evaluation, and
// prediction export in the core dataset format.

import fs from "node:fs";
import path from "node:path";
import { parseArgs } from "node:util";
import { openEndpoint, swarmSizeFromObs, type EnvScenario } from "./client.js";
import { readDataset, writePredictions, writeRewardCsv, labelVector, vectorToLabel } from "./data.js";
import { fitForest, forestFromJSON, forestToJSON, predictForest, type ForestParams } from "./forest.js";
import { agentFromJSON, agentToJSON, evaluatePolicy, PpoAgent, trainPpo, type PpoHyper } from "./ppo.js";
import { calibrateEnvScales, collectClonePairs, fitBehaviorClone } from "./clone.js";

// Default fixed-phase scenario: the four corners of a centered square,
// jammer dead ahead of the corridor.
const FIXED_INITIALS = [
  [15, 15],
  [45, 15],
  [15, 45],
  [45, 45],
];
const FIXED_JAMMER: [number, number] = [30, 500];
const DEFAULT_REWARD_SCALE = 1e15; // keeps per-step rewards near unit size

function usage(): void {
  console.log(
    [
      "usage: nullsteer-harness <command> [options]",
      "",
      "commands:",
      "  train-ppo    --out DIR [--rule N] [--phase Fixed|Randomized] [--steps N]",
      "               [--seed N] [--endpoint SPEC] [--init policy.json] [--clone data.jsonl]",
      "               [--reward-scale X] [--rollout N] [--violation-penalty X]",
      "  eval-policy  --policy policy.json [--rule N] [--phase Fixed|Randomized]",
      "               [--episodes N] [--seed N] [--deterministic] [--endpoint SPEC]",
      "               [--reward-scale X]",
      "  train-rf     --train data.jsonl --out DIR [--trees N] [--depth N]",
      "               [--min-leaf N] [--max-features all|sqrt|N] [--no-bootstrap] [--seed N]",
      "  predict-rf   --model forest.json --eval data.jsonl --out preds.jsonl [--label NAME]",
    ].join("\n"),
  );
}

function scenarioFor(
  rule: 1 | 2 | 3,
  phase: string,
  rewardScale: number,
): EnvScenario {
  if (phase === "Fixed") {
    return {
      rule,
      randomize: "Fixed",
      fixedInitials: FIXED_INITIALS,
      fixedJammer: FIXED_JAMMER,
      rewardScale,
    };
  }
  if (phase === "Randomized") {
    return { rule, randomize: "Randomized", rewardScale };
  }
  throw new Error(`unknown phase: ${phase} (expected Fixed or Randomized)`);
}

function parseRule(raw: string): 1 | 2 | 3 {
  const rule = Number(raw);
  if (rule !== 1 && rule !== 2 && rule !== 3) throw new Error(`rule must be 1, 2, or 3 (got ${raw})`);
  return rule;
}

async function cmdTrainPpo(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      out: { type: "string" },
      rule: { type: "string", default: "1" },
      phase: { type: "string", default: "Fixed" },
      steps: { type: "string", default: "50000" },
      seed: { type: "string", default: "0" },
      endpoint: { type: "string" },
      init: { type: "string" },
      clone: { type: "string" },
      "reward-scale": { type: "string", default: String(DEFAULT_REWARD_SCALE) },
      rollout: { type: "string", default: "2000" },
      "violation-penalty": { type: "string", default: "0" },
    },
  });
  if (!values.out) throw new Error("--out is required");
  const rule = parseRule(values.rule!);
  const rewardScale = Number(values["reward-scale"]);
  const scenario = scenarioFor(rule, values.phase!, rewardScale);
  const seed = Number(values.seed);
  const hyper: Partial<PpoHyper> = {
    rolloutSteps: Number(values.rollout),
    violationPenalty: Number(values["violation-penalty"]),
  };

  const env = await openEndpoint(values.endpoint);
  try {
    let agent: PpoAgent;
    if (values.init) {
      agent = agentFromJSON(JSON.parse(fs.readFileSync(values.init, "utf8")));
    } else {
      await env.configure(scenario);
      const probe = await env.reset(0);
      agent = PpoAgent.fresh(probe.length, 2 * swarmSizeFromObs(probe.length), seed);
    }

    let cloneLoss: number[] | null = null;
    if (values.clone) {
      const data = readDataset(values.clone);
      const scales = await calibrateEnvScales(env);
      const replay = await collectClonePairs(env, data.records, {
        rule,
        rewardScale,
        actionScaleM: scales.actionScaleM,
      });
      cloneLoss = fitBehaviorClone(agent, replay.pairs, {
        epochs: 40,
        batch: 64,
        lr: 1e-3,
        seed,
      });
      // The cloned mean is already a useful policy, so explore tightly
      // around it instead of at the fresh-net width; wide noise on top of
      // a plan that packs the swarm would mostly sample penalty states.
      agent.policy.logStd.fill(Math.log(0.25));
    }

    const result = await trainPpo(env, agent, {
      scenario,
      totalSteps: Number(values.steps),
      seed,
      hyper,
      onIteration: (iter, steps, meanReward, stats) => {
        console.log(
          `iter ${iter}  steps ${steps}  reward ${meanReward.toFixed(4)}  ` +
            `kl ${stats.approxKl.toFixed(4)}  clip ${stats.clipFraction.toFixed(2)}`,
        );
      },
    });

    fs.mkdirSync(values.out, { recursive: true });
    fs.writeFileSync(path.join(values.out, "policy.json"), JSON.stringify(agentToJSON(agent)));
    writeRewardCsv(
      path.join(values.out, "rewards.csv"),
      result.rows.map((r) => ({ episode: r.episode, meanReward: r.meanReward })),
    );
    fs.writeFileSync(
      path.join(values.out, "run.json"),
      JSON.stringify(
        {
          command: "train-ppo",
          rule,
          phase: values.phase,
          steps: result.steps,
          iterations: result.iterations,
          episodes: result.rows.length,
          seed,
          rewardScale,
          violationPenalty: hyper.violationPenalty,
          wallTimeS: result.wallTimeS,
          cloneLoss,
        },
        null,
        2,
      ),
    );
    console.log(
      `train-ppo: ${result.steps} steps, ${result.rows.length} episodes, ` +
        `${result.wallTimeS.toFixed(1)} s  (${values.out})`,
    );
    return 0;
  } finally {
    await env.close();
  }
}

async function cmdEvalPolicy(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      policy: { type: "string" },
      rule: { type: "string", default: "1" },
      phase: { type: "string", default: "Fixed" },
      episodes: { type: "string", default: "100" },
      seed: { type: "string", default: "0" },
      deterministic: { type: "boolean", default: false },
      endpoint: { type: "string" },
      "reward-scale": { type: "string", default: String(DEFAULT_REWARD_SCALE) },
    },
  });
  if (!values.policy) throw new Error("--policy is required");
  const agent = agentFromJSON(JSON.parse(fs.readFileSync(values.policy, "utf8")));
  const rule = parseRule(values.rule!);
  const scenario = scenarioFor(rule, values.phase!, Number(values["reward-scale"]));
  const env = await openEndpoint(values.endpoint);
  try {
    await env.configure(scenario);
    const report = await evaluatePolicy(
      env,
      agent,
      Number(values.episodes),
      Number(values.seed),
      values.deterministic!,
    );
    const summary = {
      episodes: report.episodes,
      violations: report.violations,
      collisionPct: (100 * report.violations) / report.episodes,
      meanEpisodeReward: report.meanEpisodeReward,
      deterministic: values.deterministic,
      rule,
      phase: values.phase,
    };
    console.log(JSON.stringify(summary));
    return 0;
  } finally {
    await env.close();
  }
}

function cmdTrainRf(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      train: { type: "string" },
      out: { type: "string" },
      trees: { type: "string", default: "40" },
      depth: { type: "string", default: "16" },
      "min-leaf": { type: "string", default: "1" },
      "max-features": { type: "string", default: "all" },
      "no-bootstrap": { type: "boolean", default: false },
      seed: { type: "string", default: "0" },
    },
  });
  if (!values.train || !values.out) throw new Error("--train and --out are required");
  const began = Date.now();
  const data = readDataset(values.train);
  const X = data.records.map((r) => r.features);
  const Y = data.records.map((r) => Array.from(labelVector(r)));
  const maxFeaturesRaw = values["max-features"]!;
  const params: ForestParams = {
    nEstimators: Number(values.trees),
    maxDepth: Number(values.depth),
    minSamplesLeaf: Number(values["min-leaf"]),
    maxFeatures:
      maxFeaturesRaw === "all" || maxFeaturesRaw === "sqrt" ? maxFeaturesRaw : Number(maxFeaturesRaw),
    bootstrap: !values["no-bootstrap"],
    seed: Number(values.seed),
  };
  const model = fitForest(X, Y, params);
  fs.mkdirSync(values.out, { recursive: true });
  fs.writeFileSync(path.join(values.out, "forest.json"), forestToJSON(model));
  fs.writeFileSync(
    path.join(values.out, "run.json"),
    JSON.stringify(
      {
        command: "train-rf",
        train: values.train,
        records: data.records.length,
        rule: data.header.rule,
        params: model.params,
        wallTimeS: (Date.now() - began) / 1000,
      },
      null,
      2,
    ),
  );
  console.log(`train-rf: ${model.trees.length} trees on ${data.records.length} records  (${values.out})`);
  return 0;
}

function cmdPredictRf(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string" },
      eval: { type: "string" },
      out: { type: "string" },
      label: { type: "string" },
    },
  });
  if (!values.model || !values.eval || !values.out) {
    throw new Error("--model, --eval, and --out are required");
  }
  const model = forestFromJSON(fs.readFileSync(values.model, "utf8"));
  const evalSet = readDataset(values.eval);
  const label = values.label ?? `RF (Trees=${model.trees.length})`;
  const predicted = evalSet.records.map((rec) => vectorToLabel(predictForest(model, rec.features)));
  writePredictions(values.out, evalSet, predicted, label);
  console.log(`predict-rf: ${predicted.length} predictions as "${label}"  (${values.out})`);
  return 0;
}

async function main(): Promise<number> {
  const [cmd, ...rest] = process.argv.slice(2);
  switch (cmd) {
    case "train-ppo":
      return cmdTrainPpo(rest);
    case "eval-policy":
      return cmdEvalPolicy(rest);
    case "train-rf":
      return cmdTrainRf(rest);
    case "predict-rf":
      return cmdPredictRf(rest);
    default:
      usage();
      return cmd === undefined || cmd === "--help" || cmd === "-h" ? 0 : 2;
  }
}

main()
  .then((code) => {
    process.exitCode = code;
  })
  .catch((err: Error) => {
    console.error(`error: ${err.message}`);
    process.exitCode = 1;
  });
