// Behavior cloning on plan-dataset labels. Labels are slot positions in
// meters; replaying them through the env turns each one into the exact
// action that lands on it, because planned steps fit inside the per-slot
// travel budget and the cell, so the env applies them unclamped.
//
// Replayed positions match the labels to float round-off, and the summed
// step rewards recover each record's stored fitness exactly — except for
// plans that park two UAVs on the same point. The link score is
// discontinuous there (a zero-length link has no bearing, so the gain
// toward the other UAV falls back to a convention), and round-off decides
// which side of the discontinuity the replay lands on. Plans that keep
// every pair strictly apart have no such branch.

import { Adam, MlpGrads } from "./mlp.js";
import { type PpoAgent } from "./ppo.js";
import { substream, shuffleInPlace } from "./rng.js";
import { type EnvLike } from "./client.js";
import { initialPositionsOf, jammerOf, labelByUav, type PlanRecord } from "./data.js";

export interface EnvScales {
  cellEdgeM: number; // meters per unit of normalized position
  actionScaleM: number; // meters of travel for a full-scale action component
}

/**
 * Measure the env's position normalization and action scale from the env
 * itself: two UAVs pinned a known distance apart give meters-per-unit, a
 * full +x action from a spot with room to move gives the action scale.
 * Keeps the harness free of copied scenario constants.
 */
export async function calibrateEnvScales(env: EnvLike): Promise<EnvScales> {
  await env.configure({
    rule: 1,
    randomize: "Fixed",
    fixedInitials: [
      [5, 30],
      [45, 30],
      [20, 10],
      [40, 50],
    ],
    fixedJammer: [30, 500],
  });
  const before = await env.reset(0);
  const spreadNorm = before[2] - before[0]; // x of UAV 1 minus x of UAV 0
  if (!(spreadNorm > 0)) throw new Error("calibration reset returned a degenerate spread");
  const cellEdgeM = 40 / spreadNorm;
  const out = await env.step([1, 0, 0, 0, 0, 0, 0, 0]);
  const movedNorm = out.obs[0] - before[0];
  if (!(movedNorm > 0)) throw new Error("calibration step did not move UAV 0");
  return { cellEdgeM, actionScaleM: movedNorm * cellEdgeM };
}

export interface ClonePair {
  obs: Float64Array; // raw observation at decision time
  action: Float64Array;
}

export interface CloneReplay {
  pairs: ClonePair[];
  replayFitness: number[]; // per record: summed step rewards * scale / slots
}

/**
 * Replay each record's label plan through the env, recording (obs, action)
 * pairs. replayFitness recovers the plan objective from step rewards; a
 * caller can hold it against the fitness stored in the dataset to confirm
 * the replay landed exactly where the labels say.
 */
export async function collectClonePairs(
  env: EnvLike,
  records: PlanRecord[],
  opts: { rule: 1 | 2 | 3; rewardScale: number; actionScaleM: number },
): Promise<CloneReplay> {
  const pairs: ClonePair[] = [];
  const replayFitness: number[] = [];
  for (const rec of records) {
    await env.configure({
      rule: opts.rule,
      randomize: "Fixed",
      fixedInitials: initialPositionsOf(rec),
      fixedJammer: jammerOf(rec),
      rewardScale: opts.rewardScale,
    });
    let obs = await env.reset(0);
    const n = initialPositionsOf(rec).length;
    const t = rec.label.length / n;
    const byUav = labelByUav(rec, n, t);
    let current = initialPositionsOf(rec);
    let rewardSum = 0;
    for (let s = 0; s < t; s++) {
      const action = new Float64Array(2 * n);
      for (let u = 0; u < n; u++) {
        action[2 * u] = (byUav[u][s][0] - current[u][0]) / opts.actionScaleM;
        action[2 * u + 1] = (byUav[u][s][1] - current[u][1]) / opts.actionScaleM;
      }
      pairs.push({ obs: Float64Array.from(obs), action });
      const out = await env.step(action);
      rewardSum += out.reward;
      if (out.done !== (s === t - 1)) {
        throw new Error(`label replay ended early at slot ${s + 1} (seed ${rec.seed})`);
      }
      obs = out.obs;
      current = byUav.map((rows) => rows[s]);
    }
    replayFitness.push((rewardSum * opts.rewardScale) / t);
  }
  return { pairs, replayFitness };
}

export interface BcConfig {
  epochs: number;
  batch: number;
  lr: number;
  seed: number;
}

/**
 * Fit the policy mean to the cloned actions by minibatch MSE. Fits the
 * agent's obs normalizer on the clone set when it is still unfitted, so a
 * pretrained policy hands PPO a normalizer consistent with its weights.
 * Returns the per-epoch mean loss curve.
 */
export function fitBehaviorClone(agent: PpoAgent, pairs: ClonePair[], cfg: BcConfig): number[] {
  if (pairs.length === 0) throw new Error("no clone pairs");
  if (!agent.norm.fitted) agent.norm.fit(pairs.map((p) => p.obs));
  const nobs = pairs.map((p) => agent.norm.apply(p.obs));
  const net = agent.policy.mean;
  const opt = new Adam(net.params(), cfg.lr);
  const grads = new MlpGrads(net);
  const rng = substream(cfg.seed, "bc-shuffle");
  const indices = Array.from({ length: pairs.length }, (_, i) => i);
  const curve: number[] = [];
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    shuffleInPlace(rng, indices);
    let lossSum = 0;
    for (let start = 0; start < indices.length; start += cfg.batch) {
      const batch = indices.slice(start, start + cfg.batch);
      grads.zero();
      for (const i of batch) {
        const acts = net.forwardCached(nobs[i]);
        const mu = acts[acts.length - 1];
        const dMu = new Float64Array(mu.length);
        for (let d = 0; d < mu.length; d++) {
          const err = mu[d] - pairs[i].action[d];
          dMu[d] = err / batch.length;
          lossSum += 0.5 * err * err;
        }
        net.backward(acts, dMu, grads);
      }
      opt.step(grads.list());
    }
    curve.push(lossSum / indices.length);
  }
  return curve;
}
