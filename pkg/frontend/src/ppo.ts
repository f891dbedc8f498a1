// Proximal policy optimization with a diagonal Gaussian head, generalized
// advantage estimation, and a frozen observation normalizer. Rollouts are
// collected as whole episodes, so advantage sweeps never bootstrap across a
// reset boundary.

import { Adam, clipGlobalNorm, Mlp, MlpGrads, mlpFromJSON, mlpToJSON, type MlpJSON } from "./mlp.js";
import { gaussianSource, shuffleInPlace, substream, type Rng } from "./rng.js";
import { type EnvLike, type EnvScenario } from "./client.js";

const LOG_2PI = Math.log(2 * Math.PI);
const LOG_STD_MIN = -5;
const LOG_STD_MAX = 1;

/**
 * Per-feature affine normalizer fitted once on the first data the agent
 * sees, then frozen. Freezing keeps a policy resumed in a later phase
 * consistent with the statistics it was trained under.
 */
export class ObsNormalizer {
  readonly mean: Float64Array;
  readonly std: Float64Array;
  fitted = false;

  constructor(readonly dim: number) {
    this.mean = new Float64Array(dim);
    this.std = new Float64Array(dim).fill(1);
  }

  fit(samples: ArrayLike<number>[]): void {
    if (this.fitted) return;
    if (samples.length < 2) throw new Error("need at least 2 samples to fit");
    const n = samples.length;
    for (let j = 0; j < this.dim; j++) {
      let s = 0;
      for (let i = 0; i < n; i++) s += samples[i][j];
      this.mean[j] = s / n;
      let sq = 0;
      for (let i = 0; i < n; i++) {
        const d = samples[i][j] - this.mean[j];
        sq += d * d;
      }
      this.std[j] = Math.max(Math.sqrt(sq / n), 1e-8);
    }
    this.fitted = true;
  }

  apply(obs: ArrayLike<number>): Float64Array {
    const out = new Float64Array(this.dim);
    for (let j = 0; j < this.dim; j++) out[j] = (obs[j] - this.mean[j]) / this.std[j];
    return out;
  }
}

export class GaussianPolicy {
  constructor(
    readonly mean: Mlp,
    readonly logStd: Float64Array,
  ) {}

  static fresh(obsDim: number, actDim: number, hidden: number[], rng: Rng, initLogStd: number): GaussianPolicy {
    // Small output scale starts the mean near zero, the action-space center.
    const mean = new Mlp([obsDim, ...hidden, actDim], { rng, outScale: 0.01 });
    return new GaussianPolicy(mean, new Float64Array(actDim).fill(initLogStd));
  }

  get actDim(): number {
    return this.logStd.length;
  }

  sample(nobs: Float64Array, gauss: () => number): { action: Float64Array; logp: number } {
    const mu = this.mean.forward(nobs);
    const action = new Float64Array(this.actDim);
    for (let i = 0; i < this.actDim; i++) {
      action[i] = mu[i] + Math.exp(this.logStd[i]) * gauss();
    }
    return { action, logp: this.logpOf(mu, action) };
  }

  logpOf(mu: ArrayLike<number>, action: ArrayLike<number>): number {
    let lp = -0.5 * this.actDim * LOG_2PI;
    for (let i = 0; i < this.actDim; i++) {
      const z = (action[i] - mu[i]) / Math.exp(this.logStd[i]);
      lp += -0.5 * z * z - this.logStd[i];
    }
    return lp;
  }

  deterministic(nobs: Float64Array): Float64Array {
    return this.mean.forward(nobs);
  }

  entropy(): number {
    let h = 0.5 * this.actDim * (1 + LOG_2PI);
    for (let i = 0; i < this.actDim; i++) h += this.logStd[i];
    return h;
  }

  params(): Float64Array[] {
    return [...this.mean.params(), this.logStd];
  }
}

/** Policy, value net, and the shared observation normalizer, as one unit. */
export class PpoAgent {
  constructor(
    readonly norm: ObsNormalizer,
    readonly policy: GaussianPolicy,
    readonly value: Mlp,
  ) {}

  static fresh(obsDim: number, actDim: number, seed: number, hidden: number[] = [64, 64], initLogStd = Math.log(0.4)): PpoAgent {
    const rng = substream(seed, "agent-init");
    return new PpoAgent(
      new ObsNormalizer(obsDim),
      GaussianPolicy.fresh(obsDim, actDim, hidden, rng, initLogStd),
      new Mlp([obsDim, ...hidden, 1], { rng }),
    );
  }

  /** Deterministic (mean) action for a raw, unnormalized observation. */
  act(obs: ArrayLike<number>): Float64Array {
    return this.policy.deterministic(this.norm.apply(obs));
  }
}

export interface AgentJSON {
  kind: "ppo-agent";
  obsDim: number;
  actDim: number;
  norm: { mean: number[]; std: number[]; fitted: boolean };
  policy: { mean: MlpJSON; logStd: number[] };
  value: MlpJSON;
}

export function agentToJSON(agent: PpoAgent): AgentJSON {
  return {
    kind: "ppo-agent",
    obsDim: agent.norm.dim,
    actDim: agent.policy.actDim,
    norm: {
      mean: Array.from(agent.norm.mean),
      std: Array.from(agent.norm.std),
      fitted: agent.norm.fitted,
    },
    policy: { mean: mlpToJSON(agent.policy.mean), logStd: Array.from(agent.policy.logStd) },
    value: mlpToJSON(agent.value),
  };
}

export function agentFromJSON(obj: AgentJSON): PpoAgent {
  if (obj.kind !== "ppo-agent") throw new Error(`not a policy artifact: kind=${obj.kind}`);
  const norm = new ObsNormalizer(obj.obsDim);
  norm.mean.set(obj.norm.mean);
  norm.std.set(obj.norm.std);
  norm.fitted = obj.norm.fitted;
  const policy = new GaussianPolicy(mlpFromJSON(obj.policy.mean), Float64Array.from(obj.policy.logStd));
  return new PpoAgent(norm, policy, mlpFromJSON(obj.value));
}

/**
 * Generalized advantage estimation over a buffer of completed episodes.
 * dones[t] = 1 marks an episode's final transition; values beyond it never
 * leak backward. Returns advantages and the matching value targets.
 */
export function gaeAdvantages(
  rewards: Float64Array,
  values: Float64Array,
  dones: Uint8Array,
  gamma: number,
  lam: number,
): { adv: Float64Array; ret: Float64Array } {
  const n = rewards.length;
  const adv = new Float64Array(n);
  let running = 0;
  for (let t = n - 1; t >= 0; t--) {
    const cont = dones[t] ? 0 : 1;
    const nextValue = cont && t + 1 < n ? values[t + 1] : 0;
    const delta = rewards[t] + gamma * cont * nextValue - values[t];
    running = delta + gamma * lam * cont * running;
    adv[t] = running;
  }
  const ret = new Float64Array(n);
  for (let t = 0; t < n; t++) ret[t] = adv[t] + values[t];
  return { adv, ret };
}

export interface PpoHyper {
  rolloutSteps: number;
  minibatch: number;
  epochs: number;
  gamma: number;
  lam: number;
  clip: number;
  lrPolicy: number;
  lrValue: number;
  entropyCoef: number;
  maxGradNorm: number;
  targetKl: number; // early-stop an update pass when approx KL passes this
  // Subtracted from a transition's learning reward when the env flags a
  // separation violation on it. The env only zeroes the offending slot's
  // reward, so a return maximizer can still profit from plans that collide
  // at the end; the penalty makes flagged transitions strictly worse than
  // any legal one. Logged reward rows always stay the raw env rewards.
  violationPenalty: number;
}

export const DEFAULT_HYPER: PpoHyper = {
  rolloutSteps: 2000,
  minibatch: 64,
  epochs: 10,
  gamma: 0.99,
  lam: 0.95,
  clip: 0.2,
  lrPolicy: 3e-4,
  lrValue: 1e-3,
  entropyCoef: 0.0,
  maxGradNorm: 0.5,
  targetKl: 0.05,
  violationPenalty: 0,
};

export interface Rollout {
  rawObs: Float64Array[]; // unnormalized observations at decision time
  actions: Float64Array[];
  logps: Float64Array;
  rewards: Float64Array;
  dones: Uint8Array;
  episodeMeanRewards: number[];
  steps: number;
}

/**
 * Run whole episodes until at least minSteps transitions are banked.
 * Reset seeds advance with the global episode counter so randomized
 * scenarios never repeat within a run yet replay exactly across runs.
 * The banked rewards carry the violation penalty for learning;
 * episodeMeanRewards stays the raw env reward for logging.
 */
export async function collectRollout(
  env: EnvLike,
  agent: PpoAgent,
  gauss: () => number,
  minSteps: number,
  seedBase: number,
  episodeOffset: number,
  violationPenalty = 0,
): Promise<Rollout> {
  const rawObs: Float64Array[] = [];
  const actions: Float64Array[] = [];
  const logps: number[] = [];
  const rewards: number[] = [];
  const dones: number[] = [];
  const episodeMeanRewards: number[] = [];
  let episode = episodeOffset;
  while (rewards.length < minSteps) {
    let obs = await env.reset(seedBase + episode);
    episode += 1;
    let done = false;
    let total = 0;
    let len = 0;
    while (!done) {
      const raw = Float64Array.from(obs);
      const { action, logp } = agent.policy.sample(agent.norm.apply(raw), gauss);
      const out = await env.step(action);
      rawObs.push(raw);
      actions.push(action);
      logps.push(logp);
      rewards.push(out.info.violation !== null ? out.reward - violationPenalty : out.reward);
      total += out.reward;
      len += 1;
      done = out.done;
      dones.push(done ? 1 : 0);
      obs = out.obs;
    }
    episodeMeanRewards.push(total / len);
  }
  return {
    rawObs,
    actions,
    logps: Float64Array.from(logps),
    rewards: Float64Array.from(rewards),
    dones: Uint8Array.from(dones),
    episodeMeanRewards,
    steps: rewards.length,
  };
}

export interface UpdateStats {
  policyLoss: number;
  valueLoss: number;
  approxKl: number;
  clipFraction: number;
  entropy: number;
  epochsRun: number;
}

export interface PpoOptimizers {
  policy: Adam;
  value: Adam;
}

export function makeOptimizers(agent: PpoAgent, hyper: PpoHyper): PpoOptimizers {
  return {
    policy: new Adam(agent.policy.params(), hyper.lrPolicy),
    value: new Adam(agent.value.params(), hyper.lrValue),
  };
}

/** One PPO update over a collected rollout (several shuffled epochs). */
export function ppoUpdate(
  agent: PpoAgent,
  opts: PpoOptimizers,
  rollout: Rollout,
  hyper: PpoHyper,
  shuffleRng: Rng,
): UpdateStats {
  const n = rollout.steps;
  const nobs = rollout.rawObs.map((o) => agent.norm.apply(o));
  const values = new Float64Array(n);
  for (let t = 0; t < n; t++) values[t] = agent.value.forward(nobs[t])[0];
  const { adv, ret } = gaeAdvantages(rollout.rewards, values, rollout.dones, hyper.gamma, hyper.lam);

  // Normalized advantages stabilize the surrogate across reward scales.
  let mean = 0;
  for (let t = 0; t < n; t++) mean += adv[t];
  mean /= n;
  let varSum = 0;
  for (let t = 0; t < n; t++) varSum += (adv[t] - mean) * (adv[t] - mean);
  const std = Math.sqrt(varSum / n) + 1e-8;
  for (let t = 0; t < n; t++) adv[t] = (adv[t] - mean) / std;

  const policyGrads = new MlpGrads(agent.policy.mean);
  const logStdGrad = new Float64Array(agent.policy.actDim);
  const valueGrads = new MlpGrads(agent.value);
  const indices = Array.from({ length: n }, (_, i) => i);

  let policyLossSum = 0;
  let valueLossSum = 0;
  let klSum = 0;
  let clipCount = 0;
  let sampleCount = 0;
  let epochsRun = 0;

  for (let epoch = 0; epoch < hyper.epochs; epoch++) {
    shuffleInPlace(shuffleRng, indices);
    let epochKl = 0;
    let epochSamples = 0;
    for (let start = 0; start < n; start += hyper.minibatch) {
      const batch = indices.slice(start, start + hyper.minibatch);
      policyGrads.zero();
      logStdGrad.fill(0);
      valueGrads.zero();
      for (const t of batch) {
        const acts = agent.policy.mean.forwardCached(nobs[t]);
        const mu = acts[acts.length - 1];
        const lp = agent.policy.logpOf(mu, rollout.actions[t]);
        const ratio = Math.exp(lp - rollout.logps[t]);
        const a = adv[t];
        const clipped = a >= 0 ? ratio > 1 + hyper.clip : ratio < 1 - hyper.clip;
        policyLossSum += -Math.min(ratio * a, clamp(ratio, 1 - hyper.clip, 1 + hyper.clip) * a);
        klSum += rollout.logps[t] - lp;
        epochKl += rollout.logps[t] - lp;
        if (clipped) clipCount += 1;
        sampleCount += 1;
        epochSamples += 1;

        if (!clipped) {
          // dLoss/dlogp = -ratio * adv on the active branch
          const dlp = (-ratio * a) / batch.length;
          const dMu = new Float64Array(agent.policy.actDim);
          for (let i = 0; i < agent.policy.actDim; i++) {
            const sigma = Math.exp(agent.policy.logStd[i]);
            const z = (rollout.actions[t][i] - mu[i]) / sigma;
            dMu[i] = dlp * (z / sigma);
            logStdGrad[i] += dlp * (z * z - 1);
          }
          agent.policy.mean.backward(acts, dMu, policyGrads);
        }
        // entropy bonus pushes logStd up regardless of the clip branch
        for (let i = 0; i < agent.policy.actDim; i++) {
          logStdGrad[i] -= hyper.entropyCoef / batch.length;
        }

        const vActs = agent.value.forwardCached(nobs[t]);
        const v = vActs[vActs.length - 1][0];
        const vErr = v - ret[t];
        valueLossSum += 0.5 * vErr * vErr;
        agent.value.backward(vActs, [vErr / batch.length], valueGrads);
      }
      const pg = [...policyGrads.list(), logStdGrad];
      clipGlobalNorm(pg, hyper.maxGradNorm);
      opts.policy.step(pg);
      for (let i = 0; i < agent.policy.logStd.length; i++) {
        agent.policy.logStd[i] = clamp(agent.policy.logStd[i], LOG_STD_MIN, LOG_STD_MAX);
      }
      const vg = valueGrads.list();
      clipGlobalNorm(vg, hyper.maxGradNorm);
      opts.value.step(vg);
    }
    epochsRun += 1;
    if (epochSamples > 0 && epochKl / epochSamples > hyper.targetKl) break;
  }

  return {
    policyLoss: policyLossSum / Math.max(sampleCount, 1),
    valueLoss: valueLossSum / Math.max(sampleCount, 1),
    approxKl: klSum / Math.max(sampleCount, 1),
    clipFraction: clipCount / Math.max(sampleCount, 1),
    entropy: agent.policy.entropy(),
    epochsRun,
  };
}

function clamp(x: number, lo: number, hi: number): number {
  return x < lo ? lo : x > hi ? hi : x;
}

export interface RewardRow {
  episode: number;
  meanReward: number;
}

export interface PpoPhaseConfig {
  scenario: EnvScenario;
  totalSteps: number;
  seed: number;
  hyper?: Partial<PpoHyper>;
  startEpisode?: number; // continue episode numbering from an earlier phase
  onIteration?: (iter: number, steps: number, meanReward: number, stats: UpdateStats) => void;
}

export interface PpoRunResult {
  rows: RewardRow[];
  steps: number;
  iterations: number;
  wallTimeS: number;
  finalEpisode: number;
}

/**
 * Supervised pass fitting the value net to advantage-estimation returns
 * of one rollout, leaving the policy untouched. Starting every phase
 * this way keeps the first policy updates from being driven by a value
 * net that has never seen the phase's reward scale (a fresh net after
 * cloning, or a stale one after a scenario switch).
 */
function fitValueWarmup(agent: PpoAgent, rollout: Rollout, hyper: PpoHyper, rng: Rng): void {
  const nobs = rollout.rawObs.map((o) => agent.norm.apply(o));
  const values = new Float64Array(rollout.steps);
  for (let t = 0; t < rollout.steps; t++) values[t] = agent.value.forward(nobs[t])[0];
  const { ret } = gaeAdvantages(rollout.rewards, values, rollout.dones, hyper.gamma, hyper.lam);
  const opt = new Adam(agent.value.params(), hyper.lrValue);
  const grads = new MlpGrads(agent.value);
  const indices = Array.from({ length: rollout.steps }, (_, i) => i);
  for (let epoch = 0; epoch < hyper.epochs; epoch++) {
    shuffleInPlace(rng, indices);
    for (let start = 0; start < indices.length; start += hyper.minibatch) {
      const batch = indices.slice(start, start + hyper.minibatch);
      grads.zero();
      for (const t of batch) {
        const acts = agent.value.forwardCached(nobs[t]);
        const vErr = acts[acts.length - 1][0] - ret[t];
        agent.value.backward(acts, [vErr / batch.length], grads);
      }
      const g = grads.list();
      clipGlobalNorm(g, hyper.maxGradNorm);
      opt.step(g);
    }
  }
}

/**
 * Train the agent in one scenario phase. Every phase opens with a warmup
 * rollout that is logged but never used for a policy update: the first
 * phase fits the obs normalizer on it, and every phase fits the value
 * net on it. The normalizer stays frozen after that first fit, so a
 * policy resumed later keeps acting in the coordinates it learned.
 */
export async function trainPpo(env: EnvLike, agent: PpoAgent, cfg: PpoPhaseConfig): Promise<PpoRunResult> {
  const began = Date.now();
  const hyper: PpoHyper = { ...DEFAULT_HYPER, ...cfg.hyper };
  await env.configure(cfg.scenario);
  const gauss = gaussianSource(substream(cfg.seed, "ppo-actions"));
  const shuffleRng = substream(cfg.seed, "ppo-shuffle");
  const seedBase = cfg.seed * 1_000_003;
  const rows: RewardRow[] = [];
  let episode = cfg.startEpisode ?? 0;

  const bank = (meanRewards: number[]): void => {
    for (const r of meanRewards) {
      rows.push({ episode, meanReward: r });
      episode += 1;
    }
  };

  {
    const warmup = await collectRollout(env, agent, gauss, hyper.rolloutSteps, seedBase, episode, hyper.violationPenalty);
    if (!agent.norm.fitted) agent.norm.fit(warmup.rawObs);
    bank(warmup.episodeMeanRewards);
    fitValueWarmup(agent, warmup, hyper, shuffleRng);
  }

  const opts = makeOptimizers(agent, hyper);
  let steps = 0;
  let iterations = 0;
  while (steps < cfg.totalSteps) {
    const rollout = await collectRollout(env, agent, gauss, hyper.rolloutSteps, seedBase, episode, hyper.violationPenalty);
    bank(rollout.episodeMeanRewards);
    steps += rollout.steps;
    const stats = ppoUpdate(agent, opts, rollout, hyper, shuffleRng);
    iterations += 1;
    if (cfg.onIteration) {
      const recent = rollout.episodeMeanRewards;
      const meanReward = recent.reduce((s, v) => s + v, 0) / recent.length;
      cfg.onIteration(iterations, steps, meanReward, stats);
    }
  }

  return { rows, steps, iterations, wallTimeS: (Date.now() - began) / 1000, finalEpisode: episode };
}

/**
 * Roll the current policy for a fixed number of evaluation episodes.
 * Deterministic mode uses the mean action; stochastic mode samples from
 * the policy with its own seeded noise stream.
 */
export async function evaluatePolicy(
  env: EnvLike,
  agent: PpoAgent,
  episodes: number,
  seed: number,
  deterministic: boolean,
): Promise<{ meanEpisodeReward: number; violations: number; episodes: number }> {
  const gauss = gaussianSource(substream(seed, "eval-actions"));
  const seedBase = seed * 2_000_003;
  let violations = 0;
  let rewardSum = 0;
  for (let e = 0; e < episodes; e++) {
    let obs = await env.reset(seedBase + e);
    let done = false;
    let total = 0;
    while (!done) {
      const nobs = agent.norm.apply(Float64Array.from(obs));
      const action = deterministic ? agent.policy.deterministic(nobs) : agent.policy.sample(nobs, gauss).action;
      const out = await env.step(action);
      total += out.reward;
      done = out.done;
      obs = out.obs;
      if (out.info.violation !== null) violations += 1;
    }
    rewardSum += total;
  }
  return { meanEpisodeReward: rewardSum / episodes, violations, episodes };
}
