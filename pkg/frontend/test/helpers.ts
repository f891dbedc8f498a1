// Test doubles and small utilities shared across suites.

import { type EnvLike, type EnvScenario, type StepOutcome } from "../src/client.js";

/**
 * Deterministic 3-step toy environment for exercising the PPO loop
 * without a server. Reward peaks at 1 when the action hits a fixed
 * per-slot target, so mean episode reward has a known ceiling.
 */
export class ToyEnv implements EnvLike {
  static readonly TARGETS = [
    [0.5, -0.3],
    [-0.2, 0.4],
    [0.1, 0.6],
  ];
  private slot = 0;
  private done = true;

  async configure(_scenario: EnvScenario): Promise<void> {}

  async reset(_seed: number): Promise<number[]> {
    this.slot = 0;
    this.done = false;
    return this.observe();
  }

  async step(action: ArrayLike<number>): Promise<StepOutcome> {
    if (this.done) throw new Error("toy episode is done");
    const target = ToyEnv.TARGETS[this.slot];
    let sq = 0;
    for (let i = 0; i < 2; i++) {
      const d = action[i] - target[i];
      sq += d * d;
    }
    this.slot += 1;
    this.done = this.slot === ToyEnv.TARGETS.length;
    return {
      obs: this.observe(),
      reward: 1 - sq,
      done: this.done,
      info: { fitness: 1 - sq, slot: this.slot, violation: null },
    };
  }

  async close(): Promise<void> {}

  private observe(): number[] {
    // one-hot slot phase plus a constant, so the policy can tell slots apart
    const obs = [0, 0, 0, 1];
    if (this.slot < 3) obs[this.slot] = 1;
    return obs;
  }
}

export function mean(xs: ArrayLike<number>): number {
  let s = 0;
  for (let i = 0; i < xs.length; i++) s += xs[i];
  return s / xs.length;
}
