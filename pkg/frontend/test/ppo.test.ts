import { describe, expect, test } from "vitest";
import {
  agentFromJSON,
  agentToJSON,
  evaluatePolicy,
  gaeAdvantages,
  GaussianPolicy,
  ObsNormalizer,
  PpoAgent,
  trainPpo,
} from "../src/ppo.js";
import { Mlp } from "../src/mlp.js";
import { splitmix32 } from "../src/rng.js";
import { mean, ToyEnv } from "./helpers.js";

describe("gae", () => {
  test("matches a hand-worked single episode", () => {
    const { adv, ret } = gaeAdvantages(
      Float64Array.from([1, 0, 2]),
      Float64Array.from([0.5, 0.4, 0.3]),
      Uint8Array.from([0, 0, 1]),
      0.9,
      0.8,
    );
    // deltas: 0.86, -0.13, 1.7; advantages fold back with gamma*lam = 0.72
    expect(adv[2]).toBeCloseTo(1.7, 12);
    expect(adv[1]).toBeCloseTo(-0.13 + 0.72 * 1.7, 12);
    expect(adv[0]).toBeCloseTo(0.86 + 0.72 * adv[1], 12);
    for (let t = 0; t < 3; t++) expect(ret[t]).toBeCloseTo(adv[t] + [0.5, 0.4, 0.3][t], 12);
  });

  test("episode boundaries stop the advantage sweep", () => {
    const rewards = Float64Array.from([1, 1, 1, 1]);
    const values = Float64Array.from([0, 0, 0, 0]);
    const joined = gaeAdvantages(rewards, values, Uint8Array.from([0, 1, 0, 1]), 0.9, 0.8);
    const alone = gaeAdvantages(
      Float64Array.from([1, 1]),
      Float64Array.from([0, 0]),
      Uint8Array.from([0, 1]),
      0.9,
      0.8,
    );
    expect(joined.adv[0]).toBeCloseTo(alone.adv[0], 12);
    expect(joined.adv[2]).toBeCloseTo(alone.adv[0], 12);
  });
});

describe("obs normalizer", () => {
  test("centers and scales, then freezes", () => {
    const norm = new ObsNormalizer(2);
    norm.fit([
      [1, 10],
      [3, 10],
    ]);
    const out = norm.apply([3, 10]);
    expect(out[0]).toBeCloseTo(1, 12);
    expect(out[1]).toBeCloseTo(0, 6); // zero-variance feature hits the std floor
    const frozenMean = norm.mean[0];
    norm.fit([
      [100, 100],
      [200, 200],
    ]);
    expect(norm.mean[0]).toBe(frozenMean);
  });
});

describe("gaussian policy", () => {
  test("log density matches the closed form", () => {
    const net = new Mlp([1, 2]);
    net.weights[0].fill(0);
    net.biases[0].set([0.5, -1]);
    const policy = new GaussianPolicy(net, Float64Array.from([Math.log(0.3), Math.log(2)]));
    const action = [0.9, -1.4];
    const mu = [0.5, -1];
    const sigma = [0.3, 2];
    let expected = 0;
    for (let i = 0; i < 2; i++) {
      const z = (action[i] - mu[i]) / sigma[i];
      expected += -0.5 * z * z - Math.log(sigma[i]) - 0.5 * Math.log(2 * Math.PI);
    }
    expect(policy.logpOf(policy.mean.forward([0]), action)).toBeCloseTo(expected, 12);
  });

  test("sampling spreads around the mean", () => {
    const net = new Mlp([1, 1]);
    net.weights[0].fill(0);
    net.biases[0].set([0.25]);
    const policy = new GaussianPolicy(net, Float64Array.from([Math.log(0.5)]));
    const rng = splitmix32(1);
    const gauss = () => 2 * rng() - 1; // bounded stand-in, fine for moments here
    const draws = Array.from({ length: 2000 }, () => policy.sample(Float64Array.from([0]), gauss).action[0]);
    expect(Math.abs(mean(draws) - 0.25)).toBeLessThan(0.05);
  });
});

describe("ppo on a toy environment", () => {
  test("learning improves the mean episode reward", async () => {
    const env = new ToyEnv();
    const agent = PpoAgent.fresh(4, 2, 123, [16, 16]);
    const result = await trainPpo(env, agent, {
      scenario: {},
      totalSteps: 9000,
      seed: 123,
      hyper: { rolloutSteps: 600, epochs: 8, minibatch: 64 },
    });
    const rows = result.rows.map((r) => r.meanReward);
    const k = Math.floor(rows.length / 10);
    const first = mean(rows.slice(0, k));
    const last = mean(rows.slice(-k));
    expect(last).toBeGreaterThan(first);
    expect(last).toBeGreaterThan(0.5); // perfect play scores 1 per step
    // deterministic play should now be close to the slot targets
    const report = await evaluatePolicy(env, agent, 20, 5, true);
    expect(report.meanEpisodeReward).toBeGreaterThan(3 * 0.5);
  }, 120_000);

  test("a seeded run reproduces its reward curve exactly", async () => {
    const run = async () => {
      const agent = PpoAgent.fresh(4, 2, 9, [8, 8]);
      return trainPpo(new ToyEnv(), agent, {
        scenario: {},
        totalSteps: 1200,
        seed: 9,
        hyper: { rolloutSteps: 300, epochs: 4 },
      });
    };
    const a = await run();
    const b = await run();
    expect(a.rows).toEqual(b.rows);
  });
});

describe("agent artifact", () => {
  test("serialization round-trips and acting stays identical", () => {
    const agent = PpoAgent.fresh(4, 2, 21, [8, 8]);
    agent.norm.fit([
      [0, 1, 2, 3],
      [1, 2, 3, 4],
      [2, 0, 1, 5],
    ]);
    const back = agentFromJSON(JSON.parse(JSON.stringify(agentToJSON(agent))));
    const obs = [0.3, 1.4, 2.5, 3.1];
    expect(Array.from(back.act(obs))).toEqual(Array.from(agent.act(obs)));
    expect(back.norm.fitted).toBe(true);
  });

  test("rejects artifacts of another kind", () => {
    expect(() => agentFromJSON({ kind: "forest" } as never)).toThrow(/not a policy artifact/);
  });
});
