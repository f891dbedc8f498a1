import { describe, expect, test } from "vitest";
import { Adam, clipGlobalNorm, Mlp, MlpGrads, mlpFromJSON, mlpToJSON } from "../src/mlp.js";
import { splitmix32 } from "../src/rng.js";

// Loss used for gradient checking: L = sum_i c_i * out_i^2 / 2, whose exact
// output gradient is c_i * out_i.
const COEFFS = [1.3, -0.7];

function lossOf(net: Mlp, x: number[]): number {
  const out = net.forward(x);
  let l = 0;
  for (let i = 0; i < out.length; i++) l += (COEFFS[i] * out[i] * out[i]) / 2;
  return l;
}

describe("mlp", () => {
  test("forward matches a hand-computed single layer", () => {
    const net = new Mlp([2, 1]);
    net.weights[0].set([0.5, -0.25]);
    net.biases[0].set([0.1]);
    const out = net.forward([2, 4]);
    expect(out[0]).toBeCloseTo(0.5 * 2 - 0.25 * 4 + 0.1, 12);
  });

  test("backprop agrees with central finite differences", () => {
    const net = new Mlp([3, 5, 2], { rng: splitmix32(3) });
    const x = [0.4, -1.2, 0.9];

    const acts = net.forwardCached(x);
    const out = acts[acts.length - 1];
    const dOut = out.map((v, i) => COEFFS[i] * v);
    const grads = new MlpGrads(net);
    net.backward(acts, dOut, grads);

    const h = 1e-6;
    const params = net.params();
    const analytic = grads.list();
    let checked = 0;
    for (let k = 0; k < params.length; k++) {
      for (let i = 0; i < params[k].length; i++) {
        const keep = params[k][i];
        params[k][i] = keep + h;
        const up = lossOf(net, x);
        params[k][i] = keep - h;
        const down = lossOf(net, x);
        params[k][i] = keep;
        const numeric = (up - down) / (2 * h);
        expect(Math.abs(analytic[k][i] - numeric)).toBeLessThan(1e-5 * Math.max(1, Math.abs(numeric)));
        checked += 1;
      }
    }
    expect(checked).toBe(3 * 5 + 5 + 5 * 2 + 2);
  });

  test("gradients accumulate across samples", () => {
    const net = new Mlp([2, 2], { rng: splitmix32(8) });
    const g1 = new MlpGrads(net);
    const acts = net.forwardCached([1, 2]);
    net.backward(acts, [1, 0], g1);
    net.backward(acts, [1, 0], g1);
    const g2 = new MlpGrads(net);
    net.backward(acts, [2, 0], g2);
    for (let i = 0; i < g1.w[0].length; i++) expect(g1.w[0][i]).toBeCloseTo(g2.w[0][i], 12);
  });

  test("adam descends a simple quadratic", () => {
    const p = Float64Array.from([5]);
    const opt = new Adam([p], 0.1);
    for (let i = 0; i < 500; i++) opt.step([Float64Array.from([2 * p[0]])]);
    expect(Math.abs(p[0])).toBeLessThan(0.05);
  });

  test("global norm clip rescales only when over the cap", () => {
    const g = [Float64Array.from([3, 4])];
    expect(clipGlobalNorm(g, 10)).toBeCloseTo(5, 12);
    expect(Array.from(g[0])).toEqual([3, 4]);
    expect(clipGlobalNorm(g, 1)).toBeCloseTo(5, 12);
    expect(Math.hypot(g[0][0], g[0][1])).toBeCloseTo(1, 12);
  });

  test("serialization round-trips weights exactly", () => {
    const net = new Mlp([4, 3, 2], { rng: splitmix32(77) });
    const back = mlpFromJSON(JSON.parse(JSON.stringify(mlpToJSON(net))));
    expect(back.sizes).toEqual(net.sizes);
    for (let l = 0; l < net.layerCount; l++) {
      expect(Array.from(back.weights[l])).toEqual(Array.from(net.weights[l]));
      expect(Array.from(back.biases[l])).toEqual(Array.from(net.biases[l]));
    }
  });
});
