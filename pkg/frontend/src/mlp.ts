// Small dense network with tanh hidden layers and a linear head, plus Adam.
// Written against Float64Array throughout; no ML runtime underneath, which
// keeps runs bit-reproducible from the seed on any host.

import { type Rng } from "./rng.js";

export class Mlp {
  readonly sizes: number[];
  readonly weights: Float64Array[]; // layer l: (sizes[l+1] x sizes[l]), row-major
  readonly biases: Float64Array[];

  constructor(sizes: number[], opts: { rng?: Rng; outScale?: number } = {}) {
    if (sizes.length < 2) throw new Error("need at least input and output sizes");
    this.sizes = sizes.slice();
    this.weights = [];
    this.biases = [];
    const rng = opts.rng ?? (() => 0.5);
    const outScale = opts.outScale ?? 1.0;
    for (let l = 0; l < sizes.length - 1; l++) {
      const fanIn = sizes[l];
      const fanOut = sizes[l + 1];
      const limit = Math.sqrt(6 / (fanIn + fanOut));
      const scale = l === sizes.length - 2 ? outScale : 1.0;
      const w = new Float64Array(fanOut * fanIn);
      for (let i = 0; i < w.length; i++) w[i] = scale * limit * (2 * rng() - 1);
      this.weights.push(w);
      this.biases.push(new Float64Array(fanOut));
    }
  }

  get layerCount(): number {
    return this.sizes.length - 1;
  }

  forward(x: ArrayLike<number>): Float64Array {
    return this.forwardCached(x)[this.layerCount];
  }

  /**
   * Forward pass keeping every activation: index 0 is the input, the last
   * entry the linear output, everything between the post-tanh hidden layers.
   */
  forwardCached(x: ArrayLike<number>): Float64Array[] {
    const acts: Float64Array[] = [Float64Array.from(x as ArrayLike<number>)];
    if (acts[0].length !== this.sizes[0]) {
      throw new Error(`input has ${acts[0].length} features, expected ${this.sizes[0]}`);
    }
    for (let l = 0; l < this.layerCount; l++) {
      const input = acts[l];
      const fanIn = this.sizes[l];
      const fanOut = this.sizes[l + 1];
      const w = this.weights[l];
      const b = this.biases[l];
      const out = new Float64Array(fanOut);
      const hidden = l < this.layerCount - 1;
      for (let i = 0; i < fanOut; i++) {
        let z = b[i];
        const row = i * fanIn;
        for (let j = 0; j < fanIn; j++) z += w[row + j] * input[j];
        out[i] = hidden ? Math.tanh(z) : z;
      }
      acts.push(out);
    }
    return acts;
  }

  /**
   * Backprop one sample: given the activations from forwardCached and the
   * loss gradient at the output, accumulate parameter gradients in place.
   */
  backward(acts: Float64Array[], dOut: ArrayLike<number>, grads: MlpGrads): void {
    let delta = Float64Array.from(dOut as ArrayLike<number>);
    for (let l = this.layerCount - 1; l >= 0; l--) {
      const input = acts[l];
      const fanIn = this.sizes[l];
      const fanOut = this.sizes[l + 1];
      const w = this.weights[l];
      const gw = grads.w[l];
      const gb = grads.b[l];
      for (let i = 0; i < fanOut; i++) {
        const d = delta[i];
        gb[i] += d;
        const row = i * fanIn;
        for (let j = 0; j < fanIn; j++) gw[row + j] += d * input[j];
      }
      if (l === 0) break;
      const prev = new Float64Array(fanIn);
      for (let i = 0; i < fanOut; i++) {
        const d = delta[i];
        const row = i * fanIn;
        for (let j = 0; j < fanIn; j++) prev[j] += w[row + j] * d;
      }
      // input here is the post-tanh activation of layer l-1
      for (let j = 0; j < fanIn; j++) prev[j] *= 1 - input[j] * input[j];
      delta = prev;
    }
  }

  /** Parameters as one flat list (weights then biases, layer by layer). */
  params(): Float64Array[] {
    return [...this.weights, ...this.biases];
  }
}

export class MlpGrads {
  readonly w: Float64Array[];
  readonly b: Float64Array[];

  constructor(net: Mlp) {
    this.w = net.weights.map((a) => new Float64Array(a.length));
    this.b = net.biases.map((a) => new Float64Array(a.length));
  }

  list(): Float64Array[] {
    return [...this.w, ...this.b];
  }

  zero(): void {
    for (const g of this.list()) g.fill(0);
  }

  scale(s: number): void {
    for (const g of this.list()) for (let i = 0; i < g.length; i++) g[i] *= s;
  }
}

/** Scale gradients down to a global L2 norm cap; returns the pre-clip norm. */
export function clipGlobalNorm(grads: Float64Array[], maxNorm: number): number {
  let sq = 0;
  for (const g of grads) for (let i = 0; i < g.length; i++) sq += g[i] * g[i];
  const norm = Math.sqrt(sq);
  if (norm > maxNorm && norm > 0) {
    const s = maxNorm / norm;
    for (const g of grads) for (let i = 0; i < g.length; i++) g[i] *= s;
  }
  return norm;
}

export class Adam {
  lr: number;
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private t = 0;

  constructor(
    private readonly params: Float64Array[],
    lr: number,
    private readonly beta1 = 0.9,
    private readonly beta2 = 0.999,
    private readonly eps = 1e-8,
  ) {
    this.lr = lr;
    this.m = params.map((p) => new Float64Array(p.length));
    this.v = params.map((p) => new Float64Array(p.length));
  }

  /** One descent step; grads must line up with the params list. */
  step(grads: Float64Array[]): void {
    if (grads.length !== this.params.length) throw new Error("grads/params mismatch");
    this.t += 1;
    const c1 = 1 - Math.pow(this.beta1, this.t);
    const c2 = 1 - Math.pow(this.beta2, this.t);
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k];
      const g = grads[k];
      const m = this.m[k];
      const v = this.v[k];
      for (let i = 0; i < p.length; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i];
        p[i] -= (this.lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      }
    }
  }
}

export interface MlpJSON {
  sizes: number[];
  weights: number[][];
  biases: number[][];
}

export function mlpToJSON(net: Mlp): MlpJSON {
  return {
    sizes: net.sizes.slice(),
    weights: net.weights.map((w) => Array.from(w)),
    biases: net.biases.map((b) => Array.from(b)),
  };
}

export function mlpFromJSON(obj: MlpJSON): Mlp {
  const net = new Mlp(obj.sizes);
  for (let l = 0; l < net.layerCount; l++) {
    net.weights[l].set(obj.weights[l]);
    net.biases[l].set(obj.biases[l]);
  }
  return net;
}
