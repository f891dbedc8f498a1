// Bagged regression forest with multi-output leaves, grown on variance
// reduction summed across outputs. Pure TypeScript, seeded end to end, so
// a fitted model is a pure function of (data, params, seed).

import { randInt, shuffleInPlace, substream } from "./rng.js";

export type TreeNode =
  | { leaf: true; value: number[] }
  | { leaf: false; feature: number; threshold: number; left: TreeNode; right: TreeNode };

export interface ForestParams {
  nEstimators?: number; // default 40
  maxDepth?: number; // default 16
  minSamplesLeaf?: number; // default 1
  maxFeatures?: number | "sqrt" | "all"; // default all, the regression custom
  bootstrap?: boolean; // default true; off makes deep forests memorize
  seed?: number; // default 0
}

export interface ForestModel {
  kind: "forest";
  nFeatures: number;
  nOutputs: number;
  params: Required<ForestParams>;
  trees: TreeNode[];
}

function resolveParams(p: ForestParams, nFeatures: number): Required<ForestParams> {
  return {
    nEstimators: p.nEstimators ?? 40,
    maxDepth: p.maxDepth ?? 16,
    minSamplesLeaf: p.minSamplesLeaf ?? 1,
    maxFeatures: p.maxFeatures ?? "all",
    bootstrap: p.bootstrap ?? true,
    seed: p.seed ?? 0,
  };
}

function featureBudget(maxFeatures: number | "sqrt" | "all", nFeatures: number): number {
  if (maxFeatures === "all") return nFeatures;
  if (maxFeatures === "sqrt") return Math.max(1, Math.round(Math.sqrt(nFeatures)));
  return Math.min(Math.max(1, Math.round(maxFeatures)), nFeatures);
}

export function fitForest(X: number[][], Y: number[][], params: ForestParams = {}): ForestModel {
  if (X.length === 0 || X.length !== Y.length) throw new Error("X and Y must align and be nonempty");
  const nFeatures = X[0].length;
  const nOutputs = Y[0].length;
  const resolved = resolveParams(params, nFeatures);
  const yRows = Y.map((r) => Float64Array.from(r));
  const trees: TreeNode[] = [];
  for (let t = 0; t < resolved.nEstimators; t++) {
    const rng = substream(resolved.seed, `tree-${t}`);
    let idx: number[];
    if (resolved.bootstrap) {
      idx = Array.from({ length: X.length }, () => randInt(rng, X.length));
    } else {
      idx = Array.from({ length: X.length }, (_, i) => i);
    }
    trees.push(growTree(X, yRows, idx, resolved, nFeatures, nOutputs, rng, 0));
  }
  return { kind: "forest", nFeatures, nOutputs, params: resolved, trees };
}

function leafOf(yRows: Float64Array[], idx: number[], nOutputs: number): TreeNode {
  const value = new Array<number>(nOutputs).fill(0);
  for (const i of idx) {
    const y = yRows[i];
    for (let d = 0; d < nOutputs; d++) value[d] += y[d];
  }
  for (let d = 0; d < nOutputs; d++) value[d] /= idx.length;
  return { leaf: true, value };
}

function growTree(
  X: number[][],
  yRows: Float64Array[],
  idx: number[],
  params: Required<ForestParams>,
  nFeatures: number,
  nOutputs: number,
  rng: () => number,
  depth: number,
): TreeNode {
  const m = idx.length;
  if (depth >= params.maxDepth || m < 2 * params.minSamplesLeaf) {
    return leafOf(yRows, idx, nOutputs);
  }

  // Node totals; SSE of a side is sum(y^2) - sum(y)^2/count, summed over outputs.
  const total = new Float64Array(nOutputs);
  let totalSq = 0;
  for (const i of idx) {
    const y = yRows[i];
    for (let d = 0; d < nOutputs; d++) {
      total[d] += y[d];
      totalSq += y[d] * y[d];
    }
  }
  let parentSse = totalSq;
  for (let d = 0; d < nOutputs; d++) parentSse -= (total[d] * total[d]) / m;
  if (parentSse <= 1e-12) return leafOf(yRows, idx, nOutputs);

  const candidates = shuffleInPlace(
    rng,
    Array.from({ length: nFeatures }, (_, f) => f),
  ).slice(0, featureBudget(params.maxFeatures, nFeatures));

  let bestSse = Infinity;
  let bestFeature = -1;
  let bestThreshold = 0;
  const leftSum = new Float64Array(nOutputs);
  const sorted = idx.slice();

  for (const f of candidates) {
    sorted.sort((a, b) => X[a][f] - X[b][f]);
    leftSum.fill(0);
    for (let k = 1; k < m; k++) {
      const moved = yRows[sorted[k - 1]];
      for (let d = 0; d < nOutputs; d++) leftSum[d] += moved[d];
      if (k < params.minSamplesLeaf || m - k < params.minSamplesLeaf) continue;
      const lo = X[sorted[k - 1]][f];
      const hi = X[sorted[k]][f];
      if (lo >= hi) continue; // ties may not split
      let sse = totalSq; // left sq + right sq == total sq
      for (let d = 0; d < nOutputs; d++) {
        sse -= (leftSum[d] * leftSum[d]) / k;
        const rightSum = total[d] - leftSum[d];
        sse -= (rightSum * rightSum) / (m - k);
      }
      if (sse < bestSse) {
        bestSse = sse;
        bestFeature = f;
        bestThreshold = (lo + hi) / 2;
      }
    }
  }

  if (bestFeature < 0 || bestSse >= parentSse) return leafOf(yRows, idx, nOutputs);

  const leftIdx: number[] = [];
  const rightIdx: number[] = [];
  for (const i of idx) {
    (X[i][bestFeature] <= bestThreshold ? leftIdx : rightIdx).push(i);
  }
  return {
    leaf: false,
    feature: bestFeature,
    threshold: bestThreshold,
    left: growTree(X, yRows, leftIdx, params, nFeatures, nOutputs, rng, depth + 1),
    right: growTree(X, yRows, rightIdx, params, nFeatures, nOutputs, rng, depth + 1),
  };
}

export function predictForest(model: ForestModel, x: ArrayLike<number>): Float64Array {
  const out = new Float64Array(model.nOutputs);
  for (const tree of model.trees) {
    let node = tree;
    while (!node.leaf) {
      node = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    for (let d = 0; d < model.nOutputs; d++) out[d] += node.value[d];
  }
  for (let d = 0; d < model.nOutputs; d++) out[d] /= model.trees.length;
  return out;
}

export function forestToJSON(model: ForestModel): string {
  return JSON.stringify(model);
}

export function forestFromJSON(text: string): ForestModel {
  const model = JSON.parse(text) as ForestModel;
  if (model.kind !== "forest") throw new Error(`not a forest artifact: kind=${model.kind}`);
  return model;
}
