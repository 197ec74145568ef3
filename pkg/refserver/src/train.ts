/**
 * Toy trainer: fit the tiny MLP to a labeled CSV with full-batch gradient
 * descent.  Deterministic for a fixed seed; meant for small, separable sets.
 */

import { MlpWeights, forward, initMlp, makeRng } from "./mlp";

export interface TrainingSet {
  features: number[][];
  labels: number[];
}

export function parseCsv(text: string): TrainingSet {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty training CSV");
  }
  let start = 0;
  if (lines[0].split(",").some((cell) => Number.isNaN(Number(cell)))) {
    start = 1; // header row
  }
  const features: number[][] = [];
  const labels: number[] = [];
  let width = -1;
  for (let i = start; i < lines.length; i++) {
    const cells = lines[i].split(",").map(Number);
    if (cells.some((v) => Number.isNaN(v))) {
      throw new Error(`row ${i + 1}: non-numeric value`);
    }
    if (width === -1) {
      width = cells.length;
      if (width < 2) {
        throw new Error("rows need at least one feature and a label");
      }
    } else if (cells.length !== width) {
      throw new Error(`row ${i + 1}: expected ${width} fields, got ${cells.length}`);
    }
    const label = cells[cells.length - 1];
    if (label !== 0 && label !== 1) {
      throw new Error(`row ${i + 1}: label must be 0 or 1`);
    }
    features.push(cells.slice(0, -1));
    labels.push(label);
  }
  if (features.length === 0) {
    throw new Error("empty training CSV");
  }
  return { features, labels };
}

export function accuracy(mlp: MlpWeights, set: TrainingSet): number {
  let hits = 0;
  for (let i = 0; i < set.features.length; i++) {
    const pred = forward(mlp, set.features[i]) >= 0.5 ? 1 : 0;
    if (pred === set.labels[i]) {
      hits++;
    }
  }
  return hits / set.features.length;
}

export function trainToy(
  set: TrainingSet,
  seed: number,
  hiddenSize = 8,
  learningRate = 0.5,
  epochs = 400,
): MlpWeights {
  const rng = makeRng(seed);
  const mlp = initMlp(set.features[0].length, hiddenSize, rng);
  const m = set.features.length;
  for (let epoch = 0; epoch < epochs; epoch++) {
    const gw1 = mlp.w1.map((row) => row.map(() => 0));
    const gb1 = mlp.b1.map(() => 0);
    const gw2 = mlp.w2.map(() => 0);
    let gb2 = 0;
    for (let s = 0; s < m; s++) {
      const x = set.features[s];
      const hidden = mlp.w1.map((row, h) => {
        let z = mlp.b1[h];
        for (let i = 0; i < x.length; i++) {
          z += row[i] * x[i];
        }
        return Math.tanh(z);
      });
      let out = mlp.b2;
      for (let h = 0; h < mlp.hiddenSize; h++) {
        out += mlp.w2[h] * hidden[h];
      }
      const p = 1 / (1 + Math.exp(-out));
      const delta = p - set.labels[s]; // d(cross-entropy)/d(logit)
      gb2 += delta;
      for (let h = 0; h < mlp.hiddenSize; h++) {
        gw2[h] += delta * hidden[h];
        const dh = delta * mlp.w2[h] * (1 - hidden[h] * hidden[h]);
        gb1[h] += dh;
        for (let i = 0; i < x.length; i++) {
          gw1[h][i] += dh * x[i];
        }
      }
    }
    const step = learningRate / m;
    mlp.b2 -= step * gb2;
    for (let h = 0; h < mlp.hiddenSize; h++) {
      mlp.w2[h] -= step * gw2[h];
      mlp.b1[h] -= step * gb1[h];
      for (let i = 0; i < mlp.w1[h].length; i++) {
        mlp.w1[h][i] -= step * gw1[h][i];
      }
    }
    if (epoch % 20 === 19 && accuracy(mlp, set) >= 0.98) {
      break;
    }
  }
  return mlp;
}

export function weightsToJson(mlp: MlpWeights): string {
  return JSON.stringify(mlp);
}
