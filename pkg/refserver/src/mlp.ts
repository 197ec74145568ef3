/** Tiny feed-forward classifier: one tanh hidden layer, sigmoid output. */

import { Verdict } from "./rule";

export interface MlpWeights {
  inputSize: number;
  hiddenSize: number;
  w1: number[][]; // hidden x input
  b1: number[];
  w2: number[]; // hidden
  b2: number;
}

/** Deterministic 32-bit PRNG (mulberry32). */
export function makeRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function initMlp(inputSize: number, hiddenSize: number, rng: () => number): MlpWeights {
  const scale = 1.0 / Math.sqrt(inputSize);
  const w1 = Array.from({ length: hiddenSize }, () =>
    Array.from({ length: inputSize }, () => (rng() * 2 - 1) * scale),
  );
  const b1 = Array.from({ length: hiddenSize }, () => 0);
  const w2 = Array.from({ length: hiddenSize }, () => (rng() * 2 - 1) / Math.sqrt(hiddenSize));
  return { inputSize, hiddenSize, w1, b1, w2, b2: 0 };
}

export function forward(mlp: MlpWeights, x: number[]): number {
  if (x.length !== mlp.inputSize) {
    throw new Error(`feature vector has arity ${x.length}, expected ${mlp.inputSize}`);
  }
  let out = mlp.b2;
  for (let h = 0; h < mlp.hiddenSize; h++) {
    let z = mlp.b1[h];
    for (let i = 0; i < mlp.inputSize; i++) {
      z += mlp.w1[h][i] * x[i];
    }
    out += mlp.w2[h] * Math.tanh(z);
  }
  return 1 / (1 + Math.exp(-out));
}

export function classifyMlp(mlp: MlpWeights, x: number[]): Verdict {
  const p = forward(mlp, x);
  const label = p >= 0.5 ? 1 : 0;
  return { label, score: label === 1 ? p : 1 - p };
}

export function loadWeights(json: string): MlpWeights {
  const obj = JSON.parse(json) as MlpWeights;
  if (
    typeof obj.inputSize !== "number" ||
    typeof obj.hiddenSize !== "number" ||
    !Array.isArray(obj.w1) ||
    !Array.isArray(obj.w2)
  ) {
    throw new Error("malformed weights file");
  }
  return obj;
}
