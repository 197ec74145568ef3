/**
 * Rule classifier: a base label flipped inside planted axis-aligned boxes.
 *
 * Semantics mirror the toolkit's in-process synthetic classifier exactly:
 * boxes are half-open (lo <= x < hi per coordinate) and the advisory score
 * is shaped from the distance to the nearest box surface (0.5 on the
 * surface, 1 at distance >= the score width).
 */

export interface BoxSpec {
  lo: number[];
  hi: number[];
}

export interface RuleModel {
  baseLabel: 0 | 1;
  boxes: BoxSpec[];
  scoreWidth: number;
}

export interface Verdict {
  label: 0 | 1;
  score: number;
}

export function makeRuleModel(baseLabel: number, boxes: BoxSpec[], scoreWidth = 0.1): RuleModel {
  if (baseLabel !== 0 && baseLabel !== 1) {
    throw new Error(`base label must be 0 or 1, got ${baseLabel}`);
  }
  for (const box of boxes) {
    if (box.lo.length !== box.hi.length) {
      throw new Error("box lo/hi must have equal length");
    }
    for (let i = 0; i < box.lo.length; i++) {
      if (box.lo[i] > box.hi[i]) {
        throw new Error("box lo must be <= hi per coordinate");
      }
    }
  }
  return { baseLabel: baseLabel as 0 | 1, boxes, scoreWidth };
}

function contains(box: BoxSpec, x: number[]): boolean {
  for (let i = 0; i < x.length; i++) {
    if (!(box.lo[i] <= x[i] && x[i] < box.hi[i])) {
      return false;
    }
  }
  return true;
}

function boundaryDistance(box: BoxSpec, x: number[]): number {
  if (contains(box, x)) {
    let d = Infinity;
    for (let i = 0; i < x.length; i++) {
      d = Math.min(d, x[i] - box.lo[i], box.hi[i] - x[i]);
    }
    return d;
  }
  let sq = 0;
  for (let i = 0; i < x.length; i++) {
    const deficit = Math.max(box.lo[i] - x[i], x[i] - box.hi[i], 0);
    sq += deficit * deficit;
  }
  return Math.sqrt(sq);
}

export function classifyRule(model: RuleModel, x: number[]): Verdict {
  for (const box of model.boxes) {
    if (box.lo.length !== x.length) {
      throw new Error(`feature vector has arity ${x.length}, expected ${box.lo.length}`);
    }
  }
  const flipped = model.boxes.some((box) => contains(box, x));
  const label = (flipped ? 1 - model.baseLabel : model.baseLabel) as 0 | 1;
  let score = 1.0;
  if (model.boxes.length > 0) {
    const d = Math.min(...model.boxes.map((box) => boundaryDistance(box, x)));
    score = 1.0 - 0.5 * Math.max(0, 1 - d / model.scoreWidth);
  }
  return { label, score: Math.min(Math.max(score, 0.5), 1.0) };
}
