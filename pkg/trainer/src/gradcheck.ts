/**
 * Central-difference validation of the analytic gradients through the full
 * unrolled computation (embedding plus one head loss). Everything runs in
 * float64, so agreement is limited only by finite-difference truncation.
 */
import { Rng } from './rng.js';
import { initParams } from './bundle.js';
import type { ParamMap } from './nn.js';
import {
  Tensor, add, backward, bceWithLogit, meanAll, pairwiseLogistic,
  softmaxRowCE, startTape,
} from './tensor.js';
import { Encoded, bitsMatrix, encode, parseQdimacs } from './qdimacs.js';
import {
  headScores, headVoteLogit, headWitnessLogits, runEmbedding,
} from './model.js';
import { lambdaPairs } from './loss.js';

export type CheckHead = 'vote' | 'witness' | 'score_forall' | 'score_exists' | 'embedding';

export interface GradCheckConfig {
  architecture: number;
  d: number;
  iterations: number;
  head: CheckHead;
  seed: number;
}

export interface GradCheckResult {
  maxRelErr: number;
  checked: number;
}

// forall x exists y . (x or not y) and (not x or y)
const TINY = 'p cnf 2 2\na 1 0\ne 2 0\n1 -2 0\n-1 2 0\n';

function lossFor(cfg: GradCheckConfig, P: ParamMap, enc: Encoded): Tensor {
  const st = runEmbedding(enc, P, cfg.architecture, cfg.iterations);
  switch (cfg.head) {
    case 'vote':
      return bceWithLogit(headVoteLogit(P, st), 1);
    case 'witness':
      return softmaxRowCE(headWitnessLogits(P, st), [1]);
    case 'score_forall': {
      const bits = bitsMatrix(['1', '0'], enc.nx);
      const scores = headScores(P, 'score_forall', st, bits);
      return pairwiseLogistic(scores, lambdaPairs(Array.from(scores.data), [3, 1]));
    }
    case 'score_exists': {
      const bits = bitsMatrix(['1', '0'], enc.ny);
      const scores = headScores(P, 'score_exists', st, bits);
      return pairwiseLogistic(scores, lambdaPairs(Array.from(scores.data), [1, 3]));
    }
    case 'embedding': {
      let acc = add(meanAll(st.forall), meanAll(st.exists));
      for (const emb of st.clauses.values()) acc = add(acc, meanAll(emb));
      return acc;
    }
  }
}

/**
 * Compare analytic gradients against central finite differences over every
 * parameter entry. Relative error uses max(|analytic|, |numeric|) as the
 * denominator with a 1e-6 floor; entries where both sides are below 1e-8
 * count as exact.
 */
export function gradCheck(cfg: GradCheckConfig): GradCheckResult {
  const rng = new Rng(cfg.seed);
  const heads = cfg.head === 'embedding' ? [] : [cfg.head];
  const P = initParams(cfg.architecture, cfg.d, cfg.d, heads, rng);
  const enc = encode(parseQdimacs(TINY));

  startTape();
  backward(lossFor(cfg, P, enc));
  const analytic = new Map<string, Float64Array>();
  for (const [name, p] of P) {
    analytic.set(name, p.grad ? Float64Array.from(p.grad) : new Float64Array(p.size));
    p.grad = null;
  }

  let maxRelErr = 0;
  let checked = 0;
  for (const [name, p] of P) {
    const ga = analytic.get(name)!;
    for (let i = 0; i < p.size; i++) {
      const orig = p.data[i];
      const h = 1e-5 * Math.max(1, Math.abs(orig));
      p.data[i] = orig + h;
      const up = lossFor(cfg, P, enc).item();
      p.data[i] = orig - h;
      const down = lossFor(cfg, P, enc).item();
      p.data[i] = orig;
      const numeric = (up - down) / (2 * h);
      const a = ga[i];
      checked += 1;
      if (Math.max(Math.abs(a), Math.abs(numeric)) < 1e-8) continue;
      const rel = Math.abs(a - numeric) / Math.max(Math.abs(a), Math.abs(numeric), 1e-6);
      if (rel > maxRelErr) maxRelErr = rel;
    }
  }
  return { maxRelErr, checked };
}
