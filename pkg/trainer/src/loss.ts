/**
 * LambdaRank weighting for pairwise logistic ranking loss.
 *
 * Pair weight = |delta NDCG| of swapping the two items in the current
 * predicted order: (gain_hi - gain_lo) * |1/log2(1+pos_hi) - 1/log2(1+pos_lo)|
 * / IDCG, with gain(r) = 2^r - 1 and 1-based positions. Ties in predicted
 * score break by index so runs are deterministic.
 */
import type { RankPair } from './tensor.js';

function gain(rel: number): number {
  return Math.pow(2, rel) - 1;
}

function discount(pos: number): number {
  return 1 / Math.log2(1 + pos);
}

/** Descending-score order, stable in the original index. */
function rankPositions(scores: number[]): number[] {
  const order = scores.map((_, i) => i);
  order.sort((a, b) => scores[b] - scores[a] || a - b);
  const pos = new Array<number>(scores.length);
  order.forEach((idx, at) => {
    pos[idx] = at + 1;
  });
  return pos;
}

function idealDcg(rels: number[]): number {
  const sorted = [...rels].sort((a, b) => b - a);
  let acc = 0;
  sorted.forEach((r, at) => {
    acc += gain(r) * discount(at + 1);
  });
  return acc;
}

/** One pair per (i, j) with rel_i > rel_j; empty when all relevances tie. */
export function lambdaPairs(scores: number[], rels: number[]): RankPair[] {
  if (scores.length !== rels.length) throw new Error('scores/relevance mismatch');
  const idcg = idealDcg(rels);
  if (idcg === 0) return [];
  const pos = rankPositions(scores);
  const pairs: RankPair[] = [];
  for (let i = 0; i < rels.length; i++) {
    for (let j = 0; j < rels.length; j++) {
      if (rels[i] > rels[j]) {
        const w = (gain(rels[i]) - gain(rels[j]))
          * Math.abs(discount(pos[i]) - discount(pos[j])) / idcg;
        if (w > 0) pairs.push({ hi: i, lo: j, w });
      }
    }
  }
  return pairs;
}

/** NDCG of the predicted order, truncated at k. Returns 1 when IDCG@k is 0. */
export function ndcgAt(k: number, scores: number[], rels: number[]): number {
  if (scores.length !== rels.length) throw new Error('scores/relevance mismatch');
  const order = scores.map((_, i) => i);
  order.sort((a, b) => scores[b] - scores[a] || a - b);
  let dcg = 0;
  order.slice(0, k).forEach((idx, at) => {
    dcg += gain(rels[idx]) * discount(at + 1);
  });
  const sorted = [...rels].sort((a, b) => b - a);
  let idcg = 0;
  sorted.slice(0, k).forEach((r, at) => {
    idcg += gain(r) * discount(at + 1);
  });
  return idcg === 0 ? 1 : dcg / idcg;
}
