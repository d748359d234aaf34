/**
 * Supervised fitting of the message-passing heuristics.
 *
 * One gradient step per formula: the instance's full labeled assignment list
 * forms the ranking list (or the classification target), the unrolled
 * embedding plus head runs under the tape, and Adam applies the update.
 */
import { Rng } from './rng.js';
import { Adam } from './adam.js';
import { Head, initParams, paramsToBundle, toBytes } from './bundle.js';
import {
  Tensor, add, backward, bceWithLogit, pairwiseLogistic, softmaxRowCE,
  startTape, stopTape,
} from './tensor.js';
import type { ParamMap } from './nn.js';
import { loadFormula, loadLabels, loadManifest, splitIds, Labels } from './data.js';
import { Encoded, bitsMatrix, encode } from './qdimacs.js';
import {
  headScores, headVoteLogit, headWitnessLogits, runEmbedding,
} from './model.js';
import { lambdaPairs, ndcgAt } from './loss.js';

export type Task = 'vote' | 'witness' | 'rank_cand' | 'rank_counter' | 'rank_both';

export interface TrainConfig {
  architecture: number;
  d: number;
  /** Unrolled message passing rounds; 8, 16 or 32. */
  iterations: number;
  lr: number;
  epochs: number;
  seed: number;
  task: Task;
  /** Width of the score head bottleneck, default d. */
  scoreDim?: number;
  /** Candidate relevance column, default hardness (the GNN3 pairing). */
  candSignal?: 'hardness' | 'maxsat';
  /** Counterexample relevance column, default maxsat (the GNN3 pairing). */
  counterSignal?: 'core' | 'maxsat';
  /** Training splits override; defaults depend on the task. */
  splits?: string[];
  /** Train on exactly these instance ids instead of whole splits. */
  ids?: string[];
  /** Stop once the train metric reaches this value. */
  targetMetric?: number;
}

export interface MetricsRow {
  epoch: number;
  loss: number;
  trainMetric: number;
  testMetric: number | null;
}

export interface TrainResult {
  params: ParamMap;
  bundle: Buffer;
  metrics: MetricsRow[];
}

const TASKS: Task[] = ['vote', 'witness', 'rank_cand', 'rank_counter', 'rank_both'];

export function headsForTask(task: Task): Head[] {
  switch (task) {
    case 'vote': return ['vote'];
    case 'witness': return ['witness'];
    case 'rank_cand': return ['score_forall'];
    case 'rank_counter': return ['score_exists'];
    case 'rank_both': return ['score_forall', 'score_exists'];
  }
}

interface Item {
  id: string;
  enc: Encoded;
  y: number;
  witnessTargets: number[] | null;
  candBits: Tensor | null;
  candRels: number[] | null;
  counterBits: Tensor | null;
  counterRels: number[] | null;
}

function witnessTargets(labels: Labels, id: string): number[] {
  for (const [bits, hardness] of labels.candidates) {
    if (hardness === 10) return [...bits].map((ch) => (ch === '1' ? 1 : 0));
  }
  throw new Error(`instance ${id}: unsat label but no witness row in candidates`);
}

function buildItem(dir: string, id: string, label: string, cfg: TrainConfig): Item {
  const f = loadFormula(dir, id);
  const enc = encode(f);
  const item: Item = {
    id,
    enc,
    y: label === 'unsat' ? 1 : 0,
    witnessTargets: null,
    candBits: null,
    candRels: null,
    counterBits: null,
    counterRels: null,
  };
  if (cfg.task === 'vote') return item;
  const labels = loadLabels(dir, id);
  if (labels.label !== label) {
    throw new Error(`instance ${id}: labels file says ${labels.label}, manifest ${label}`);
  }
  if (cfg.task === 'witness') {
    item.witnessTargets = witnessTargets(labels, id);
    if (item.witnessTargets.length !== enc.nx) {
      throw new Error(`instance ${id}: witness bits do not match the universal block`);
    }
    return item;
  }
  const candCol = (cfg.candSignal ?? 'hardness') === 'hardness' ? 1 : 2;
  const counterCol = (cfg.counterSignal ?? 'maxsat') === 'core' ? 1 : 2;
  if (cfg.task !== 'rank_counter') {
    item.candBits = bitsMatrix(labels.candidates.map((r) => r[0]), enc.nx);
    item.candRels = labels.candidates.map((r) => r[candCol] as number);
  }
  if (cfg.task !== 'rank_cand') {
    item.counterBits = bitsMatrix(labels.counters.map((r) => r[0]), enc.ny);
    item.counterRels = labels.counters.map((r) => r[counterCol] as number);
  }
  return item;
}

function defaultSplits(task: Task): string[] {
  return task === 'vote' ? ['TrainU', 'TrainS'] : ['TrainU'];
}

function testSplits(task: Task): string[] {
  return task === 'vote' ? ['TestU', 'TestS'] : ['TestU'];
}

interface StepOut {
  loss: Tensor;
  metric: number;
}

function taskStep(cfg: TrainConfig, P: ParamMap, item: Item): StepOut {
  const st = runEmbedding(item.enc, P, cfg.architecture, cfg.iterations);
  if (cfg.task === 'vote') {
    const logit = headVoteLogit(P, st);
    const predictedUnsat = logit.item() > 0 ? 1 : 0;
    return { loss: bceWithLogit(logit, item.y), metric: predictedUnsat === item.y ? 1 : 0 };
  }
  if (cfg.task === 'witness') {
    const logits = headWitnessLogits(P, st);
    const targets = item.witnessTargets!;
    let hit = 0;
    for (let i = 0; i < logits.rows; i++) {
      const guess = logits.data[2 * i + 1] > logits.data[2 * i] ? 1 : 0;
      if (guess === targets[i]) hit += 1;
    }
    return { loss: softmaxRowCE(logits, targets), metric: hit / targets.length };
  }
  let loss: Tensor | null = null;
  let metric = 0;
  let sides = 0;
  if (item.candBits) {
    const scores = headScores(P, 'score_forall', st, item.candBits);
    const vals = Array.from(scores.data);
    const part = pairwiseLogistic(scores, lambdaPairs(vals, item.candRels!));
    loss = part;
    metric += ndcgAt(10, vals, item.candRels!);
    sides += 1;
  }
  if (item.counterBits) {
    const scores = headScores(P, 'score_exists', st, item.counterBits);
    const vals = Array.from(scores.data);
    const part = pairwiseLogistic(scores, lambdaPairs(vals, item.counterRels!));
    loss = loss ? add(loss, part) : part;
    metric += ndcgAt(10, vals, item.counterRels!);
    sides += 1;
  }
  return { loss: loss!, metric: metric / sides };
}

function validate(cfg: TrainConfig): void {
  if (!Number.isInteger(cfg.architecture) || cfg.architecture < 1 || cfg.architecture > 7) {
    throw new Error(`architecture must be 1..7, got ${cfg.architecture}`);
  }
  if (![8, 16, 32].includes(cfg.iterations)) {
    throw new Error(`iterations must be 8, 16 or 32, got ${cfg.iterations}`);
  }
  if (cfg.d < 1) throw new Error('d must be positive');
  if (!(cfg.lr > 0)) throw new Error('learning rate must be positive');
  if (cfg.epochs < 1) throw new Error('epochs must be positive');
  if (!TASKS.includes(cfg.task)) throw new Error(`unknown task ${cfg.task}`);
}

function meanMetric(cfg: TrainConfig, P: ParamMap, items: Item[]): number {
  if (items.length === 0) return NaN;
  let acc = 0;
  for (const item of items) acc += taskStep(cfg, P, item).metric;
  return acc / items.length;
}

export function train(datasetDir: string, cfg: TrainConfig): TrainResult {
  validate(cfg);
  const manifest = loadManifest(datasetDir);
  const rng = new Rng(cfg.seed);

  const items: Item[] = [];
  if (cfg.ids) {
    for (const id of cfg.ids) {
      const meta = manifest.instances[id];
      if (!meta) throw new Error(`unknown instance id ${id}`);
      items.push(buildItem(datasetDir, id, meta.label, cfg));
    }
  } else {
    for (const split of cfg.splits ?? defaultSplits(cfg.task)) {
      for (const id of splitIds(manifest, split)) {
        items.push(buildItem(datasetDir, id, manifest.instances[id].label, cfg));
      }
    }
  }
  if (items.length === 0) throw new Error('no training instances');

  let testItems: Item[] = [];
  if (!cfg.splits && !cfg.ids) {
    try {
      for (const split of testSplits(cfg.task)) {
        for (const id of splitIds(manifest, split)) {
          testItems.push(buildItem(datasetDir, id, manifest.instances[id].label, cfg));
        }
      }
    } catch {
      testItems = [];
    }
  }

  const k = cfg.scoreDim ?? cfg.d;
  const P = initParams(cfg.architecture, cfg.d, k, headsForTask(cfg.task), rng);
  const adam = new Adam(cfg.lr);
  const metrics: MetricsRow[] = [];

  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    const order = [...items];
    rng.shuffle(order);
    let lossAcc = 0;
    let metricAcc = 0;
    for (const item of order) {
      startTape();
      const { loss, metric } = taskStep(cfg, P, item);
      lossAcc += loss.item();
      metricAcc += metric;
      if (loss.needsGrad) backward(loss);
      else stopTape();
      adam.step(P);
    }
    const row: MetricsRow = {
      epoch,
      loss: lossAcc / items.length,
      trainMetric: metricAcc / items.length,
      testMetric: null,
    };
    metrics.push(row);
    const reached = cfg.targetMetric !== undefined && row.trainMetric >= cfg.targetMetric;
    if (reached || epoch === cfg.epochs - 1) {
      if (testItems.length > 0) row.testMetric = meanMetric(cfg, P, testItems);
      if (reached) break;
    }
  }

  return {
    params: P,
    bundle: toBytes(paramsToBundle(cfg.architecture, cfg.d, P)),
    metrics,
  };
}
