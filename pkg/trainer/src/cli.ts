/** Command line front end: train bundles (optionally the repeated-seed
 * protocol) and run gradient checks. */
import * as fs from 'node:fs';
import * as path from 'node:path';
import { Task, TrainConfig, train } from './train.js';
import { CheckHead, gradCheck } from './gradcheck.js';

interface Flags {
  [key: string]: string;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith('--')) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    const val = argv[i + 1];
    if (val === undefined || val.startsWith('--')) throw new Error(`flag ${arg} needs a value`);
    flags[key] = val;
    i++;
  }
  return flags;
}

function intFlag(flags: Flags, name: string, dflt?: number): number {
  const raw = flags[name];
  if (raw === undefined) {
    if (dflt === undefined) throw new Error(`missing --${name}`);
    return dflt;
  }
  const v = Number(raw);
  if (!Number.isInteger(v)) throw new Error(`--${name} must be an integer`);
  return v;
}

function numFlag(flags: Flags, name: string, dflt: number): number {
  const raw = flags[name];
  if (raw === undefined) return dflt;
  const v = Number(raw);
  if (!Number.isFinite(v)) throw new Error(`--${name} must be a number`);
  return v;
}

function seededPath(out: string, seed: number, multi: boolean): string {
  if (!multi) return out;
  const ext = path.extname(out);
  return path.join(path.dirname(out), `${path.basename(out, ext)}.s${seed}${ext}`);
}

function csvHeader(cfg: TrainConfig): string {
  return [
    '# loss: ranking tasks use pairwise logistic with LambdaRank NDCG weights',
    '#   (gain 2^rel-1, discount 1/log2(1+pos), normalized by total pair weight,',
    '#   sigma 1, one list per formula per step); vote/witness use cross-entropy',
    `# optimizer: adam lr=${cfg.lr} beta1=0.9 beta2=0.999 eps=1e-8, one step per formula`,
    `# metric: vote=accuracy witness=per-variable accuracy rank=mean NDCG@10`,
    'epoch,seed,loss,train_metric,test_metric',
  ].join('\n');
}

function cmdTrain(argv: string[]): number {
  const flags = parseFlags(argv);
  const data = flags['data'];
  if (!data) throw new Error('missing --data');
  const out = flags['out'] ?? 'bundle.qgnn';
  const seeds = flags['seeds']
    ? flags['seeds'].split(',').map((s) => {
      const v = Number(s);
      if (!Number.isInteger(v)) throw new Error('--seeds must be integers');
      return v;
    })
    : [intFlag(flags, 'seed', 0)];
  const base: Omit<TrainConfig, 'seed'> = {
    architecture: intFlag(flags, 'arch', 5),
    d: intFlag(flags, 'd', 16),
    iterations: intFlag(flags, 'iters', 16),
    lr: numFlag(flags, 'lr', 0.002),
    epochs: intFlag(flags, 'epochs', 30),
    task: (flags['task'] ?? 'rank_cand') as Task,
    scoreDim: flags['score-dim'] ? intFlag(flags, 'score-dim') : undefined,
    candSignal: flags['cand-signal'] as TrainConfig['candSignal'],
    counterSignal: flags['counter-signal'] as TrainConfig['counterSignal'],
    splits: flags['splits'] ? flags['splits'].split(',') : undefined,
    ids: flags['ids'] ? flags['ids'].split(',') : undefined,
    targetMetric: flags['target-metric'] ? numFlag(flags, 'target-metric', NaN) : undefined,
  };

  const lines: string[] = [csvHeader({ ...base, seed: seeds[0] })];
  for (const seed of seeds) {
    const cfg: TrainConfig = { ...base, seed };
    const result = train(data, cfg);
    const bundlePath = seededPath(out, seed, seeds.length > 1);
    fs.writeFileSync(bundlePath, result.bundle);
    for (const row of result.metrics) {
      const test = row.testMetric === null ? '' : row.testMetric.toFixed(6);
      lines.push(`${row.epoch},${seed},${row.loss.toFixed(6)},${row.trainMetric.toFixed(6)},${test}`);
    }
    const last = result.metrics[result.metrics.length - 1];
    console.log(`seed ${seed}: ${result.metrics.length} epochs, loss ${last.loss.toFixed(6)}, `
      + `train ${last.trainMetric.toFixed(4)}, wrote ${bundlePath}`);
  }
  if (flags['metrics']) fs.writeFileSync(flags['metrics'], lines.join('\n') + '\n');
  return 0;
}

function cmdGradCheck(argv: string[]): number {
  const flags = parseFlags(argv);
  const heads: CheckHead[] = flags['head']
    ? [flags['head'] as CheckHead]
    : ['vote', 'witness', 'score_forall', 'score_exists', 'embedding'];
  let worst = 0;
  for (const head of heads) {
    const res = gradCheck({
      architecture: intFlag(flags, 'arch', 5),
      d: intFlag(flags, 'd', 8),
      iterations: intFlag(flags, 'iters', 2),
      seed: intFlag(flags, 'seed', 0),
      head,
    });
    worst = Math.max(worst, res.maxRelErr);
    console.log(`${head}: max rel err ${res.maxRelErr.toExponential(3)} over ${res.checked} entries`);
  }
  if (worst >= 1e-4) {
    console.error(`gradient check FAILED: ${worst.toExponential(3)} >= 1e-4`);
    return 1;
  }
  return 0;
}

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  try {
    if (cmd === 'train') return cmdTrain(rest);
    if (cmd === 'gradcheck') return cmdGradCheck(rest);
    console.error('usage: cli <train|gradcheck> [flags]');
    return 2;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
