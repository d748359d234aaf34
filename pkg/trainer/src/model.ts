/**
 * Differentiable forward pass of the seven message-passing architectures,
 * equation for equation the same computation the solver runs at inference
 * time, so exported bundles behave identically there.
 */
import {
  Tensor, add, concatCols, concatRows, matmul, matmulTA, meanAll, relu,
  sliceRows, tileRows,
} from './tensor.js';
import { ParamMap, lstmStep, mlp3, req } from './nn.js';
import type { Encoded } from './qdimacs.js';

export interface EmbeddingOut {
  forall: Tensor; // 2|X| x d
  exists: Tensor; // 2|Y| x d
  clauses: Map<string, Tensor>;
  cells: Map<string, Tensor>;
}

function negateRows(emb: Tensor): Tensor {
  const n = emb.rows / 2;
  return concatRows(sliceRows(emb, n, 2 * n), sliceRows(emb, 0, n));
}

/** |V| x 2d, each row the concatenated positive and negative literal rows. */
export function variablePairs(emb: Tensor): Tensor {
  const n = emb.rows / 2;
  return concatCols(sliceRows(emb, 0, n), sliceRows(emb, n, 2 * n));
}

function lstmNames(P: ParamMap): string[] {
  const names: string[] = [];
  for (const key of P.keys()) {
    if (key.endsWith('.wx')) names.push(key.slice(0, -3));
  }
  return names.sort();
}

interface State {
  st: EmbeddingOut;
  enc: Encoded;
  P: ParamMap;
}

function clauseUpdate(s: State, lstm: string, stream: string, x: Tensor): Tensor {
  const { h, c } = lstmStep(s.P, lstm, x, s.st.clauses.get(stream)!, s.st.cells.get(lstm)!);
  s.st.clauses.set(stream, h);
  s.st.cells.set(lstm, c);
  return h;
}

function litUpdate(s: State, lstm: string, inc: Tensor, msg: Tensor,
                   side: 'forall' | 'exists'): void {
  const emb = side === 'forall' ? s.st.forall : s.st.exists;
  const x = concatCols(matmulTA(inc, msg), negateRows(emb));
  const { h, c } = lstmStep(s.P, lstm, x, emb, s.st.cells.get(lstm)!);
  if (side === 'forall') s.st.forall = h;
  else s.st.exists = h;
  s.st.cells.set(lstm, c);
}

function stepJointSum(s: State): void {
  const msgFa = mlp3(s.P, 'msg_forall', s.st.forall);
  const msgEx = mlp3(s.P, 'msg_exists', s.st.exists);
  const x = add(matmul(s.enc.forallInc, msgFa), matmul(s.enc.existsInc, msgEx));
  const embC = clauseUpdate(s, 'upd_clause', 'clause', x);
  const msgCl = mlp3(s.P, 'msg_clause', embC);
  litUpdate(s, 'upd_forall', s.enc.forallInc, msgCl, 'forall');
  litUpdate(s, 'upd_exists', s.enc.existsInc, msgCl, 'exists');
}

function stepSequential(s: State, forallFirst: boolean): void {
  const msgFa = mlp3(s.P, 'msg_forall', s.st.forall);
  const msgEx = mlp3(s.P, 'msg_exists', s.st.exists);
  let first: [string, Tensor] = ['upd_clause_from_forall', matmul(s.enc.forallInc, msgFa)];
  let second: [string, Tensor] = ['upd_clause_from_exists', matmul(s.enc.existsInc, msgEx)];
  if (!forallFirst) [first, second] = [second, first];
  clauseUpdate(s, first[0], 'clause', first[1]);
  const embC = clauseUpdate(s, second[0], 'clause', second[1]);
  const msgCl = mlp3(s.P, 'msg_clause', embC);
  litUpdate(s, 'upd_forall', s.enc.forallInc, msgCl, 'forall');
  litUpdate(s, 'upd_exists', s.enc.existsInc, msgCl, 'exists');
}

function stepConcat(s: State, splitMessages: boolean): void {
  const msgFa = mlp3(s.P, 'msg_forall', s.st.forall);
  const msgEx = mlp3(s.P, 'msg_exists', s.st.exists);
  const x = concatCols(matmul(s.enc.forallInc, msgFa), matmul(s.enc.existsInc, msgEx));
  const embC = clauseUpdate(s, 'upd_clause', 'clause', x);
  let msgCf: Tensor;
  let msgCe: Tensor;
  if (splitMessages) {
    msgCf = mlp3(s.P, 'msg_clause_to_forall', embC);
    msgCe = mlp3(s.P, 'msg_clause_to_exists', embC);
  } else {
    msgCf = msgCe = mlp3(s.P, 'msg_clause', embC);
  }
  litUpdate(s, 'upd_forall', s.enc.forallInc, msgCf, 'forall');
  litUpdate(s, 'upd_exists', s.enc.existsInc, msgCe, 'exists');
}

function stepDualStream(s: State): void {
  const msgFa = mlp3(s.P, 'msg_forall', s.st.forall);
  const msgEx = mlp3(s.P, 'msg_exists', s.st.exists);
  const x = concatCols(matmul(s.enc.forallInc, msgFa), matmul(s.enc.existsInc, msgEx));
  const embCf = clauseUpdate(s, 'upd_clause_for_forall', 'clause_to_forall', x);
  const embCe = clauseUpdate(s, 'upd_clause_for_exists', 'clause_to_exists', x);
  const msgCf = mlp3(s.P, 'msg_clause_to_forall', embCf);
  const msgCe = mlp3(s.P, 'msg_clause_to_exists', embCe);
  litUpdate(s, 'upd_forall', s.enc.forallInc, msgCf, 'forall');
  litUpdate(s, 'upd_exists', s.enc.existsInc, msgCe, 'exists');
}

function stepTwoPhase(s: State): void {
  const msgFa = mlp3(s.P, 'msg_forall', s.st.forall);
  const embCe = clauseUpdate(s, 'upd_clause_for_exists', 'clause_to_exists',
                             matmul(s.enc.forallInc, msgFa));
  const msgCe = mlp3(s.P, 'msg_clause_to_exists', embCe);
  litUpdate(s, 'upd_exists', s.enc.existsInc, msgCe, 'exists');
  const msgEx = mlp3(s.P, 'msg_exists', s.st.exists);
  const embCf = clauseUpdate(s, 'upd_clause_for_forall', 'clause_to_forall',
                             matmul(s.enc.existsInc, msgEx));
  const msgCf = mlp3(s.P, 'msg_clause_to_forall', embCf);
  litUpdate(s, 'upd_forall', s.enc.forallInc, msgCf, 'forall');
}

export function runEmbedding(enc: Encoded, P: ParamMap, arch: number,
                             iterations: number): EmbeddingOut {
  if (iterations < 0) throw new Error('iterations must be >= 0');
  const streams = arch === 6 || arch === 7
    ? ['clause_to_forall', 'clause_to_exists']
    : ['clause'];
  const st: EmbeddingOut = {
    forall: tileRows(req(P, 'init_forall_h'), 2 * enc.nx),
    exists: tileRows(req(P, 'init_exists_h'), 2 * enc.ny),
    clauses: new Map(streams.map((name) => [name, tileRows(req(P, 'init_clause_h'), enc.numClauses)])),
    cells: new Map(),
  };
  for (const name of lstmNames(P)) {
    let rows = enc.numClauses;
    let init = 'init_clause_c';
    if (name === 'upd_forall') {
      rows = 2 * enc.nx;
      init = 'init_forall_c';
    } else if (name === 'upd_exists') {
      rows = 2 * enc.ny;
      init = 'init_exists_c';
    }
    st.cells.set(name, tileRows(req(P, init), rows));
  }
  const s: State = { st, enc, P };
  const step = {
    1: () => stepJointSum(s),
    2: () => stepSequential(s, true),
    3: () => stepSequential(s, false),
    4: () => stepConcat(s, false),
    5: () => stepConcat(s, true),
    6: () => stepDualStream(s),
    7: () => stepTwoPhase(s),
  }[arch];
  if (!step) throw new Error(`unknown architecture ${arch}`);
  for (let t = 0; t < iterations; t++) step();
  return st;
}

/** Scalar truth logit: per-universal-variable votes, averaged. */
export function headVoteLogit(P: ParamMap, st: EmbeddingOut): Tensor {
  return meanAll(mlp3(P, 'vote', variablePairs(st.forall)));
}

/** Unnormalized per-universal-variable polarity logits, |X| x 2. */
export function headWitnessLogits(P: ParamMap, st: EmbeddingOut): Tensor {
  return mlp3(P, 'witness', variablePairs(st.forall));
}

/** Assignment scores, one per row of bits (B x |block|) -> B x 1. */
export function headScores(P: ParamMap, head: 'score_forall' | 'score_exists',
                           st: EmbeddingOut, bits: Tensor): Tensor {
  const emb = head === 'score_forall' ? st.forall : st.exists;
  const pairs = variablePairs(emb);
  if (bits.cols !== pairs.rows) {
    throw new Error(`assignment matrix must be B x ${pairs.rows}`);
  }
  const sm = mlp3(P, head, pairs);
  const hidden = relu(matmul(bits, sm));
  return matmul(hidden, req(P, `${head}.out`));
}
