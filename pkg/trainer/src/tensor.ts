/**
 * Reverse-mode autodiff over dense row-major float64 matrices.
 *
 * A module-level tape records every gradient-carrying node in creation order;
 * backward() walks it once in reverse. Constants (needsGrad false) never hit
 * the tape, so incidence matrices and assignment batches cost nothing extra.
 * Run forward passes without startTape() when only values are needed.
 */

export class Tensor {
  grad: Float64Array | null = null;
  back: (() => void) | null = null;

  constructor(
    readonly rows: number,
    readonly cols: number,
    readonly data: Float64Array,
    readonly needsGrad: boolean,
  ) {
    if (data.length !== rows * cols) {
      throw new Error(`tensor ${rows}x${cols} given ${data.length} values`);
    }
  }

  get size(): number {
    return this.rows * this.cols;
  }

  item(): number {
    if (this.size !== 1) throw new Error('item() needs a 1x1 tensor');
    return this.data[0];
  }
}

let tape: Tensor[] | null = null;

export function startTape(): void {
  tape = [];
}

export function stopTape(): void {
  tape = null;
}

export function param(rows: number, cols: number, data?: Float64Array): Tensor {
  return new Tensor(rows, cols, data ?? new Float64Array(rows * cols), true);
}

export function constant(rows: number, cols: number, data: Float64Array): Tensor {
  return new Tensor(rows, cols, data, false);
}

function track(out: Tensor, back: () => void): Tensor {
  if (tape !== null && out.needsGrad) {
    out.back = back;
    tape.push(out);
  }
  return out;
}

/** Gradient buffer of t, allocated on first touch. */
function g(t: Tensor): Float64Array {
  if (!t.grad) t.grad = new Float64Array(t.size);
  return t.grad;
}

/** Seed d(loss)=1 and propagate through everything recorded since startTape. */
export function backward(loss: Tensor): void {
  if (tape === null) throw new Error('backward() without an active tape');
  if (loss.size !== 1) throw new Error('loss must be scalar');
  g(loss)[0] += 1;
  for (let k = tape.length - 1; k >= 0; k--) {
    const t = tape[k];
    if (t.grad && t.back) t.back();
  }
  tape = null;
}

// out[m x n] += a[m x k] @ b[k x n]; skips zero entries of a (sparse 0/1
// incidence matrices make this the common case)
function gemmNN(a: Float64Array, b: Float64Array, m: number, k: number, n: number,
                out: Float64Array): void {
  for (let i = 0; i < m; i++) {
    for (let p = 0; p < k; p++) {
      const av = a[i * k + p];
      if (av === 0) continue;
      const bo = p * n;
      const oo = i * n;
      for (let j = 0; j < n; j++) out[oo + j] += av * b[bo + j];
    }
  }
}

// out[m x k] += x[m x n] @ transpose(y[k x n])
function gemmNT(x: Float64Array, y: Float64Array, m: number, n: number, k: number,
                out: Float64Array): void {
  for (let i = 0; i < m; i++) {
    for (let p = 0; p < k; p++) {
      let acc = 0;
      const xo = i * n;
      const yo = p * n;
      for (let j = 0; j < n; j++) acc += x[xo + j] * y[yo + j];
      out[i * k + p] += acc;
    }
  }
}

// out[k x n] += transpose(x[m x k]) @ y[m x n]
function gemmTN(x: Float64Array, y: Float64Array, m: number, k: number, n: number,
                out: Float64Array): void {
  for (let i = 0; i < m; i++) {
    for (let p = 0; p < k; p++) {
      const xv = x[i * k + p];
      if (xv === 0) continue;
      const yo = i * n;
      const oo = p * n;
      for (let j = 0; j < n; j++) out[oo + j] += xv * y[yo + j];
    }
  }
}

export function matmul(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) {
    throw new Error(`matmul ${a.rows}x${a.cols} @ ${b.rows}x${b.cols}`);
  }
  const out = new Tensor(a.rows, b.cols, new Float64Array(a.rows * b.cols),
                         a.needsGrad || b.needsGrad);
  gemmNN(a.data, b.data, a.rows, a.cols, b.cols, out.data);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) gemmNT(go, b.data, a.rows, b.cols, a.cols, g(a));
    if (b.needsGrad) gemmTN(a.data, go, a.rows, a.cols, b.cols, g(b));
  });
}

/** transpose(a) @ b without materializing the transpose. */
export function matmulTA(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows) {
    throw new Error(`matmulTA ${a.rows}x${a.cols} @ ${b.rows}x${b.cols}`);
  }
  const out = new Tensor(a.cols, b.cols, new Float64Array(a.cols * b.cols),
                         a.needsGrad || b.needsGrad);
  gemmTN(a.data, b.data, a.rows, a.cols, b.cols, out.data);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) gemmNT(b.data, go, b.rows, b.cols, a.cols, g(a));
    if (b.needsGrad) gemmNN(a.data, go, a.rows, a.cols, b.cols, g(b));
  });
}

export function add(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error('add shape mismatch');
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] + b.data[i];
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad || b.needsGrad);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) {
      const ga = g(a);
      for (let i = 0; i < go.length; i++) ga[i] += go[i];
    }
    if (b.needsGrad) {
      const gb = g(b);
      for (let i = 0; i < go.length; i++) gb[i] += go[i];
    }
  });
}

/** a[m x n] + row vector b[1 x n] broadcast over rows. */
export function addBias(a: Tensor, b: Tensor): Tensor {
  if (b.rows !== 1 || b.cols !== a.cols) throw new Error('bias shape mismatch');
  const data = new Float64Array(a.size);
  for (let i = 0; i < a.rows; i++) {
    const off = i * a.cols;
    for (let j = 0; j < a.cols; j++) data[off + j] = a.data[off + j] + b.data[j];
  }
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad || b.needsGrad);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) {
      const ga = g(a);
      for (let i = 0; i < go.length; i++) ga[i] += go[i];
    }
    if (b.needsGrad) {
      const gb = g(b);
      for (let i = 0; i < a.rows; i++) {
        const off = i * a.cols;
        for (let j = 0; j < a.cols; j++) gb[j] += go[off + j];
      }
    }
  });
}

export function mulEW(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error('mul shape mismatch');
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] * b.data[i];
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad || b.needsGrad);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) {
      const ga = g(a);
      for (let i = 0; i < go.length; i++) ga[i] += go[i] * b.data[i];
    }
    if (b.needsGrad) {
      const gb = g(b);
      for (let i = 0; i < go.length; i++) gb[i] += go[i] * a.data[i];
    }
  });
}

export function scale(a: Tensor, s: number): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] * s;
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    for (let i = 0; i < go.length; i++) ga[i] += go[i] * s;
  });
}

export function relu(a: Tensor): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] > 0 ? a.data[i] : 0;
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    for (let i = 0; i < go.length; i++) if (a.data[i] > 0) ga[i] += go[i];
  });
}

function sigmoidScalar(x: number): number {
  return x >= 0 ? 1 / (1 + Math.exp(-x)) : Math.exp(x) / (1 + Math.exp(x));
}

export function sigmoid(a: Tensor): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = sigmoidScalar(a.data[i]);
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    for (let i = 0; i < go.length; i++) ga[i] += go[i] * data[i] * (1 - data[i]);
  });
}

export function tanh(a: Tensor): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = Math.tanh(a.data[i]);
  const out = new Tensor(a.rows, a.cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    for (let i = 0; i < go.length; i++) ga[i] += go[i] * (1 - data[i] * data[i]);
  });
}

export function concatCols(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows) throw new Error('concatCols row mismatch');
  const n = a.cols + b.cols;
  const data = new Float64Array(a.rows * n);
  for (let i = 0; i < a.rows; i++) {
    data.set(a.data.subarray(i * a.cols, (i + 1) * a.cols), i * n);
    data.set(b.data.subarray(i * b.cols, (i + 1) * b.cols), i * n + a.cols);
  }
  const out = new Tensor(a.rows, n, data, a.needsGrad || b.needsGrad);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) {
      const ga = g(a);
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < a.cols; j++) ga[i * a.cols + j] += go[i * n + j];
      }
    }
    if (b.needsGrad) {
      const gb = g(b);
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < b.cols; j++) gb[i * b.cols + j] += go[i * n + a.cols + j];
      }
    }
  });
}

export function concatRows(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.cols) throw new Error('concatRows col mismatch');
  const data = new Float64Array((a.rows + b.rows) * a.cols);
  data.set(a.data, 0);
  data.set(b.data, a.size);
  const out = new Tensor(a.rows + b.rows, a.cols, data, a.needsGrad || b.needsGrad);
  return track(out, () => {
    const go = out.grad!;
    if (a.needsGrad) {
      const ga = g(a);
      for (let i = 0; i < a.size; i++) ga[i] += go[i];
    }
    if (b.needsGrad) {
      const gb = g(b);
      for (let i = 0; i < b.size; i++) gb[i] += go[a.size + i];
    }
  });
}

export function sliceRows(a: Tensor, lo: number, hi: number): Tensor {
  if (lo < 0 || hi > a.rows || lo >= hi) throw new Error('bad row slice');
  const rows = hi - lo;
  const data = a.data.slice(lo * a.cols, hi * a.cols);
  const out = new Tensor(rows, a.cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    const off = lo * a.cols;
    for (let i = 0; i < go.length; i++) ga[off + i] += go[i];
  });
}

export function sliceCols(a: Tensor, lo: number, hi: number): Tensor {
  if (lo < 0 || hi > a.cols || lo >= hi) throw new Error('bad col slice');
  const cols = hi - lo;
  const data = new Float64Array(a.rows * cols);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < cols; j++) data[i * cols + j] = a.data[i * a.cols + lo + j];
  }
  const out = new Tensor(a.rows, cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < cols; j++) ga[i * a.cols + lo + j] += go[i * cols + j];
    }
  });
}

/** Repeat a 1 x n row vector m times. */
export function tileRows(a: Tensor, m: number): Tensor {
  if (a.rows !== 1) throw new Error('tileRows needs a row vector');
  const data = new Float64Array(m * a.cols);
  for (let i = 0; i < m; i++) data.set(a.data, i * a.cols);
  const out = new Tensor(m, a.cols, data, a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad!;
    const ga = g(a);
    for (let i = 0; i < m; i++) {
      for (let j = 0; j < a.cols; j++) ga[j] += go[i * a.cols + j];
    }
  });
}

export function meanAll(a: Tensor): Tensor {
  let acc = 0;
  for (let i = 0; i < a.size; i++) acc += a.data[i];
  const out = new Tensor(1, 1, Float64Array.of(acc / a.size), a.needsGrad);
  return track(out, () => {
    if (!a.needsGrad) return;
    const go = out.grad![0] / a.size;
    const ga = g(a);
    for (let i = 0; i < ga.length; i++) ga[i] += go;
  });
}

function softplus(x: number): number {
  return Math.max(x, 0) + Math.log1p(Math.exp(-Math.abs(x)));
}

/** Binary cross-entropy on a single logit; target is 0 or 1. */
export function bceWithLogit(z: Tensor, target: number): Tensor {
  if (z.size !== 1) throw new Error('bceWithLogit needs a scalar logit');
  const zv = z.data[0];
  const loss = softplus(zv) - target * zv;
  const out = new Tensor(1, 1, Float64Array.of(loss), z.needsGrad);
  return track(out, () => {
    if (!z.needsGrad) return;
    g(z)[0] += out.grad![0] * (sigmoidScalar(zv) - target);
  });
}

/** Mean cross-entropy of row-wise softmax against integer class targets. */
export function softmaxRowCE(logits: Tensor, targets: number[]): Tensor {
  if (targets.length !== logits.rows) throw new Error('one target per row');
  const m = logits.rows;
  const c = logits.cols;
  const probs = new Float64Array(m * c);
  let loss = 0;
  for (let i = 0; i < m; i++) {
    const off = i * c;
    let hi = -Infinity;
    for (let j = 0; j < c; j++) hi = Math.max(hi, logits.data[off + j]);
    let z = 0;
    for (let j = 0; j < c; j++) {
      probs[off + j] = Math.exp(logits.data[off + j] - hi);
      z += probs[off + j];
    }
    for (let j = 0; j < c; j++) probs[off + j] /= z;
    loss -= Math.log(probs[off + targets[i]]);
  }
  const out = new Tensor(1, 1, Float64Array.of(loss / m), logits.needsGrad);
  return track(out, () => {
    if (!logits.needsGrad) return;
    const go = out.grad![0] / m;
    const gl = g(logits);
    for (let i = 0; i < m; i++) {
      const off = i * c;
      for (let j = 0; j < c; j++) {
        gl[off + j] += go * (probs[off + j] - (j === targets[i] ? 1 : 0));
      }
    }
  });
}

export interface RankPair {
  hi: number; // index expected to score higher
  lo: number;
  w: number; // nonnegative pair weight
}

/**
 * Weighted pairwise logistic loss over a column of scores:
 * sum_p w_p * softplus(s_lo - s_hi) / sum_p w_p. No pairs means zero loss
 * with no gradient.
 */
export function pairwiseLogistic(scores: Tensor, pairs: RankPair[]): Tensor {
  if (scores.cols !== 1) throw new Error('scores must be a column');
  let wsum = 0;
  for (const p of pairs) wsum += p.w;
  if (pairs.length === 0 || wsum === 0) {
    return constant(1, 1, Float64Array.of(0));
  }
  let loss = 0;
  for (const p of pairs) {
    loss += p.w * softplus(scores.data[p.lo] - scores.data[p.hi]);
  }
  const out = new Tensor(1, 1, Float64Array.of(loss / wsum), scores.needsGrad);
  return track(out, () => {
    if (!scores.needsGrad) return;
    const go = out.grad![0] / wsum;
    const gs = g(scores);
    for (const p of pairs) {
      const slope = sigmoidScalar(scores.data[p.lo] - scores.data[p.hi]);
      gs[p.lo] += go * p.w * slope;
      gs[p.hi] -= go * p.w * slope;
    }
  });
}
