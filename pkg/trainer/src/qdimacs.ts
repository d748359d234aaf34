/** QDIMACS reader and the clause/literal incidence encoding. */
import { Tensor, constant } from './tensor.js';

export interface Formula {
  universals: number[];
  existentials: number[];
  clauses: number[][];
}

export function parseQdimacs(text: string): Formula {
  let universals: number[] = [];
  let existentials: number[] = [];
  const clauses: number[][] = [];
  let sawHeader = false;
  for (const raw of text.split('\n')) {
    const line = raw.trim();
    if (!line || line.startsWith('c')) continue;
    if (line.startsWith('p')) {
      sawHeader = true;
      continue;
    }
    const quant = line.startsWith('a') || line.startsWith('e');
    const body = quant ? line.slice(1) : line;
    const nums = body.trim().split(/\s+/).map(Number);
    if (nums.some((v) => !Number.isInteger(v))) throw new Error(`bad line: ${line}`);
    if (nums[nums.length - 1] !== 0) throw new Error(`line missing terminator: ${line}`);
    nums.pop();
    if (line.startsWith('a')) universals = nums;
    else if (line.startsWith('e')) existentials = nums;
    else clauses.push(nums);
  }
  if (!sawHeader) throw new Error('missing problem line');
  return { universals, existentials, clauses };
}

export interface Encoded {
  nx: number;
  ny: number;
  numClauses: number;
  forallInc: Tensor; // |C| x 2|X|, constant
  existsInc: Tensor; // |C| x 2|Y|, constant
}

/** Columns are [v1..vn, -v1..-vn] within each block, one row per clause. */
export function encode(f: Formula): Encoded {
  const nx = f.universals.length;
  const ny = f.existentials.length;
  const xcol = new Map(f.universals.map((v, i) => [v, i]));
  const ycol = new Map(f.existentials.map((v, i) => [v, i]));
  const ef = new Float64Array(f.clauses.length * 2 * nx);
  const ee = new Float64Array(f.clauses.length * 2 * ny);
  f.clauses.forEach((cl, r) => {
    for (const lit of cl) {
      const v = Math.abs(lit);
      const xi = xcol.get(v);
      if (xi !== undefined) {
        ef[r * 2 * nx + xi + (lit > 0 ? 0 : nx)] = 1;
      } else {
        const yi = ycol.get(v);
        if (yi === undefined) throw new Error(`unbound variable ${v}`);
        ee[r * 2 * ny + yi + (lit > 0 ? 0 : ny)] = 1;
      }
    }
  });
  return {
    nx,
    ny,
    numClauses: f.clauses.length,
    forallInc: constant(f.clauses.length, 2 * nx, ef),
    existsInc: constant(f.clauses.length, 2 * ny, ee),
  };
}

/** Bit-string rows ("0"/"1" per variable in block order) as a constant B x n matrix. */
export function bitsMatrix(rows: string[], n: number): Tensor {
  const data = new Float64Array(rows.length * n);
  rows.forEach((bits, i) => {
    if (bits.length !== n) throw new Error(`bits ${bits} for block of ${n}`);
    for (let j = 0; j < n; j++) data[i * n + j] = bits[j] === '1' ? 1 : 0;
  });
  return constant(rows.length, n, data);
}
