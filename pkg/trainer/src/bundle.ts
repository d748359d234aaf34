/**
 * The shared weight-bundle container: magic "QGNN", format version,
 * architecture id, embedding width, tensor count, then name-sorted tensors
 * (name, rank, dims, row-major float32) and a trailing CRC-32. Everything
 * little-endian.
 *
 * Parameters train in float64; export rounds through Float32Array so the
 * solver side loads exactly what a re-import here would see.
 */
import { Rng } from './rng.js';
import { Tensor, param } from './tensor.js';
import type { ParamMap } from './nn.js';

export const MAGIC = 'QGNN';
export const FORMAT_VERSION = 1;
export const ARCHITECTURES = [1, 2, 3, 4, 5, 6, 7] as const;

export const HEADS = ['vote', 'witness', 'score_forall', 'score_exists'] as const;
export type Head = (typeof HEADS)[number];

export interface BundleTensor {
  dims: number[]; // rank = dims.length, as stored in the file
  data: Float64Array;
}

export interface BundleData {
  architecture: number;
  d: number;
  tensors: Map<string, BundleTensor>;
}

function mlpShapes(name: string, inDim: number, hidden: number, outDim: number,
                   into: Map<string, number[]>): void {
  into.set(`${name}.w0`, [inDim, hidden]);
  into.set(`${name}.b0`, [hidden]);
  into.set(`${name}.w1`, [hidden, hidden]);
  into.set(`${name}.b1`, [hidden]);
  into.set(`${name}.w2`, [hidden, outDim]);
  into.set(`${name}.b2`, [outDim]);
}

function lstmShapes(name: string, inDim: number, d: number,
                    into: Map<string, number[]>): void {
  into.set(`${name}.wx`, [inDim, 4 * d]);
  into.set(`${name}.wh`, [d, 4 * d]);
  into.set(`${name}.b`, [4 * d]);
}

export function embeddingShapes(arch: number, d: number): Map<string, number[]> {
  if (!ARCHITECTURES.includes(arch as never)) {
    throw new Error(`unknown architecture ${arch}`);
  }
  const s = new Map<string, number[]>();
  for (const cls of ['forall', 'exists', 'clause']) {
    s.set(`init_${cls}_h`, [d]);
    s.set(`init_${cls}_c`, [d]);
  }
  mlpShapes('msg_forall', d, d, d, s);
  mlpShapes('msg_exists', d, d, d, s);
  if (arch <= 4) {
    mlpShapes('msg_clause', d, d, d, s);
  } else {
    mlpShapes('msg_clause_to_forall', d, d, d, s);
    mlpShapes('msg_clause_to_exists', d, d, d, s);
  }
  if (arch === 1) {
    lstmShapes('upd_clause', d, d, s);
  } else if (arch === 2 || arch === 3) {
    lstmShapes('upd_clause_from_forall', d, d, s);
    lstmShapes('upd_clause_from_exists', d, d, s);
  } else if (arch === 4 || arch === 5) {
    lstmShapes('upd_clause', 2 * d, d, s);
  } else if (arch === 6) {
    lstmShapes('upd_clause_for_forall', 2 * d, d, s);
    lstmShapes('upd_clause_for_exists', 2 * d, d, s);
  } else {
    lstmShapes('upd_clause_for_forall', d, d, s);
    lstmShapes('upd_clause_for_exists', d, d, s);
  }
  lstmShapes('upd_forall', 2 * d, d, s);
  lstmShapes('upd_exists', 2 * d, d, s);
  return s;
}

export function headShapes(head: Head, d: number, k: number): Map<string, number[]> {
  const s = new Map<string, number[]>();
  if (head === 'vote') {
    mlpShapes('vote', 2 * d, d, 1, s);
  } else if (head === 'witness') {
    mlpShapes('witness', 2 * d, d, 2, s);
  } else {
    mlpShapes(head, 2 * d, d, k, s);
    s.set(`${head}.out`, [k]);
  }
  return s;
}

const CRC_TABLE = (() => {
  const t = new Uint32Array(256);
  for (let i = 0; i < 256; i++) {
    let c = i;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    t[i] = c >>> 0;
  }
  return t;
})();

export function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

export function toBytes(b: BundleData): Buffer {
  const parts: Buffer[] = [];
  const head = Buffer.alloc(20);
  head.write(MAGIC, 0, 'ascii');
  head.writeUInt32LE(FORMAT_VERSION, 4);
  head.writeUInt32LE(b.architecture, 8);
  head.writeUInt32LE(b.d, 12);
  head.writeUInt32LE(b.tensors.size, 16);
  parts.push(head);
  for (const name of [...b.tensors.keys()].sort()) {
    const t = b.tensors.get(name)!;
    const nameBuf = Buffer.from(name, 'utf-8');
    const meta = Buffer.alloc(8 + 4 * t.dims.length);
    meta.writeUInt32LE(nameBuf.length, 0);
    // name goes between the length and the rank
    meta.writeUInt32LE(t.dims.length, 4);
    for (let i = 0; i < t.dims.length; i++) meta.writeUInt32LE(t.dims[i], 8 + 4 * i);
    const count = t.dims.reduce((a, v) => a * v, 1);
    if (count !== t.data.length) {
      throw new Error(`tensor ${name}: dims ${t.dims} but ${t.data.length} values`);
    }
    const payload = Buffer.alloc(4 * count);
    for (let i = 0; i < count; i++) payload.writeFloatLE(Math.fround(t.data[i]), 4 * i);
    parts.push(meta.subarray(0, 4), nameBuf, meta.subarray(4), payload);
  }
  const body = Buffer.concat(parts);
  const tail = Buffer.alloc(4);
  tail.writeUInt32LE(crc32(body), 0);
  return Buffer.concat([body, tail]);
}

export function fromBytes(buf: Buffer): BundleData {
  if (buf.length < 24) throw new Error('truncated bundle');
  if (buf.toString('ascii', 0, 4) !== MAGIC) throw new Error('bad magic; not a weight bundle');
  const stored = buf.readUInt32LE(buf.length - 4);
  if (crc32(buf.subarray(0, buf.length - 4)) !== stored) {
    throw new Error('checksum mismatch; bundle corrupted');
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) throw new Error(`unsupported format version ${version}`);
  const architecture = buf.readUInt32LE(8);
  const d = buf.readUInt32LE(12);
  const count = buf.readUInt32LE(16);
  let pos = 20;
  const tensors = new Map<string, BundleTensor>();
  for (let i = 0; i < count; i++) {
    const nlen = buf.readUInt32LE(pos);
    pos += 4;
    const name = buf.toString('utf-8', pos, pos + nlen);
    pos += nlen;
    const rank = buf.readUInt32LE(pos);
    pos += 4;
    const dims: number[] = [];
    for (let r = 0; r < rank; r++) {
      dims.push(buf.readUInt32LE(pos));
      pos += 4;
    }
    const n = dims.reduce((a, v) => a * v, 1);
    const data = new Float64Array(n);
    for (let j = 0; j < n; j++) data[j] = buf.readFloatLE(pos + 4 * j);
    pos += 4 * n;
    tensors.set(name, { dims, data });
  }
  if (pos !== buf.length - 4) throw new Error('trailing bytes in bundle');
  return { architecture, d, tensors };
}

/** In-memory matrix shape for a stored tensor name. */
export function matrixShape(name: string, dims: number[]): [number, number] {
  if (dims.length === 2) return [dims[0], dims[1]];
  if (dims.length !== 1) throw new Error(`tensor ${name}: rank ${dims.length}`);
  // score head output vectors multiply from the right, so keep them columns;
  // biases and initial embeddings broadcast over rows
  return name.endsWith('.out') ? [dims[0], 1] : [1, dims[0]];
}

/** All tensor shapes for one architecture plus the given heads. */
export function allShapes(arch: number, d: number, k: number,
                          heads: readonly Head[]): Map<string, number[]> {
  const shapes = embeddingShapes(arch, d);
  for (const h of heads) {
    for (const [name, dims] of headShapes(h, d, k)) shapes.set(name, dims);
  }
  return shapes;
}

/** Fresh trainable parameters, same init family as the solver's random bundles. */
export function initParams(arch: number, d: number, k: number,
                           heads: readonly Head[], rng: Rng): ParamMap {
  const P: ParamMap = new Map();
  const shapes = allShapes(arch, d, k, heads);
  for (const name of [...shapes.keys()].sort()) {
    const dims = shapes.get(name)!;
    const [rows, cols] = matrixShape(name, dims);
    const t = param(rows, cols);
    if (/\.b[012]?$/.test(name)) {
      // biases start at zero
    } else if (name.startsWith('init_')) {
      for (let i = 0; i < t.data.length; i++) t.data[i] = rng.gauss();
    } else {
      const scaleV = 1 / Math.sqrt(dims[0]);
      for (let i = 0; i < t.data.length; i++) t.data[i] = rng.gauss() * scaleV;
    }
    P.set(name, t);
  }
  return P;
}

export function paramsToBundle(arch: number, d: number, P: ParamMap): BundleData {
  const heads = HEADS.filter((h) => P.has(`${h}.w0`));
  let k = d;
  for (const h of ['score_forall', 'score_exists'] as const) {
    const w2 = P.get(`${h}.w2`);
    if (w2) k = w2.cols;
  }
  const shapes = allShapes(arch, d, k, heads);
  const tensors = new Map<string, BundleTensor>();
  for (const [name, dims] of shapes) {
    const t = P.get(name);
    if (!t) throw new Error(`missing parameter ${name}`);
    const [rows, cols] = matrixShape(name, dims);
    if (t.rows !== rows || t.cols !== cols) {
      throw new Error(`parameter ${name}: ${t.rows}x${t.cols}, want ${rows}x${cols}`);
    }
    tensors.set(name, { dims, data: Float64Array.from(t.data) });
  }
  for (const name of P.keys()) {
    if (!shapes.has(name)) throw new Error(`unexpected parameter ${name}`);
  }
  return { architecture: arch, d, tensors };
}

export function bundleToParams(b: BundleData): ParamMap {
  const P: ParamMap = new Map();
  for (const [name, t] of b.tensors) {
    const [rows, cols] = matrixShape(name, t.dims);
    P.set(name, new Tensor(rows, cols, Float64Array.from(t.data), true));
  }
  return P;
}
