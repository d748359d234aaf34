/** MLP and LSTM building blocks over named parameter maps. */
import {
  Tensor, add, addBias, matmul, mulEW, relu, sigmoid, sliceCols, tanh,
} from './tensor.js';

export type ParamMap = Map<string, Tensor>;

export function req(P: ParamMap, name: string): Tensor {
  const t = P.get(name);
  if (!t) throw new Error(`missing parameter ${name}`);
  return t;
}

/** Three layers, rectifier between, linear output: matches the bundle layout. */
export function mlp3(P: ParamMap, name: string, x: Tensor): Tensor {
  const h0 = relu(addBias(matmul(x, req(P, `${name}.w0`)), req(P, `${name}.b0`)));
  const h1 = relu(addBias(matmul(h0, req(P, `${name}.w1`)), req(P, `${name}.b1`)));
  return addBias(matmul(h1, req(P, `${name}.w2`)), req(P, `${name}.b2`));
}

/** One LSTM step, gate order input/forget/cell/output. */
export function lstmStep(
  P: ParamMap, name: string, x: Tensor, h: Tensor, c: Tensor,
): { h: Tensor; c: Tensor } {
  const d = h.cols;
  const gates = addBias(
    add(matmul(x, req(P, `${name}.wx`)), matmul(h, req(P, `${name}.wh`))),
    req(P, `${name}.b`),
  );
  const i = sigmoid(sliceCols(gates, 0, d));
  const f = sigmoid(sliceCols(gates, d, 2 * d));
  const gg = tanh(sliceCols(gates, 2 * d, 3 * d));
  const o = sigmoid(sliceCols(gates, 3 * d, 4 * d));
  const cNew = add(mulEW(f, c), mulEW(i, gg));
  return { h: mulEW(o, tanh(cNew)), c: cNew };
}
