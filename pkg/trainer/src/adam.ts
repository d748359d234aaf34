/** Adam with bias correction; grads are consumed and reset each step. */
import type { Tensor } from './tensor.js';
import type { ParamMap } from './nn.js';

export class Adam {
  private readonly m = new Map<string, Float64Array>();
  private readonly v = new Map<string, Float64Array>();
  private t = 0;

  constructor(
    readonly lr: number,
    readonly beta1 = 0.9,
    readonly beta2 = 0.999,
    readonly eps = 1e-8,
  ) {}

  step(params: ParamMap): void {
    this.t += 1;
    const c1 = 1 - Math.pow(this.beta1, this.t);
    const c2 = 1 - Math.pow(this.beta2, this.t);
    for (const [name, p] of params) {
      const grad = p.grad;
      if (!grad) continue;
      let m = this.m.get(name);
      let v = this.v.get(name);
      if (!m) {
        m = new Float64Array(p.size);
        v = new Float64Array(p.size);
        this.m.set(name, m);
        this.v.set(name, v!);
      }
      for (let i = 0; i < grad.length; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * grad[i];
        v![i] = this.beta2 * v![i] + (1 - this.beta2) * grad[i] * grad[i];
        p.data[i] -= this.lr * (m[i] / c1) / (Math.sqrt(v![i] / c2) + this.eps);
      }
      p.grad = null;
    }
  }
}

export function zeroGrads(params: ParamMap): void {
  for (const p of params.values()) (p as Tensor).grad = null;
}
