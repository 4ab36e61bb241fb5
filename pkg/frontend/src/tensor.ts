/**
 * Minimal dense-matrix autograd: enough ops for a small encoder-decoder
 * transformer, nothing more.  Sequences are processed per example (no
 * padding), so attention masking is just a per-row valid-column limit.
 * Everything is Float32 and loop-based; determinism comes for free.
 *
 * Ops record backward closures on an explicit tape.  With no active
 * tape they run forward-only, which is the inference path.
 */

export class Mat {
  data: Float32Array;
  grad: Float32Array | null = null;
  readonly rows: number;
  readonly cols: number;

  constructor(rows: number, cols: number, data?: Float32Array) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float32Array(rows * cols);
  }

  ensureGrad(): Float32Array {
    if (!this.grad) this.grad = new Float32Array(this.rows * this.cols);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0);
  }
}

export class Tape {
  private readonly steps: Array<() => void> = [];

  record(step: () => void): void {
    this.steps.push(step);
  }

  /** Run recorded closures in reverse; loss gradients are seeded by the loss ops. */
  backward(): void {
    for (let i = this.steps.length - 1; i >= 0; i--) this.steps[i]();
  }
}

let activeTape: Tape | null = null;

export function withTape<T>(tape: Tape, fn: () => T): T {
  const previous = activeTape;
  activeTape = tape;
  try {
    return fn();
  } finally {
    activeTape = previous;
  }
}

// Training-time dropout: seeded and scoped, so runs stay reproducible and
// evaluation paths (no state set) are exact no-ops.
let dropoutRandom: (() => number) | null = null;
let dropoutRate = 0;

export function withDropout<T>(random: () => number, rate: number, fn: () => T): T {
  const prevRandom = dropoutRandom;
  const prevRate = dropoutRate;
  dropoutRandom = rate > 0 ? random : null;
  dropoutRate = rate;
  try {
    return fn();
  } finally {
    dropoutRandom = prevRandom;
    dropoutRate = prevRate;
  }
}

/** Inverted dropout; identity unless inside withDropout. */
export function dropout(x: Mat): Mat {
  if (!dropoutRandom || dropoutRate <= 0) return x;
  const keep = 1 - dropoutRate;
  const mask = new Float32Array(x.data.length);
  const out = new Mat(x.rows, x.cols);
  for (let i = 0; i < x.data.length; i++) {
    mask[i] = dropoutRandom() < dropoutRate ? 0 : 1 / keep;
    out.data[i] = x.data[i] * mask[i];
  }
  return track(out, () => {
    const g = out.grad!;
    if (x.grad) for (let i = 0; i < g.length; i++) x.grad[i] += g[i] * mask[i];
  });
}

function track(out: Mat, backward: () => void): Mat {
  if (activeTape) {
    out.ensureGrad();
    activeTape.record(backward);
  }
  return out;
}

/** c = a x b */
export function matmul(a: Mat, b: Mat): Mat {
  if (a.cols !== b.rows) throw new Error(`matmul shape ${a.cols} vs ${b.rows}`);
  const m = a.rows, k = a.cols, n = b.cols;
  const out = new Mat(m, n);
  const ad = a.data, bd = b.data, cd = out.data;
  for (let i = 0; i < m; i++) {
    const arow = i * k, crow = i * n;
    for (let l = 0; l < k; l++) {
      const av = ad[arow + l];
      if (av === 0) continue;
      const brow = l * n;
      for (let j = 0; j < n; j++) cd[crow + j] += av * bd[brow + j];
    }
  }
  return track(out, () => {
    const gc = out.grad!;
    if (a.grad) {
      const ga = a.grad;
      for (let i = 0; i < m; i++) {
        const arow = i * k, crow = i * n;
        for (let l = 0; l < k; l++) {
          const brow = l * n;
          let sum = 0;
          for (let j = 0; j < n; j++) sum += gc[crow + j] * bd[brow + j];
          ga[arow + l] += sum;
        }
      }
    }
    if (b.grad) {
      const gb = b.grad;
      for (let i = 0; i < m; i++) {
        const arow = i * k, crow = i * n;
        for (let l = 0; l < k; l++) {
          const av = ad[arow + l];
          if (av === 0) continue;
          const brow = l * n;
          for (let j = 0; j < n; j++) gb[brow + j] += av * gc[crow + j];
        }
      }
    }
  });
}

/** c = a x b^T (rows of b are the keys) */
export function matmulT(a: Mat, b: Mat): Mat {
  if (a.cols !== b.cols) throw new Error(`matmulT shape ${a.cols} vs ${b.cols}`);
  const m = a.rows, k = a.cols, n = b.rows;
  const out = new Mat(m, n);
  const ad = a.data, bd = b.data, cd = out.data;
  for (let i = 0; i < m; i++) {
    const arow = i * k, crow = i * n;
    for (let j = 0; j < n; j++) {
      const brow = j * k;
      let sum = 0;
      for (let l = 0; l < k; l++) sum += ad[arow + l] * bd[brow + l];
      cd[crow + j] = sum;
    }
  }
  return track(out, () => {
    const gc = out.grad!;
    if (a.grad) {
      const ga = a.grad;
      for (let i = 0; i < m; i++) {
        const arow = i * k, crow = i * n;
        for (let j = 0; j < n; j++) {
          const gv = gc[crow + j];
          if (gv === 0) continue;
          const brow = j * k;
          for (let l = 0; l < k; l++) ga[arow + l] += gv * bd[brow + l];
        }
      }
    }
    if (b.grad) {
      const gb = b.grad;
      for (let i = 0; i < m; i++) {
        const arow = i * k, crow = i * n;
        for (let j = 0; j < n; j++) {
          const gv = gc[crow + j];
          if (gv === 0) continue;
          const brow = j * k;
          for (let l = 0; l < k; l++) gb[brow + l] += gv * ad[arow + l];
        }
      }
    }
  });
}

export function add(a: Mat, b: Mat): Mat {
  const out = new Mat(a.rows, a.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] + b.data[i];
  return track(out, () => {
    const g = out.grad!;
    if (a.grad) for (let i = 0; i < g.length; i++) a.grad[i] += g[i];
    if (b.grad) for (let i = 0; i < g.length; i++) b.grad[i] += g[i];
  });
}

/** Broadcast a [1, c] bias over every row. */
export function addRow(x: Mat, bias: Mat): Mat {
  const out = new Mat(x.rows, x.cols);
  for (let i = 0; i < x.rows; i++) {
    const row = i * x.cols;
    for (let j = 0; j < x.cols; j++) out.data[row + j] = x.data[row + j] + bias.data[j];
  }
  return track(out, () => {
    const g = out.grad!;
    if (x.grad) for (let i = 0; i < g.length; i++) x.grad[i] += g[i];
    if (bias.grad) {
      for (let i = 0; i < x.rows; i++) {
        const row = i * x.cols;
        for (let j = 0; j < x.cols; j++) bias.grad[j] += g[row + j];
      }
    }
  });
}

export function scale(x: Mat, s: number): Mat {
  const out = new Mat(x.rows, x.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = x.data[i] * s;
  return track(out, () => {
    const g = out.grad!;
    if (x.grad) for (let i = 0; i < g.length; i++) x.grad[i] += g[i] * s;
  });
}

export function relu(x: Mat): Mat {
  const out = new Mat(x.rows, x.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  return track(out, () => {
    const g = out.grad!;
    if (x.grad) {
      for (let i = 0; i < g.length; i++) if (x.data[i] > 0) x.grad[i] += g[i];
    }
  });
}

export function layerNorm(x: Mat, gain: Mat, bias: Mat, eps = 1e-5): Mat {
  const n = x.cols;
  const out = new Mat(x.rows, n);
  const normalized = new Float32Array(x.rows * n);
  const invStd = new Float32Array(x.rows);
  for (let i = 0; i < x.rows; i++) {
    const row = i * n;
    let mean = 0;
    for (let j = 0; j < n; j++) mean += x.data[row + j];
    mean /= n;
    let variance = 0;
    for (let j = 0; j < n; j++) {
      const d = x.data[row + j] - mean;
      variance += d * d;
    }
    variance /= n;
    const inv = 1 / Math.sqrt(variance + eps);
    invStd[i] = inv;
    for (let j = 0; j < n; j++) {
      const nh = (x.data[row + j] - mean) * inv;
      normalized[row + j] = nh;
      out.data[row + j] = nh * gain.data[j] + bias.data[j];
    }
  }
  return track(out, () => {
    const g = out.grad!;
    for (let i = 0; i < x.rows; i++) {
      const row = i * n;
      let meanGd = 0;
      let meanGdXhat = 0;
      for (let j = 0; j < n; j++) {
        const gd = g[row + j] * gain.data[j];
        meanGd += gd;
        meanGdXhat += gd * normalized[row + j];
      }
      meanGd /= n;
      meanGdXhat /= n;
      for (let j = 0; j < n; j++) {
        const gd = g[row + j] * gain.data[j];
        if (x.grad) {
          x.grad[row + j] +=
            (gd - meanGd - normalized[row + j] * meanGdXhat) * invStd[i];
        }
        if (gain.grad) gain.grad[j] += g[row + j] * normalized[row + j];
        if (bias.grad) bias.grad[j] += g[row + j];
      }
    }
  });
}

/**
 * Row-wise softmax over a limited prefix of columns.  Row i is valid up
 * to validCols(i) (exclusive); entries beyond that are exactly zero, so
 * later matmuls contribute exactly 0 for them and causal masking is
 * bitwise airtight.
 */
export function softmaxRows(x: Mat, validCols: (row: number) => number): Mat {
  const n = x.cols;
  const out = new Mat(x.rows, n);
  for (let i = 0; i < x.rows; i++) {
    const row = i * n;
    const limit = validCols(i);
    let max = -Infinity;
    for (let j = 0; j < limit; j++) if (x.data[row + j] > max) max = x.data[row + j];
    let sum = 0;
    for (let j = 0; j < limit; j++) {
      const e = Math.exp(x.data[row + j] - max);
      out.data[row + j] = e;
      sum += e;
    }
    for (let j = 0; j < limit; j++) out.data[row + j] /= sum;
  }
  return track(out, () => {
    const g = out.grad!;
    if (!x.grad) return;
    for (let i = 0; i < x.rows; i++) {
      const row = i * n;
      const limit = validCols(i);
      let dot = 0;
      for (let j = 0; j < limit; j++) dot += out.data[row + j] * g[row + j];
      for (let j = 0; j < limit; j++) {
        x.grad[row + j] += out.data[row + j] * (g[row + j] - dot);
      }
    }
  });
}

export function sliceCols(x: Mat, start: number, width: number): Mat {
  const out = new Mat(x.rows, width);
  for (let i = 0; i < x.rows; i++) {
    out.data.set(x.data.subarray(i * x.cols + start, i * x.cols + start + width), i * width);
  }
  return track(out, () => {
    const g = out.grad!;
    if (!x.grad) return;
    for (let i = 0; i < x.rows; i++) {
      for (let j = 0; j < width; j++) x.grad[i * x.cols + start + j] += g[i * width + j];
    }
  });
}

export function concatCols(parts: Mat[]): Mat {
  const rows = parts[0].rows;
  const cols = parts.reduce((total, p) => total + p.cols, 0);
  const out = new Mat(rows, cols);
  let offset = 0;
  for (const part of parts) {
    for (let i = 0; i < rows; i++) {
      out.data.set(part.data.subarray(i * part.cols, (i + 1) * part.cols), i * cols + offset);
    }
    offset += part.cols;
  }
  return track(out, () => {
    const g = out.grad!;
    let off = 0;
    for (const part of parts) {
      if (part.grad) {
        for (let i = 0; i < rows; i++) {
          for (let j = 0; j < part.cols; j++) {
            part.grad[i * part.cols + j] += g[i * cols + off + j];
          }
        }
      }
      off += part.cols;
    }
  });
}

/** Gather rows of an embedding table. */
export function embed(table: Mat, ids: ArrayLike<number>): Mat {
  const n = ids.length;
  const out = new Mat(n, table.cols);
  for (let i = 0; i < n; i++) {
    out.data.set(
      table.data.subarray(ids[i] * table.cols, (ids[i] + 1) * table.cols),
      i * table.cols,
    );
  }
  return track(out, () => {
    const g = out.grad!;
    if (!table.grad) return;
    for (let i = 0; i < n; i++) {
      const src = i * table.cols;
      const dst = ids[i] * table.cols;
      for (let j = 0; j < table.cols; j++) table.grad[dst + j] += g[src + j];
    }
  });
}

export function meanRows(x: Mat): Mat {
  const out = new Mat(1, x.cols);
  for (let i = 0; i < x.rows; i++) {
    for (let j = 0; j < x.cols; j++) out.data[j] += x.data[i * x.cols + j];
  }
  for (let j = 0; j < x.cols; j++) out.data[j] /= x.rows;
  return track(out, () => {
    const g = out.grad!;
    if (!x.grad) return;
    for (let i = 0; i < x.rows; i++) {
      for (let j = 0; j < x.cols; j++) x.grad[i * x.cols + j] += g[j] / x.rows;
    }
  });
}

/**
 * Mean token cross-entropy from logits; targets equal to ignoreId are
 * skipped.  Seeds its own gradient (softmax minus one-hot, scaled), so
 * the returned loss is a plain number and the tape needs no scalar root.
 */
export function crossEntropy(
  logits: Mat,
  targets: ArrayLike<number>,
  ignoreId: number,
  lossScale: number,
): { loss: number; tokens: number } {
  const n = logits.cols;
  let loss = 0;
  let tokens = 0;
  const rows: number[] = [];
  for (let i = 0; i < logits.rows; i++) {
    if (targets[i] === ignoreId) continue;
    rows.push(i);
    tokens += 1;
    const row = i * n;
    let max = -Infinity;
    for (let j = 0; j < n; j++) if (logits.data[row + j] > max) max = logits.data[row + j];
    let sum = 0;
    for (let j = 0; j < n; j++) sum += Math.exp(logits.data[row + j] - max);
    loss += Math.log(sum) + max - logits.data[row + targets[i]];
  }
  if (activeTape && rows.length) {
    logits.ensureGrad();
    activeTape.record(() => {
      const g = logits.grad!;
      for (const i of rows) {
        const row = i * n;
        let max = -Infinity;
        for (let j = 0; j < n; j++) if (logits.data[row + j] > max) max = logits.data[row + j];
        let sum = 0;
        for (let j = 0; j < n; j++) sum += Math.exp(logits.data[row + j] - max);
        for (let j = 0; j < n; j++) {
          const p = Math.exp(logits.data[row + j] - max) / sum;
          g[row + j] += (p - (j === targets[i] ? 1 : 0)) * lossScale;
        }
      }
    });
  }
  return { loss, tokens };
}
