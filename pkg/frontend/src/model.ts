/**
 * Small pre-norm encoder-decoder transformer and an encoder classifier,
 * built on the matrix tape.  The decoder self-attention limits every
 * query row to the key prefix at or before it, so position t logits are
 * a function of the source and targets <= t only, in both training and
 * greedy decoding.
 */

import {
  Mat,
  add,
  addRow,
  concatCols,
  crossEntropy,
  dropout,
  embed,
  layerNorm,
  matmul,
  matmulT,
  meanRows,
  relu,
  scale,
  sliceCols,
  softmaxRows,
} from "./tensor.js";
import { Rng } from "./rng.js";

export interface ModelDims {
  dModel: number;
  nHeads: number;
  ffn: number;
  encLayers: number;
  decLayers: number;
  maxSrc: number;
  maxTgt: number;
}

export const DEFAULT_DIMS: ModelDims = {
  dModel: 64,
  nHeads: 2,
  ffn: 128,
  encLayers: 2,
  decLayers: 2,
  maxSrc: 48,
  maxTgt: 48,
};

export class ParamStore {
  readonly params = new Map<string, Mat>();

  constructor(private readonly rng: Rng) {}

  matrix(name: string, rows: number, cols: number, std = 0.02): Mat {
    const mat = new Mat(rows, cols);
    if (std > 0) {
      for (let i = 0; i < mat.data.length; i++) mat.data[i] = this.rng.gaussian() * std;
    }
    this.params.set(name, mat);
    return mat;
  }

  ones(name: string, cols: number): Mat {
    const mat = new Mat(1, cols);
    mat.data.fill(1);
    this.params.set(name, mat);
    return mat;
  }

  zeros(name: string, rows: number, cols: number): Mat {
    const mat = new Mat(rows, cols);
    this.params.set(name, mat);
    return mat;
  }

  list(): Mat[] {
    return [...this.params.values()];
  }
}

interface Linear {
  w: Mat;
  b: Mat;
}

function linearParams(store: ParamStore, name: string, dIn: number, dOut: number): Linear {
  return {
    w: store.matrix(`${name}.w`, dIn, dOut),
    b: store.zeros(`${name}.b`, 1, dOut),
  };
}

function linear(x: Mat, layer: Linear): Mat {
  return addRow(matmul(x, layer.w), layer.b);
}

interface NormParams {
  g: Mat;
  b: Mat;
}

function normParams(store: ParamStore, name: string, d: number): NormParams {
  return { g: store.ones(`${name}.g`, d), b: store.zeros(`${name}.b`, 1, d) };
}

interface AttentionParams {
  q: Linear;
  k: Linear;
  v: Linear;
  o: Linear;
}

function attentionParams(store: ParamStore, name: string, d: number): AttentionParams {
  return {
    q: linearParams(store, `${name}.q`, d, d),
    k: linearParams(store, `${name}.k`, d, d),
    v: linearParams(store, `${name}.v`, d, d),
    o: linearParams(store, `${name}.o`, d, d),
  };
}

function attend(
  params: AttentionParams,
  nHeads: number,
  queries: Mat,
  keysValues: Mat,
  causal: boolean,
): Mat {
  const d = queries.cols;
  const dHead = d / nHeads;
  const q = linear(queries, params.q);
  const k = linear(keysValues, params.k);
  const v = linear(keysValues, params.v);
  const keyLen = keysValues.rows;
  const valid = causal
    ? (row: number) => Math.min(row + 1 + (keyLen - queries.rows), keyLen)
    : () => keyLen;
  const heads: Mat[] = [];
  for (let h = 0; h < nHeads; h++) {
    const qh = sliceCols(q, h * dHead, dHead);
    const kh = sliceCols(k, h * dHead, dHead);
    const vh = sliceCols(v, h * dHead, dHead);
    const scores = scale(matmulT(qh, kh), 1 / Math.sqrt(dHead));
    const weights = softmaxRows(scores, valid);
    heads.push(matmul(weights, vh));
  }
  return linear(concatCols(heads), params.o);
}

interface EncoderLayer {
  norm1: NormParams;
  attention: AttentionParams;
  norm2: NormParams;
  up: Linear;
  down: Linear;
}

interface DecoderLayer extends EncoderLayer {
  norm3: NormParams;
  cross: AttentionParams;
}

function feedForward(x: Mat, layer: { up: Linear; down: Linear }): Mat {
  return linear(relu(linear(x, layer.up)), layer.down);
}

export class Encoder {
  readonly layers: EncoderLayer[] = [];
  readonly tokenEmb: Mat;
  readonly posEmb: Mat;
  readonly finalNorm: NormParams;

  constructor(
    store: ParamStore,
    prefix: string,
    readonly dims: ModelDims,
    vocabSize: number,
    sharedTokenEmb?: Mat,
  ) {
    this.tokenEmb = sharedTokenEmb ?? store.matrix(`${prefix}.tok`, vocabSize, dims.dModel);
    this.posEmb = store.matrix(`${prefix}.pos`, dims.maxSrc, dims.dModel);
    for (let l = 0; l < dims.encLayers; l++) {
      const name = `${prefix}.${l}`;
      this.layers.push({
        norm1: normParams(store, `${name}.n1`, dims.dModel),
        attention: attentionParams(store, `${name}.attn`, dims.dModel),
        norm2: normParams(store, `${name}.n2`, dims.dModel),
        up: linearParams(store, `${name}.up`, dims.dModel, dims.ffn),
        down: linearParams(store, `${name}.down`, dims.ffn, dims.dModel),
      });
    }
    this.finalNorm = normParams(store, `${prefix}.nf`, dims.dModel);
  }

  forward(ids: number[]): Mat {
    const clipped = ids.slice(0, this.dims.maxSrc);
    const positions = clipped.map((_, i) => i);
    let x = dropout(add(embed(this.tokenEmb, clipped), embed(this.posEmb, positions)));
    for (const layer of this.layers) {
      const normed = layerNorm(x, layer.norm1.g, layer.norm1.b);
      x = add(x, dropout(attend(layer.attention, this.dims.nHeads, normed, normed, false)));
      x = add(x, dropout(feedForward(layerNorm(x, layer.norm2.g, layer.norm2.b), layer)));
    }
    return layerNorm(x, this.finalNorm.g, this.finalNorm.b);
  }
}

export class Decoder {
  readonly layers: DecoderLayer[] = [];
  readonly tokenEmb: Mat;
  readonly posEmb: Mat;
  readonly finalNorm: NormParams;
  readonly outBias: Mat;

  constructor(
    store: ParamStore,
    prefix: string,
    readonly dims: ModelDims,
    vocabSize: number,
    sharedTokenEmb?: Mat,
  ) {
    this.tokenEmb = sharedTokenEmb ?? store.matrix(`${prefix}.tok`, vocabSize, dims.dModel);
    this.posEmb = store.matrix(`${prefix}.pos`, dims.maxTgt, dims.dModel);
    for (let l = 0; l < dims.decLayers; l++) {
      const name = `${prefix}.${l}`;
      this.layers.push({
        norm1: normParams(store, `${name}.n1`, dims.dModel),
        attention: attentionParams(store, `${name}.attn`, dims.dModel),
        norm3: normParams(store, `${name}.n3`, dims.dModel),
        cross: attentionParams(store, `${name}.cross`, dims.dModel),
        norm2: normParams(store, `${name}.n2`, dims.dModel),
        up: linearParams(store, `${name}.up`, dims.dModel, dims.ffn),
        down: linearParams(store, `${name}.down`, dims.ffn, dims.dModel),
      });
    }
    this.finalNorm = normParams(store, `${prefix}.nf`, dims.dModel);
    this.outBias = store.zeros(`${prefix}.outb`, 1, vocabSize);
  }

  /** Output projection tied to the token embedding, so a learned copy
   * circuit generalizes to content words unseen during training. */
  project(hidden: Mat): Mat {
    return addRow(matmulT(hidden, this.tokenEmb), this.outBias);
  }

  /** Final hidden states for target positions, causally masked. */
  hidden(targetIds: number[], encoded: Mat): Mat {
    const positions = targetIds.map((_, i) => i);
    let x = dropout(add(embed(this.tokenEmb, targetIds), embed(this.posEmb, positions)));
    for (const layer of this.layers) {
      const normed = layerNorm(x, layer.norm1.g, layer.norm1.b);
      x = add(x, dropout(attend(layer.attention, this.dims.nHeads, normed, normed, true)));
      x = add(
        x,
        dropout(
          attend(layer.cross, this.dims.nHeads, layerNorm(x, layer.norm3.g, layer.norm3.b), encoded, false),
        ),
      );
      x = add(x, dropout(feedForward(layerNorm(x, layer.norm2.g, layer.norm2.b), layer)));
    }
    return layerNorm(x, this.finalNorm.g, this.finalNorm.b);
  }

  /** Teacher-forced vocabulary logits for every target position. */
  forward(targetIds: number[], encoded: Mat): Mat {
    return this.project(this.hidden(targetIds, encoded));
  }
}

export class Generator {
  readonly store: ParamStore;
  readonly encoder: Encoder;
  readonly decoder: Decoder;

  constructor(readonly dims: ModelDims, readonly vocabSize: number, rng: Rng) {
    this.store = new ParamStore(rng);
    const shared = this.store.matrix("tok", vocabSize, dims.dModel);
    this.encoder = new Encoder(this.store, "enc", dims, vocabSize, shared);
    this.decoder = new Decoder(this.store, "dec", dims, vocabSize, shared);
  }

  /** Summed next-token cross-entropy for one example; grad scaled by lossScale. */
  exampleLoss(src: number[], tgt: number[], lossScale: number): { loss: number; tokens: number } {
    const clipped = tgt.slice(0, this.dims.maxTgt + 1);
    const input = clipped.slice(0, -1);
    const expected = clipped.slice(1);
    const logits = this.decoder.forward(input, this.encoder.forward(src));
    return crossEntropy(logits, expected, -1, lossScale);
  }

  /** Greedy decode: token ids after BOS, stopping at EOS (excluded). */
  greedyDecode(src: number[], bosId: number, eosId: number, maxLen = 64): number[] {
    const encoded = this.encoder.forward(src);
    const ids = [bosId];
    const out: number[] = [];
    const horizon = Math.min(maxLen, this.dims.maxTgt - 1);
    for (let step = 0; step < horizon; step++) {
      const hidden = this.decoder.hidden(ids, encoded);
      const d = this.dims.dModel;
      const last = new Mat(1, d, hidden.data.subarray((ids.length - 1) * d, ids.length * d));
      const logits = this.decoder.project(last);
      let best = 0;
      let bestVal = -Infinity;
      for (let j = 0; j < this.vocabSize; j++) {
        if (logits.data[j] > bestVal) {
          bestVal = logits.data[j];
          best = j;
        }
      }
      if (best === eosId) break;
      out.push(best);
      ids.push(best);
    }
    return out;
  }
}

export class Classifier {
  readonly store: ParamStore;
  readonly encoder: Encoder;
  readonly head: Linear;

  constructor(readonly dims: ModelDims, readonly vocabSize: number, rng: Rng) {
    this.store = new ParamStore(rng);
    this.encoder = new Encoder(this.store, "enc", dims, vocabSize);
    this.head = linearParams(this.store, "head", dims.dModel, 2);
  }

  logits(src: number[]): Mat {
    return linear(meanRows(this.encoder.forward(src)), this.head);
  }

  exampleLoss(src: number[], label: number, lossScale: number): number {
    return crossEntropy(this.logits(src), [label], -1, lossScale).loss;
  }

  predict(src: number[]): number {
    const logits = this.logits(src);
    return logits.data[1] > logits.data[0] ? 1 : 0;
  }
}
