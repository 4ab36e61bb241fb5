/**
 * Training loops: teacher-forced explanation generator and the sequence
 * classifier (explain-then-predict or label-only).  Both keep the
 * parameters with the best validation metric seen on the eval schedule.
 */

import { Adam } from "./adam.js";
import { corpusBleu } from "./bleu.js";
import { CheckpointMeta, restoreParams, snapshotParams } from "./checkpoint.js";
import { Example, tokenize } from "./data.js";
import { Classifier, DEFAULT_DIMS, Generator, ModelDims } from "./model.js";
import { Rng, streamFromSeed } from "./rng.js";
import { Tape, withDropout, withTape } from "./tensor.js";
import { PAD, BOS, EOS, SEP, UNK, Vocab, sourceIds, targetIds } from "./vocab.js";

export interface GeneratorTrainConfig {
  dims: ModelDims;
  steps: number;
  batchSize: number;
  lr: number;
  dropout: number;
  evalEvery: number;
  devEvalLimit: number;
  maxDecodeLen: number;
  seed: number;
  /**
   * Probability of rewriting a training example with a consistent random
   * substitution of its source tokens (same map applied to the target).
   * Forces the decoder to copy content from the source by position
   * instead of memorizing token identities, which is what lets unseen
   * bindings of a known template decode exactly.
   */
  augmentSubstitution: number;
  /** Optional early exit once dev BLEU reaches this value. */
  stopAtDevBleu?: number;
}

export const GENERATOR_DEFAULTS: GeneratorTrainConfig = {
  dims: DEFAULT_DIMS,
  steps: 2000,
  batchSize: 16,
  lr: 1e-3,
  dropout: 0.1,
  augmentSubstitution: 0.5,
  evalEvery: 200,
  devEvalLimit: 64,
  maxDecodeLen: 64,
  seed: 0,
};

export type ClassifierMode = "explain_then_predict" | "label_only" | "no_training";

export interface ClassifierTrainConfig {
  dims: ModelDims;
  steps: number;
  batchSize: number;
  lr: number;
  dropout: number;
  evalEvery: number;
  seed: number;
}

export function classifierDefaults(mode: ClassifierMode): ClassifierTrainConfig {
  const base = { dims: DEFAULT_DIMS, batchSize: 128, lr: 1e-3, dropout: 0.1, seed: 0 };
  if (mode === "label_only") return { ...base, steps: 1000, evalEvery: 50 };
  if (mode === "no_training") return { ...base, steps: 0, evalEvery: 1 };
  return { ...base, steps: 200, evalEvery: 4 };
}

export interface TrainedGenerator {
  model: Generator;
  vocab: Vocab;
  meta: CheckpointMeta;
  params: Map<string, Float32Array>;
  history: Array<{ step: number; devBleu: number }>;
}

function labelIndex(example: Example): number {
  return example.label === "non_entailment" ? 1 : 0;
}

class Batcher {
  private order: number[] = [];
  private cursor = 0;
  private epoch = 0;

  constructor(private readonly size: number, private readonly rng: Rng) {}

  next(batch: number): number[] {
    const out: number[] = [];
    while (out.length < batch) {
      if (this.cursor >= this.order.length) {
        this.order = Array.from({ length: this.size }, (_, i) => i);
        this.rng.fork(`epoch:${this.epoch}`).shuffle(this.order);
        this.epoch += 1;
        this.cursor = 0;
      }
      out.push(this.order[this.cursor]);
      this.cursor += 1;
    }
    return out;
  }
}

export function decodeExplanations(
  model: Generator,
  vocab: Vocab,
  examples: Example[],
  maxLen = 64,
): string[] {
  return examples.map((example) => {
    const ids = model.greedyDecode(
      sourceIds(vocab, example),
      vocab.bosId,
      vocab.eosId,
      maxLen,
    );
    return vocab.decode(ids).join(" ");
  });
}

/** Round-robin over templates (first example of each, then second, ...)
 * so trimmed dev evaluations cover the same template mix at every k. */
export function evenTemplateSample(examples: Example[], limit: number): Example[] {
  const byTemplate = new Map<string, Example[]>();
  for (const example of examples) {
    const bucket = byTemplate.get(example.template_id);
    if (bucket) bucket.push(example);
    else byTemplate.set(example.template_id, [example]);
  }
  const buckets = [...byTemplate.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([, bucket]) => bucket);
  const sample: Example[] = [];
  for (let round = 0; sample.length < limit; round++) {
    let advanced = false;
    for (const bucket of buckets) {
      if (round < bucket.length && sample.length < limit) {
        sample.push(bucket[round]);
        advanced = true;
      }
    }
    if (!advanced) break;
  }
  return sample;
}

export function generatorDevBleu(
  model: Generator,
  vocab: Vocab,
  dev: Example[],
  limit: number,
  maxLen: number,
): number {
  const sample = evenTemplateSample(dev, limit);
  const candidates = decodeExplanations(model, vocab, sample, maxLen).map((text) =>
    text.length ? text.split(" ") : [],
  );
  const references = sample.map((example) => tokenize(example.explanation));
  return corpusBleu(candidates, references);
}

export function trainGenerator(
  train: Example[],
  dev: Example[],
  config: GeneratorTrainConfig = GENERATOR_DEFAULTS,
): TrainedGenerator {
  if (!train.length) throw new Error("empty training corpus");
  if (!dev.length) throw new Error("empty dev corpus");
  const vocab = Vocab.build([...train, ...dev]);
  const model = new Generator(config.dims, vocab.size, streamFromSeed(config.seed, "gen-init"));
  const sources = train.map((example) => sourceIds(vocab, example));
  const targets = train.map((example) => targetIds(vocab, example));
  const optimizer = new Adam(model.store.list(), config.lr);
  const batcher = new Batcher(train.length, streamFromSeed(config.seed, "gen-batch"));
  const noise = streamFromSeed(config.seed, "gen-dropout");
  const random = () => noise.next();
  const augmentRng = streamFromSeed(config.seed, "gen-augment");
  const structural = new Set(
    [PAD, BOS, EOS, SEP, UNK, ".", ","].map((t) => vocab.id(t)),
  );
  const substitutable = Array.from({ length: vocab.size }, (_, i) => i).filter(
    (i) => !structural.has(i),
  );

  const substituted = (src: number[], tgt: number[]): [number[], number[]] => {
    const fromIds = [...new Set(src)].filter((i) => !structural.has(i));
    const pool = [...substitutable];
    augmentRng.shuffle(pool);
    const map = new Map(fromIds.map((id, i) => [id, pool[i]]));
    const rewrite = (ids: number[]) => ids.map((id) => map.get(id) ?? id);
    return [rewrite(src), rewrite(tgt)];
  };

  let best = { bleu: -1, step: 0, params: snapshotParams(model.store) };
  const history: Array<{ step: number; devBleu: number }> = [];

  const evaluate = (step: number) => {
    const devBleu = generatorDevBleu(model, vocab, dev, config.devEvalLimit, config.maxDecodeLen);
    history.push({ step, devBleu });
    if (devBleu > best.bleu) {
      best = { bleu: devBleu, step, params: snapshotParams(model.store) };
    }
    return devBleu;
  };

  for (let step = 1; step <= config.steps; step++) {
    const batch = batcher.next(config.batchSize);
    const totalTokens = batch.reduce((n, i) => n + targets[i].length - 1, 0);
    const tape = new Tape();
    let loss = 0;
    withTape(tape, () =>
      withDropout(random, config.dropout, () => {
        for (const i of batch) {
          let src = sources[i];
          let tgt = targets[i];
          if (augmentRng.next() < config.augmentSubstitution) {
            [src, tgt] = substituted(src, tgt);
          }
          loss += model.exampleLoss(src, tgt, 1 / totalTokens).loss;
        }
      }),
    );
    loss /= totalTokens;
    if (!Number.isFinite(loss)) {
      throw new Error(`nonfinite generator loss ${loss} at step ${step}`);
    }
    tape.backward();
    optimizer.step();
    optimizer.zeroGrad();
    if (step % config.evalEvery === 0 || step === config.steps) {
      const devBleu = evaluate(step);
      if (config.stopAtDevBleu !== undefined && devBleu >= config.stopAtDevBleu) break;
    }
  }
  if (!history.length) evaluate(0);
  restoreParams(model.store, best.params);
  return {
    model,
    vocab,
    meta: {
      kind: "generator",
      dims: config.dims,
      vocabTokens: vocab.tokens,
      step: best.step,
      bestMetric: best.bleu,
    },
    params: best.params,
    history,
  };
}

export interface TrainedClassifier {
  model: Classifier;
  vocab: Vocab;
  meta: CheckpointMeta;
  params: Map<string, Float32Array>;
  history: Array<{ step: number; devAccuracy: number }>;
}

export function classifierAccuracy(
  model: Classifier,
  vocab: Vocab,
  examples: Example[],
  withExplanation: boolean,
  explanations?: Map<string, string>,
): number {
  if (!examples.length) return 0;
  let correct = 0;
  for (const example of examples) {
    const src = sourceIds(vocab, example, withExplanation, explanations?.get(example.id));
    correct += model.predict(src) === labelIndex(example) ? 1 : 0;
  }
  return correct / examples.length;
}

export function trainClassifier(
  train: Example[],
  dev: Example[],
  mode: ClassifierMode,
  config?: ClassifierTrainConfig,
): TrainedClassifier {
  if (!train.length) throw new Error("empty training corpus");
  if (!dev.length) throw new Error("empty dev corpus");
  const cfg = config ?? classifierDefaults(mode);
  const withExplanation = mode === "explain_then_predict";
  const vocab = Vocab.build([...train, ...dev]);
  const model = new Classifier(cfg.dims, vocab.size, streamFromSeed(cfg.seed, "cls-init"));
  const sources = train.map((example) => sourceIds(vocab, example, withExplanation));
  const labels = train.map(labelIndex);
  const optimizer = new Adam(model.store.list(), cfg.lr);
  const batcher = new Batcher(train.length, streamFromSeed(cfg.seed, "cls-batch"));
  const noise = streamFromSeed(cfg.seed, "cls-dropout");
  const random = () => noise.next();

  let best = { accuracy: -1, step: 0, params: snapshotParams(model.store) };
  const history: Array<{ step: number; devAccuracy: number }> = [];
  const evaluate = (step: number) => {
    const devAccuracy = classifierAccuracy(model, vocab, dev, withExplanation);
    history.push({ step, devAccuracy });
    if (devAccuracy > best.accuracy) {
      best = { accuracy: devAccuracy, step, params: snapshotParams(model.store) };
    }
  };

  const steps = mode === "no_training" ? 0 : cfg.steps;
  for (let step = 1; step <= steps; step++) {
    const batch = batcher.next(cfg.batchSize);
    const tape = new Tape();
    let loss = 0;
    withTape(tape, () =>
      withDropout(random, cfg.dropout, () => {
        for (const i of batch) {
          loss += model.exampleLoss(sources[i], labels[i], 1 / batch.length);
        }
      }),
    );
    loss /= batch.length;
    if (!Number.isFinite(loss)) {
      throw new Error(`nonfinite classifier loss ${loss} at step ${step}`);
    }
    tape.backward();
    optimizer.step();
    optimizer.zeroGrad();
    if (step % cfg.evalEvery === 0 || step === steps) evaluate(step);
  }
  if (!history.length) evaluate(0);
  restoreParams(model.store, best.params);
  return {
    model,
    vocab,
    meta: {
      kind: "classifier",
      dims: cfg.dims,
      vocabTokens: vocab.tokens,
      classifierMode: mode,
      step: best.step,
      bestMetric: best.accuracy,
    },
    params: best.params,
    history,
  };
}
