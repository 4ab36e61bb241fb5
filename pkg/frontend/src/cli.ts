/**
 * Harness CLI.  Consumes and produces the corpus toolkit's JSONL and
 * CSV formats only:
 *
 *   train-generator --train t.jsonl --dev d.jsonl --out ckpt.json
 *   generate        --checkpoint ckpt.json --input x.jsonl --out preds.jsonl
 *   train-classifier --mode etp|label-only|no-training --train t --dev d --out ckpt
 *   classify        --checkpoint ckpt.json --input x.jsonl --out preds.jsonl
 *                   [--explanations preds.jsonl | --gold-explanations]
 *   grid            --data-root runs/grid --k 1,4,16 --out harness_grid.csv
 */

import process from "node:process";

import { loadCheckpoint, restoreParams, saveCheckpoint } from "./checkpoint.js";
import { readExamples, readPredictions, writePredictions, Prediction } from "./data.js";
import { GRID_DEFAULTS, runFewshotGrid } from "./grid.js";
import { Classifier, DEFAULT_DIMS, Generator, ModelDims } from "./model.js";
import { Rng } from "./rng.js";
import {
  ClassifierMode,
  GENERATOR_DEFAULTS,
  classifierDefaults,
  decodeExplanations,
  trainClassifier,
  trainGenerator,
} from "./train.js";
import { Vocab, sourceIds } from "./vocab.js";

class Args {
  private readonly values = new Map<string, string>();
  private readonly flags = new Set<string>();

  constructor(argv: string[]) {
    for (let i = 0; i < argv.length; i++) {
      const arg = argv[i];
      if (!arg.startsWith("--")) throw new Error(`unexpected argument '${arg}'`);
      const name = arg.slice(2);
      if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        this.values.set(name, argv[i + 1]);
        i += 1;
      } else {
        this.flags.add(name);
      }
    }
  }

  require(name: string): string {
    const value = this.values.get(name);
    if (value === undefined) throw new Error(`missing required flag --${name}`);
    return value;
  }

  get(name: string): string | undefined {
    return this.values.get(name);
  }

  int(name: string, fallback: number): number {
    const value = this.values.get(name);
    return value === undefined ? fallback : parseInt(value, 10);
  }

  float(name: string, fallback: number): number {
    const value = this.values.get(name);
    return value === undefined ? fallback : parseFloat(value);
  }

  has(name: string): boolean {
    return this.flags.has(name);
  }
}

function dimsFrom(args: Args): ModelDims {
  return {
    ...DEFAULT_DIMS,
    dModel: args.int("d-model", DEFAULT_DIMS.dModel),
    nHeads: args.int("heads", DEFAULT_DIMS.nHeads),
    ffn: args.int("ffn", DEFAULT_DIMS.ffn),
    encLayers: args.int("layers", DEFAULT_DIMS.encLayers),
    decLayers: args.int("layers", DEFAULT_DIMS.decLayers),
  };
}

function cmdTrainGenerator(args: Args): void {
  const train = readExamples(args.require("train"));
  const dev = readExamples(args.require("dev"));
  const trained = trainGenerator(train, dev, {
    ...GENERATOR_DEFAULTS,
    dims: dimsFrom(args),
    steps: args.int("steps", GENERATOR_DEFAULTS.steps),
    batchSize: args.int("batch", GENERATOR_DEFAULTS.batchSize),
    lr: args.float("lr", GENERATOR_DEFAULTS.lr),
    evalEvery: args.int("eval-every", GENERATOR_DEFAULTS.evalEvery),
    devEvalLimit: args.int("dev-limit", GENERATOR_DEFAULTS.devEvalLimit),
    seed: args.int("seed", 0),
  });
  saveCheckpoint(args.require("out"), trained.meta, trained.params);
  for (const point of trained.history) {
    console.log(`step ${point.step}: dev bleu ${point.devBleu.toFixed(2)}`);
  }
  console.log(`best dev bleu ${trained.meta.bestMetric.toFixed(2)} at step ${trained.meta.step}`);
}

function generatorFrom(path: string): { model: Generator; vocab: Vocab } {
  const { meta, params } = loadCheckpoint(path);
  if (meta.kind !== "generator") throw new Error(`${path}: not a generator checkpoint`);
  const vocab = new Vocab(meta.vocabTokens);
  const model = new Generator(meta.dims, vocab.size, new Rng(0));
  restoreParams(model.store, params);
  return { model, vocab };
}

function classifierFrom(path: string): {
  model: Classifier;
  vocab: Vocab;
  mode: ClassifierMode;
} {
  const { meta, params } = loadCheckpoint(path);
  if (meta.kind !== "classifier") throw new Error(`${path}: not a classifier checkpoint`);
  const vocab = new Vocab(meta.vocabTokens);
  const model = new Classifier(meta.dims, vocab.size, new Rng(0));
  restoreParams(model.store, params);
  return { model, vocab, mode: (meta.classifierMode ?? "label_only") as ClassifierMode };
}

function cmdGenerate(args: Args): void {
  const { model, vocab } = generatorFrom(args.require("checkpoint"));
  const examples = readExamples(args.require("input"));
  const maxLen = args.int("max-len", 64);
  const decoded = decodeExplanations(model, vocab, examples, maxLen);
  writePredictions(
    examples.map((example, i) => ({
      example_id: example.id,
      generated_explanation: decoded[i],
    })),
    args.require("out"),
  );
  console.log(`wrote ${examples.length} explanations`);
}

function cmdTrainClassifier(args: Args): void {
  const modeFlag = args.get("mode") ?? "etp";
  const mode: ClassifierMode =
    modeFlag === "label-only"
      ? "label_only"
      : modeFlag === "no-training"
        ? "no_training"
        : "explain_then_predict";
  const train = readExamples(args.require("train"));
  const dev = readExamples(args.require("dev"));
  const defaults = classifierDefaults(mode);
  const trained = trainClassifier(train, dev, mode, {
    ...defaults,
    dims: dimsFrom(args),
    steps: args.int("steps", defaults.steps),
    batchSize: args.int("batch", defaults.batchSize),
    lr: args.float("lr", defaults.lr),
    evalEvery: args.int("eval-every", defaults.evalEvery),
    seed: args.int("seed", 0),
  });
  saveCheckpoint(args.require("out"), trained.meta, trained.params);
  console.log(
    `best dev accuracy ${trained.meta.bestMetric.toFixed(4)} at step ${trained.meta.step}`,
  );
}

function cmdClassify(args: Args): void {
  const { model, vocab, mode } = classifierFrom(args.require("checkpoint"));
  const examples = readExamples(args.require("input"));
  const withExplanation = mode === "explain_then_predict";
  let explanations: Map<string, string> | undefined;
  if (withExplanation && args.get("explanations")) {
    explanations = new Map(
      readPredictions(args.require("explanations"))
        .filter((p) => p.generated_explanation !== undefined)
        .map((p) => [p.example_id, p.generated_explanation!]),
    );
  } else if (withExplanation && !args.has("gold-explanations")) {
    throw new Error("explain-then-predict needs --explanations <file> or --gold-explanations");
  }
  const predictions: Prediction[] = examples.map((example) => {
    const src = sourceIds(vocab, example, withExplanation, explanations?.get(example.id));
    return {
      example_id: example.id,
      predicted_label: model.predict(src) === 1 ? "non_entailment" : "entailment",
    };
  });
  writePredictions(predictions, args.require("out"));
  console.log(`wrote ${predictions.length} predictions`);
}

function cmdGrid(args: Args): void {
  const kValues = (args.get("k") ?? GRID_DEFAULTS.kValues.join(","))
    .split(",")
    .map((v) => parseInt(v, 10));
  runFewshotGrid(
    {
      ...GRID_DEFAULTS,
      dataRoot: args.require("data-root"),
      outCsv: args.require("out"),
      kValues,
      seed: args.int("seed", GRID_DEFAULTS.seed),
      dims: dimsFrom(args),
      generatorSteps: args.int("steps", GRID_DEFAULTS.generatorSteps),
      evalLimit: args.int("eval-limit", GRID_DEFAULTS.evalLimit),
    },
    (message) => console.log(message),
  );
  console.log(`wrote ${args.require("out")}`);
}

const COMMANDS: Record<string, (args: Args) => void> = {
  "train-generator": cmdTrainGenerator,
  generate: cmdGenerate,
  "train-classifier": cmdTrainClassifier,
  classify: cmdClassify,
  grid: cmdGrid,
};

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  const handler = command ? COMMANDS[command] : undefined;
  if (!handler) {
    console.error(`usage: harness <${Object.keys(COMMANDS).join("|")}> [flags]`);
    return 1;
  }
  try {
    handler(new Args(rest));
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
