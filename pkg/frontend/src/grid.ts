/**
 * Few-shot sweep over a corpus tree produced by the generator toolkit
 * (directories named k=<n> holding train/dev and the four quadrant
 * files).  Emits rows in the shared CSV schema: k,quadrant,metric,value.
 */

import { appendFileSync, existsSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { corpusBleu } from "./bleu.js";
import { Example, readExamples, tokenize } from "./data.js";
import { ModelDims, DEFAULT_DIMS } from "./model.js";
import {
  GENERATOR_DEFAULTS,
  classifierAccuracy,
  classifierDefaults,
  decodeExplanations,
  trainClassifier,
  trainGenerator,
} from "./train.js";

export const QUADRANTS = [
  "indvocab_indtemplate",
  "oodvocab_indtemplate",
  "indvocab_oodtemplate",
  "oodvocab_oodtemplate",
] as const;

export interface GridConfig {
  dataRoot: string;
  kValues: number[];
  outCsv: string;
  seed: number;
  dims: ModelDims;
  generatorSteps: number;
  evalLimit: number;
}

export const GRID_DEFAULTS: Omit<GridConfig, "dataRoot" | "outCsv"> = {
  kValues: [1, 2, 4, 8, 16],
  seed: 0,
  dims: DEFAULT_DIMS,
  generatorSteps: GENERATOR_DEFAULTS.steps,
  evalLimit: 128,
};

export interface GridRow {
  k: number;
  quadrant: string;
  metric: string;
  value: number;
}

export function runFewshotGrid(
  config: GridConfig,
  log: (message: string) => void = () => {},
): GridRow[] {
  const rows: GridRow[] = [];
  for (const k of config.kValues) {
    const kDir = join(config.dataRoot, `k=${k}`);
    const train = readExamples(join(kDir, "train.jsonl"));
    const dev = readExamples(join(kDir, "dev.jsonl"));
    log(`k=${k}: training generator on ${train.length} examples`);
    const generator = trainGenerator(train, dev, {
      ...GENERATOR_DEFAULTS,
      dims: config.dims,
      steps: config.generatorSteps,
      seed: config.seed,
    });
    const etp = trainClassifier(train, dev, "explain_then_predict", {
      ...classifierDefaults("explain_then_predict"),
      dims: config.dims,
      seed: config.seed,
    });
    const labelOnly = trainClassifier(train, dev, "label_only", {
      ...classifierDefaults("label_only"),
      dims: config.dims,
      seed: config.seed,
    });
    for (const quadrant of QUADRANTS) {
      const examples = readExamples(join(kDir, `test_${quadrant}.jsonl`)).slice(
        0,
        config.evalLimit,
      );
      const decoded = decodeExplanations(generator.model, generator.vocab, examples);
      const candidates = decoded.map((text) => (text.length ? text.split(" ") : []));
      const references = examples.map((example) => tokenize(example.explanation));
      const generated = new Map(examples.map((e, i) => [e.id, decoded[i]]));
      rows.push(
        { k, quadrant, metric: "gen_bleu", value: corpusBleu(candidates, references) },
        {
          k,
          quadrant,
          metric: "etp_accuracy",
          value: classifierAccuracy(etp.model, etp.vocab, examples, true, generated),
        },
        {
          k,
          quadrant,
          metric: "etp_gold_accuracy",
          value: classifierAccuracy(etp.model, etp.vocab, examples, true),
        },
        {
          k,
          quadrant,
          metric: "label_only_accuracy",
          value: classifierAccuracy(labelOnly.model, labelOnly.vocab, examples, false),
        },
      );
      log(`k=${k} ${quadrant}: done`);
    }
  }
  writeGridCsv(config.outCsv, rows);
  return rows;
}

export function writeGridCsv(path: string, rows: GridRow[]): void {
  if (!existsSync(path)) writeFileSync(path, "k,quadrant,metric,value\n");
  const sorted = [...rows].sort(
    (a, b) =>
      a.k - b.k ||
      a.quadrant.localeCompare(b.quadrant) ||
      a.metric.localeCompare(b.metric),
  );
  appendFileSync(
    path,
    sorted.map((r) => `${r.k},${r.quadrant},${r.metric},${r.value.toFixed(6)}`).join("\n") + "\n",
  );
}
