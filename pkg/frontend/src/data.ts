/**
 * Interchange with the corpus toolkit: examples and predictions are
 * JSON-lines files whose schemas are owned by the generator package.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface Example {
  id: string;
  premise: string;
  hypothesis: string;
  explanation: string;
  label: "entailment" | "non_entailment";
  template_id: string;
  binding: Record<string, string>;
  vocab_condition: "ind" | "ood";
  template_condition: "ind" | "ood";
  split: "train" | "dev" | "test";
}

export interface Prediction {
  example_id: string;
  generated_explanation?: string;
  predicted_label?: "entailment" | "non_entailment";
}

/** Lowercase, split on whitespace, detach trailing punctuation (mirrors the corpus tokenizer). */
export function tokenize(text: string): string[] {
  const detach = new Set([".", ",", "!", "?"]);
  const out: string[] = [];
  for (let chunk of text.toLowerCase().split(/\s+/)) {
    if (!chunk) continue;
    const tail: string[] = [];
    while (chunk.length > 1 && detach.has(chunk[chunk.length - 1])) {
      tail.push(chunk[chunk.length - 1]);
      chunk = chunk.slice(0, -1);
    }
    out.push(chunk);
    for (let i = tail.length - 1; i >= 0; i--) out.push(tail[i]);
  }
  return out;
}

function parseLines<T>(path: string, check: (record: any, line: number) => T): T[] {
  const out: T[] = [];
  const text = readFileSync(path, "utf-8");
  let lineno = 0;
  for (const raw of text.split("\n")) {
    lineno += 1;
    const line = raw.trim();
    if (!line) continue;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${lineno}: invalid JSON (${err})`);
    }
    out.push(check(record, lineno));
  }
  return out;
}

const EXAMPLE_FIELDS = [
  "id", "premise", "hypothesis", "explanation", "label",
  "template_id", "binding", "vocab_condition", "template_condition", "split",
] as const;

export function readExamples(path: string): Example[] {
  return parseLines(path, (record, lineno) => {
    for (const field of EXAMPLE_FIELDS) {
      if (!(field in record)) {
        throw new Error(`${path}:${lineno}: missing field ${field}`);
      }
    }
    return record as Example;
  });
}

export function readPredictions(path: string): Prediction[] {
  return parseLines(path, (record, lineno) => {
    if (!("example_id" in record)) {
      throw new Error(`${path}:${lineno}: missing example_id`);
    }
    return record as Prediction;
  });
}

export function writePredictions(predictions: Prediction[], path: string): void {
  const lines = predictions.map((p) => {
    const record: Record<string, unknown> = { example_id: p.example_id };
    if (p.generated_explanation !== undefined) {
      record.generated_explanation = p.generated_explanation;
    }
    if (p.predicted_label !== undefined) record.predicted_label = p.predicted_label;
    return JSON.stringify(record);
  });
  writeFileSync(path, lines.length ? lines.join("\n") + "\n" : "");
}
