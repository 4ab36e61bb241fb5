/**
 * Single-file checkpoints: model config, vocabulary, parameters
 * (base64 float32), and the best validation metric.  The config hash is
 * verified at load so a checkpoint cannot silently drive a model of a
 * different shape.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { ModelDims, ParamStore } from "./model.js";
import { fnv1a32 } from "./rng.js";

export interface CheckpointMeta {
  kind: "generator" | "classifier";
  dims: ModelDims;
  vocabTokens: string[];
  classifierMode?: string;
  step: number;
  bestMetric: number;
}

interface CheckpointFile extends CheckpointMeta {
  configHash: number;
  params: Record<string, string>;
}

function configHash(meta: CheckpointMeta): number {
  return fnv1a32(
    JSON.stringify([meta.kind, meta.dims, meta.vocabTokens, meta.classifierMode ?? null]),
  );
}

export function snapshotParams(store: ParamStore): Map<string, Float32Array> {
  const snapshot = new Map<string, Float32Array>();
  for (const [name, mat] of store.params) snapshot.set(name, mat.data.slice());
  return snapshot;
}

export function restoreParams(store: ParamStore, snapshot: Map<string, Float32Array>): void {
  for (const [name, data] of snapshot) {
    const mat = store.params.get(name);
    if (!mat || mat.data.length !== data.length) {
      throw new Error(`parameter mismatch restoring ${name}`);
    }
    mat.data.set(data);
  }
}

function encodeF32(data: Float32Array): string {
  return Buffer.from(data.buffer, data.byteOffset, data.byteLength).toString("base64");
}

function decodeF32(text: string): Float32Array {
  const buffer = Buffer.from(text, "base64");
  return new Float32Array(buffer.buffer, buffer.byteOffset, buffer.byteLength / 4).slice();
}

export function saveCheckpoint(
  path: string,
  meta: CheckpointMeta,
  params: Map<string, Float32Array>,
): void {
  const record: CheckpointFile = {
    ...meta,
    configHash: configHash(meta),
    params: Object.fromEntries([...params].map(([name, data]) => [name, encodeF32(data)])),
  };
  writeFileSync(path, JSON.stringify(record));
}

export function loadCheckpoint(path: string): {
  meta: CheckpointMeta;
  params: Map<string, Float32Array>;
} {
  const record = JSON.parse(readFileSync(path, "utf-8")) as CheckpointFile;
  const { params, configHash: storedHash, ...meta } = record;
  if (configHash(meta) !== storedHash) {
    throw new Error(`${path}: config hash mismatch`);
  }
  return {
    meta,
    params: new Map(Object.entries(params).map(([name, text]) => [name, decodeF32(text)])),
  };
}
