/**
 * Closed token vocabulary built from corpus files, plus the special ids
 * the models need.  Unknown test tokens map to UNK so out-of-vocabulary
 * quadrants stay scorable.
 */

import { Example, tokenize } from "./data.js";

export const PAD = "<pad>";
export const BOS = "<bos>";
export const EOS = "<eos>";
export const SEP = "<sep>";
export const UNK = "<unk>";
const SPECIALS = [PAD, BOS, EOS, SEP, UNK];

export class Vocab {
  readonly tokens: string[];
  private readonly ids: Map<string, number>;

  constructor(tokens: string[]) {
    this.tokens = tokens;
    this.ids = new Map(tokens.map((t, i) => [t, i]));
  }

  static build(examples: Example[]): Vocab {
    const seen = new Set<string>();
    for (const example of examples) {
      for (const text of [example.premise, example.hypothesis, example.explanation]) {
        for (const token of tokenize(text)) seen.add(token);
      }
    }
    return new Vocab([...SPECIALS, ...[...seen].sort()]);
  }

  get size(): number {
    return this.tokens.length;
  }

  id(token: string): number {
    return this.ids.get(token) ?? this.ids.get(UNK)!;
  }

  encode(tokens: string[]): number[] {
    return tokens.map((t) => this.id(t));
  }

  decode(ids: number[]): string[] {
    return ids.map((i) => this.tokens[i] ?? UNK);
  }

  get padId(): number {
    return this.ids.get(PAD)!;
  }
  get bosId(): number {
    return this.ids.get(BOS)!;
  }
  get eosId(): number {
    return this.ids.get(EOS)!;
  }
  get sepId(): number {
    return this.ids.get(SEP)!;
  }
  get unkId(): number {
    return this.ids.get(UNK)!;
  }
}

/** Encoder input: premise <sep> hypothesis, optionally <sep> explanation. */
export function sourceIds(
  vocab: Vocab,
  example: Example,
  withExplanation = false,
  explanation?: string,
): number[] {
  const ids = vocab.encode(tokenize(example.premise));
  ids.push(vocab.sepId);
  ids.push(...vocab.encode(tokenize(example.hypothesis)));
  if (withExplanation) {
    ids.push(vocab.sepId);
    ids.push(...vocab.encode(tokenize(explanation ?? example.explanation)));
  }
  return ids;
}

/** Decoder target: <bos> explanation <eos>. */
export function targetIds(vocab: Vocab, example: Example): number[] {
  return [vocab.bosId, ...vocab.encode(tokenize(example.explanation)), vocab.eosId];
}
