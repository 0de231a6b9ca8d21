/**
 * Deterministic sentence encoder: token counts hashed into a fixed number
 * of buckets, L2-normalized. Stateless and dependency-free, so embeddings
 * are reproducible across sessions; cosine similarity reduces to a dot
 * product for the engine on the other side of the wire.
 */

export const ENCODER_DIM = 64;

export function fnv1a32(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function tokenize(text: string): string[] {
  const matches = text.toLowerCase().match(/[a-z0-9]+/g);
  return matches ?? [];
}

export class HashedTextEncoder {
  readonly dim: number;

  constructor(dim: number = ENCODER_DIM) {
    this.dim = dim;
  }

  embedOne(text: string): number[] {
    const vec = new Array<number>(this.dim).fill(0);
    for (const token of tokenize(text)) {
      vec[fnv1a32(token) % this.dim]! += 1;
    }
    let norm = 0;
    for (const x of vec) norm += x * x;
    norm = Math.sqrt(norm);
    if (norm > 0) {
      for (let i = 0; i < vec.length; i++) vec[i]! /= norm;
    }
    return vec;
  }

  embed(texts: string[]): number[][] {
    return texts.map((t) => this.embedOne(t));
  }
}
