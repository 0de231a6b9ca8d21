import assert from "node:assert/strict";
import { test } from "node:test";

import { ENCODER_DIM, HashedTextEncoder, tokenize } from "../src/textEncoder";

const encoder = new HashedTextEncoder();

test("tokenize lowercases and splits on non-alphanumerics", () => {
  assert.deepEqual(tokenize("The RED-box, appears!"), ["the", "red", "box", "appears"]);
  assert.deepEqual(tokenize("..."), []);
});

test("identical texts embed identically", () => {
  const [a, b] = encoder.embed(["red box near the gate", "red box near the gate"]);
  assert.deepEqual(a, b);
});

test("vectors have the advertised dimension and unit norm", () => {
  const [vec] = encoder.embed(["some words here"]);
  assert.equal(vec!.length, ENCODER_DIM);
  const norm = Math.sqrt(vec!.reduce((s, x) => s + x * x, 0));
  assert.ok(Math.abs(norm - 1) < 1e-12);
});

test("empty text embeds to the zero vector, non-empty never does", () => {
  const [empty, word] = encoder.embed(["", "word"]);
  assert.ok(empty!.every((x) => x === 0));
  assert.ok(word!.some((x) => x !== 0));
});

test("shared tokens mean higher cosine", () => {
  const [query, match, filler] = encoder.embed([
    "when does the red box appear",
    "see the red box appear now",
    "soft piano music continues",
  ]);
  const dot = (a: number[], b: number[]) => a.reduce((s, x, i) => s + x * b[i]!, 0);
  assert.ok(dot(query!, match!) > 0.5);
  assert.ok(dot(query!, match!) > dot(query!, filler!));
});

test("embedding a batch preserves order", () => {
  const batch = encoder.embed(["alpha", "beta", "alpha"]);
  assert.deepEqual(batch[0], batch[2]);
  assert.notDeepEqual(batch[0], batch[1]);
});
