/**
 * End-to-end: the Python search engine drives this bridge through its
 * proc: backend spec and must exit 0 with keyframes near the planted blob.
 */

import assert from "node:assert/strict";
import { test } from "node:test";
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

const BRIDGE_ROOT = path.resolve(__dirname, "../..");
const REPO_ROOT = path.resolve(BRIDGE_ROOT, "..");
const SERVER = path.join(BRIDGE_ROOT, "dist/src/server.js");
const VIDEO = path.join(BRIDGE_ROOT, "fixtures/sample-video");

test("python engine completes a search through the bridge", () => {
  const outDir = fs.mkdtempSync(path.join(os.tmpdir(), "bridge-e2e-"));
  const resultPath = path.join(outDir, "result.json");
  const detectorSpec = `proc:node ${SERVER} --video ${VIDEO} --grid-side 4`;
  const encoderSpec = `proc:node ${SERVER}`;

  const run = spawnSync(
    "python3",
    [
      "-m", "kfsearch", "search",
      "--frames", "10",
      "--fps", "2",
      "--subtitles", path.join(VIDEO, "video.srt"),
      "--query", "when does the red box appear near the blue disk",
      "--targets", path.join(VIDEO, "targets.json"),
      "--detector", detectorSpec,
      "--encoder", encoderSpec,
      "--output", resultPath,
      "--frame-budget", "10",
      "--max-grid-side", "2",
      "--top-k", "2",
      "--text-weight", "0.5",
      "--seed", "1",
    ],
    {
      cwd: REPO_ROOT,
      env: { ...process.env, PYTHONPATH: path.join(REPO_ROOT, "src") },
      encoding: "utf-8",
      timeout: 120_000,
    }
  );

  assert.equal(
    run.status,
    0,
    `engine exited ${run.status}\nstdout: ${run.stdout}\nstderr: ${run.stderr}`
  );
  const result = JSON.parse(fs.readFileSync(resultPath, "utf-8"));
  assert.equal(result.keyframes.length, 2);
  assert.ok(["all_targets_found", "budget_exhausted", "frames_exhausted"].includes(result.termination));
  // The blob lives in frames 6-8; the top keyframe must land there.
  const top = result.keyframes[0].frame;
  assert.ok(top >= 6 && top <= 8, `top keyframe ${top} not in the planted range`);
});
