/**
 * Record the golden request/response transcript for protocol conformance.
 *
 * Replays a fixed request list through the service and stores both sides.
 * The replay test sends the same requests through a spawned server process
 * and compares: structure exactly, floating-point fields at 1e-4.
 */

import * as fs from "fs";

import { BridgeService } from "../src/server";
import { CUE_NAME, TARGET_NAME } from "./make-sample-video";

export function goldenRequests(): object[] {
  return [
    { op: "embed", texts: ["a", "a"] },
    { op: "embed", texts: [] },
    { op: "embed", texts: ["see the red box appear by the blue disk"] },
    { op: "detect", frames: [], vocabulary: [TARGET_NAME] },
    { op: "detect", frames: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9], vocabulary: [TARGET_NAME, CUE_NAME] },
    { op: "detect", frames: [6], vocabulary: [TARGET_NAME] },
    { op: "detect", frames: [0, 99], vocabulary: [TARGET_NAME] },
    { op: "detect", frames: [1, 2], vocabulary: [] },
    { op: "embed" },
    { op: "transcribe", frames: [1] },
  ];
}

export function recordGolden(videoDir: string): object[] {
  const service = new BridgeService({
    video: videoDir,
    gridSide: 4,
    listen: "stdio",
    detectorModel: "hue-blob-v1",
    encoderModel: "hashed-bow-64",
  });
  return goldenRequests().map((request) => ({
    request,
    response: service.handleLine(JSON.stringify(request)),
  }));
}

if (require.main === module) {
  const [videoDir, outPath] = process.argv.slice(2);
  if (!videoDir || !outPath) {
    process.stderr.write("usage: record-golden.js VIDEO_DIR OUTPUT_JSON\n");
    process.exit(2);
  }
  const transcript = recordGolden(videoDir);
  fs.writeFileSync(outPath, JSON.stringify(transcript, null, 2) + "\n");
  process.stdout.write(`recorded ${transcript.length} exchanges to ${outPath}\n`);
}
