/**
 * Write the 10-frame sample video used by the bridge tests.
 *
 * Frames are 160x120 on a dark background. A "red box" blob occupies
 * frames 6-8 and a "blue disk" blob frame 3; blob colors come from the same
 * name-to-hue mapping the detector uses, so detection is exact by
 * construction. Also writes video.srt and targets.json so the search engine
 * can run end to end against this directory.
 */

import * as fs from "fs";
import * as path from "path";

import { nameHue } from "../src/detector";
import { RgbImage, encodePpm, frameFileName } from "../src/video";

const WIDTH = 160;
const HEIGHT = 120;
const FRAME_COUNT = 10;
const FPS = 2;

export const TARGET_NAME = "red box";
export const CUE_NAME = "blue disk";
export const TARGET_FRAMES = [6, 7, 8];
export const CUE_FRAMES = [3];

function hsvToRgb(h: number, s: number, v: number): [number, number, number] {
  const c = v * s;
  const hp = h / 60;
  const x = c * (1 - Math.abs((hp % 2) - 1));
  let rgb: [number, number, number];
  if (hp < 1) rgb = [c, x, 0];
  else if (hp < 2) rgb = [x, c, 0];
  else if (hp < 3) rgb = [0, c, x];
  else if (hp < 4) rgb = [0, x, c];
  else if (hp < 5) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  const m = v - c;
  return [
    Math.round((rgb[0] + m) * 255),
    Math.round((rgb[1] + m) * 255),
    Math.round((rgb[2] + m) * 255),
  ];
}

function blankFrame(): RgbImage {
  const data = new Uint8Array(WIDTH * HEIGHT * 3);
  data.fill(30); // dark gray, zero saturation: invisible to the detector
  return { width: WIDTH, height: HEIGHT, data };
}

function paintRect(image: RgbImage, x0: number, y0: number, w: number, h: number, name: string): void {
  const [r, g, b] = hsvToRgb(nameHue(name), 0.9, 0.9);
  for (let y = y0; y < y0 + h; y++) {
    for (let x = x0; x < x0 + w; x++) {
      const i = (y * image.width + x) * 3;
      image.data[i] = r;
      image.data[i + 1] = g;
      image.data[i + 2] = b;
    }
  }
}

export function writeSampleVideo(dir: string): void {
  fs.mkdirSync(dir, { recursive: true });
  for (let f = 0; f < FRAME_COUNT; f++) {
    const frame = blankFrame();
    if (TARGET_FRAMES.includes(f)) paintRect(frame, 55, 40, 48, 36, TARGET_NAME);
    if (CUE_FRAMES.includes(f)) paintRect(frame, 20, 20, 40, 40, CUE_NAME);
    fs.writeFileSync(path.join(dir, frameFileName(f)), encodePpm(frame));
  }
  fs.writeFileSync(
    path.join(dir, "meta.json"),
    JSON.stringify({ width: WIDTH, height: HEIGHT, frame_count: FRAME_COUNT, fps: FPS }, null, 2) + "\n"
  );
  // Subtitle and targets files so the engine can search this video directly.
  fs.writeFileSync(
    path.join(dir, "video.srt"),
    "1\n00:00:00,500 --> 00:00:01,500\nsoft piano music continues\n\n" +
      "2\n00:00:03,000 --> 00:00:04,500\nsee the red box appear by the blue disk\n\n"
  );
  fs.writeFileSync(
    path.join(dir, "targets.json"),
    JSON.stringify({ targets: [TARGET_NAME], cues: [CUE_NAME] }, null, 2) + "\n"
  );
}

if (require.main === module) {
  const dir = process.argv[2];
  if (!dir) {
    process.stderr.write("usage: make-sample-video.js OUTPUT_DIR\n");
    process.exit(2);
  }
  writeSampleVideo(dir);
  process.stdout.write(`sample video written to ${dir}\n`);
}
