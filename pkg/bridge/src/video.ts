/**
 * Frame source: a decoded-frame directory, the bridge's video input format.
 *
 * A directory holds meta.json ({"width", "height", "frame_count", "fps"})
 * plus one binary PPM (P6, maxval 255) per frame named frame_00000.ppm,
 * frame_00001.ppm, ... Producing it from a real video is one ffmpeg call:
 *
 *   ffmpeg -i input.mp4 -vsync 0 frames/frame_%05d.ppm
 *
 * (ffmpeg numbers from 1; rename or pass -start_number 0.)
 */

import * as fs from "fs";
import * as path from "path";

export interface RgbImage {
  width: number;
  height: number;
  data: Uint8Array; // RGB, row-major, 3 bytes per pixel
}

export interface VideoMeta {
  width: number;
  height: number;
  frame_count: number;
  fps: number;
}

export function decodePpm(buffer: Buffer): RgbImage {
  // Header: "P6" <ws> width <ws> height <ws> maxval <single ws> raster.
  // Comments (#...) may appear between header tokens.
  let pos = 0;
  const readToken = (): string => {
    while (pos < buffer.length) {
      const ch = buffer[pos]!;
      if (ch === 0x23) {
        while (pos < buffer.length && buffer[pos] !== 0x0a) pos++;
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < buffer.length) {
      const ch = buffer[pos]!;
      if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d || ch === 0x23) break;
      pos++;
    }
    return buffer.subarray(start, pos).toString("ascii");
  };

  const magic = readToken();
  if (magic !== "P6") throw new Error(`not a binary PPM (magic ${JSON.stringify(magic)})`);
  const width = parseInt(readToken(), 10);
  const height = parseInt(readToken(), 10);
  const maxval = parseInt(readToken(), 10);
  if (!(width > 0 && height > 0)) throw new Error("PPM has invalid dimensions");
  if (maxval !== 255) throw new Error(`unsupported PPM maxval ${maxval}`);
  pos += 1; // single whitespace byte after maxval
  const expected = width * height * 3;
  if (buffer.length - pos < expected) throw new Error("PPM raster truncated");
  return { width, height, data: new Uint8Array(buffer.subarray(pos, pos + expected)) };
}

export function encodePpm(image: RgbImage): Buffer {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, "ascii");
  return Buffer.concat([header, Buffer.from(image.data)]);
}

export function frameFileName(index: number): string {
  return `frame_${index.toString().padStart(5, "0")}.ppm`;
}

export class FrameDirectory {
  readonly meta: VideoMeta;
  private readonly dir: string;

  constructor(dir: string) {
    this.dir = dir;
    const metaPath = path.join(dir, "meta.json");
    let raw: string;
    try {
      raw = fs.readFileSync(metaPath, "utf-8");
    } catch (e) {
      throw new Error(`cannot read ${metaPath}: ${(e as Error).message}`);
    }
    const meta = JSON.parse(raw) as VideoMeta;
    for (const key of ["width", "height", "frame_count", "fps"] as const) {
      if (typeof meta[key] !== "number" || !(meta[key] > 0)) {
        throw new Error(`meta.json is missing a positive numeric ${key}`);
      }
    }
    this.meta = meta;
  }

  get frameCount(): number {
    return this.meta.frame_count;
  }

  readFrame(index: number): RgbImage {
    if (!Number.isInteger(index) || index < 0 || index >= this.meta.frame_count) {
      throw new RangeError(`frame ${index} outside [0, ${this.meta.frame_count})`);
    }
    const buffer = fs.readFileSync(path.join(this.dir, frameFileName(index)));
    const image = decodePpm(buffer);
    if (image.width !== this.meta.width || image.height !== this.meta.height) {
      throw new Error(`frame ${index} has size ${image.width}x${image.height}, meta says ${this.meta.width}x${this.meta.height}`);
    }
    return image;
  }
}
