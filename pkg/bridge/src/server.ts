/**
 * Bridge server: answers embed/detect requests over stdio or TCP.
 *
 *   node dist/src/server.js --video frames_dir [--grid-side 4]
 *                           [--listen stdio | --listen host:port]
 *                           [--detector-model hue-blob-v1]
 *                           [--encoder-model hashed-bow-64]
 *
 * Without --video the server still answers embed requests; detect requests
 * then get an error response. Malformed requests never kill the process.
 */

import * as net from "net";
import * as readline from "readline";

import { detectOnMosaic } from "./detector";
import {
  DetectResponse,
  EmbedResponse,
  ErrorResponse,
  FrameError,
  Request,
  Response,
  encodeResponse,
  parseRequest,
} from "./protocol";
import { composeMosaic } from "./tiling";
import { HashedTextEncoder } from "./textEncoder";
import { FrameDirectory, RgbImage } from "./video";

export const DETECTOR_MODELS = ["hue-blob-v1"];
export const ENCODER_MODELS = ["hashed-bow-64"];

export interface BridgeConfig {
  video?: string;
  gridSide: number;
  listen: string;
  detectorModel: string;
  encoderModel: string;
}

export class BridgeService {
  private readonly encoder = new HashedTextEncoder();
  private readonly frames: FrameDirectory | null;
  private readonly gridSide: number;

  constructor(config: BridgeConfig) {
    if (!DETECTOR_MODELS.includes(config.detectorModel)) {
      throw new Error(
        `unknown detector model ${config.detectorModel}; available: ${DETECTOR_MODELS.join(", ")}`
      );
    }
    if (!ENCODER_MODELS.includes(config.encoderModel)) {
      throw new Error(
        `unknown encoder model ${config.encoderModel}; available: ${ENCODER_MODELS.join(", ")}`
      );
    }
    if (!(Number.isInteger(config.gridSide) && config.gridSide >= 1)) {
      throw new Error(`grid side must be a positive integer, got ${config.gridSide}`);
    }
    this.gridSide = config.gridSide;
    this.frames = config.video ? new FrameDirectory(config.video) : null;
  }

  handle(request: Request): Response {
    if (request.op === "embed") {
      const response: EmbedResponse = { embeddings: this.encoder.embed(request.texts) };
      return response;
    }
    return this.handleDetect(request.frames, request.vocabulary);
  }

  handleLine(line: string): Response {
    const parsed = parseRequest(line);
    if ("error" in parsed) return parsed as ErrorResponse;
    try {
      return this.handle(parsed);
    } catch (e) {
      return { error: (e as Error).message };
    }
  }

  private handleDetect(frames: number[], vocabulary: string[]): Response {
    if (!this.frames) {
      return { error: "this bridge was started without --video; detect is unavailable" };
    }
    if (frames.length > this.gridSide * this.gridSide) {
      return {
        error: `batch of ${frames.length} exceeds the ${this.gridSide}x${this.gridSide} grid`,
      };
    }
    const loaded: { index: number; image: RgbImage }[] = [];
    const frameErrors: FrameError[] = [];
    for (const index of frames) {
      try {
        loaded.push({ index, image: this.frames.readFrame(index) });
      } catch (e) {
        frameErrors.push({ frame: index, error: (e as Error).message });
      }
    }
    if (loaded.length === 0) {
      const response: DetectResponse = { detections: [] };
      if (frameErrors.length) response.frame_errors = frameErrors;
      return response;
    }
    const mosaic = composeMosaic(loaded, this.gridSide);
    const response: DetectResponse = { detections: detectOnMosaic(mosaic, vocabulary) };
    if (frameErrors.length) response.frame_errors = frameErrors;
    return response;
  }
}

export function parseArgs(argv: string[]): BridgeConfig {
  const config: BridgeConfig = {
    gridSide: 4,
    listen: "stdio",
    detectorModel: "hue-blob-v1",
    encoderModel: "hashed-bow-64",
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i]!;
    const value = argv[i + 1];
    const need = (): string => {
      if (value === undefined) throw new Error(`${flag} needs a value`);
      i++;
      return value;
    };
    switch (flag) {
      case "--video":
        config.video = need();
        break;
      case "--grid-side":
        config.gridSide = parseInt(need(), 10);
        break;
      case "--listen":
        config.listen = need();
        break;
      case "--detector-model":
        config.detectorModel = need();
        break;
      case "--encoder-model":
        config.encoderModel = need();
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  return config;
}

function serveStream(
  service: BridgeService,
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream
): void {
  const lines = readline.createInterface({ input, crlfDelay: Infinity });
  lines.on("line", (line) => {
    if (!line.trim()) return;
    output.write(encodeResponse(service.handleLine(line)));
  });
}

export function main(argv: string[]): number {
  let config: BridgeConfig;
  let service: BridgeService;
  try {
    config = parseArgs(argv);
    service = new BridgeService(config);
  } catch (e) {
    process.stderr.write(`error: ${(e as Error).message}\n`);
    return 2;
  }

  if (config.listen === "stdio") {
    serveStream(service, process.stdin, process.stdout);
    return 0;
  }

  const sep = config.listen.lastIndexOf(":");
  if (sep < 0) {
    process.stderr.write(`error: --listen expects stdio or host:port, got ${config.listen}\n`);
    return 2;
  }
  const host = config.listen.slice(0, sep);
  const port = parseInt(config.listen.slice(sep + 1), 10);
  const server = net.createServer((socket) => {
    socket.on("error", () => socket.destroy());
    serveStream(service, socket, socket);
  });
  server.listen(port, host, () => {
    const address = server.address();
    const bound = typeof address === "object" && address ? address.port : port;
    process.stderr.write(`listening on ${host}:${bound}\n`);
  });
  return 0;
}

if (require.main === module) {
  const code = main(process.argv.slice(2));
  if (code !== 0) process.exit(code);
}
