/**
 * Wire protocol shared with the search engine: one JSON object per line,
 * requests in, responses out. See ../../protocol/wire-schema.json.
 */

export interface EmbedRequest {
  op: "embed";
  texts: string[];
}

export interface DetectRequest {
  op: "detect";
  frames: number[];
  vocabulary: string[];
}

export type Request = EmbedRequest | DetectRequest;

export interface Detection {
  frame: number;
  name: string;
  confidence: number;
}

export interface FrameError {
  frame: number;
  error: string;
}

export interface EmbedResponse {
  embeddings: number[][];
}

export interface DetectResponse {
  detections: Detection[];
  frame_errors?: FrameError[];
}

export interface ErrorResponse {
  error: string;
}

export type Response = EmbedResponse | DetectResponse | ErrorResponse;

export function parseRequest(line: string): Request | ErrorResponse {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (e) {
    return { error: `malformed JSON: ${(e as Error).message}` };
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    return { error: "request must be a JSON object" };
  }
  const req = obj as Record<string, unknown>;
  if (req.op === "embed") {
    if (!Array.isArray(req.texts) || !req.texts.every((t) => typeof t === "string")) {
      return { error: "embed request needs a 'texts' list of strings" };
    }
    return { op: "embed", texts: req.texts as string[] };
  }
  if (req.op === "detect") {
    if (!Array.isArray(req.frames) || !req.frames.every((f) => Number.isInteger(f))) {
      return { error: "detect request needs a 'frames' list of integers" };
    }
    if (!Array.isArray(req.vocabulary) || !req.vocabulary.every((v) => typeof v === "string")) {
      return { error: "detect request needs a 'vocabulary' list of strings" };
    }
    return { op: "detect", frames: req.frames as number[], vocabulary: req.vocabulary as string[] };
  }
  return { error: `unknown op: ${JSON.stringify(req.op ?? null)}` };
}

export function encodeResponse(response: Response): string {
  return JSON.stringify(response) + "\n";
}
