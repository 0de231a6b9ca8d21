/**
 * Mosaic batching: the requested frames are downscaled into the cells of an
 * m-by-m grid image so one detector pass covers the whole batch. Detections
 * found on the mosaic are mapped back to their source frame through the
 * grid cell containing the detection's bounding-box center.
 */

import { RgbImage } from "./video";

export const TILE_WIDTH = 96;
export const TILE_HEIGHT = 72;

export interface Mosaic {
  image: RgbImage;
  gridSide: number;
  tileWidth: number;
  tileHeight: number;
  /** frame index per cell, row-major; -1 marks an unused (black) cell */
  cellFrames: number[];
}

function scaleNearest(src: RgbImage, dstWidth: number, dstHeight: number): RgbImage {
  const data = new Uint8Array(dstWidth * dstHeight * 3);
  for (let y = 0; y < dstHeight; y++) {
    const sy = Math.min(src.height - 1, Math.floor((y * src.height) / dstHeight));
    for (let x = 0; x < dstWidth; x++) {
      const sx = Math.min(src.width - 1, Math.floor((x * src.width) / dstWidth));
      const s = (sy * src.width + sx) * 3;
      const d = (y * dstWidth + x) * 3;
      data[d] = src.data[s]!;
      data[d + 1] = src.data[s + 1]!;
      data[d + 2] = src.data[s + 2]!;
    }
  }
  return { width: dstWidth, height: dstHeight, data };
}

export function composeMosaic(
  frames: { index: number; image: RgbImage }[],
  gridSide: number,
  tileWidth: number = TILE_WIDTH,
  tileHeight: number = TILE_HEIGHT
): Mosaic {
  if (frames.length > gridSide * gridSide) {
    throw new Error(`${frames.length} frames exceed a ${gridSide}x${gridSide} grid`);
  }
  const width = gridSide * tileWidth;
  const height = gridSide * tileHeight;
  const data = new Uint8Array(width * height * 3); // zero-filled: black padding
  const cellFrames = new Array<number>(gridSide * gridSide).fill(-1);

  frames.forEach((frame, cell) => {
    cellFrames[cell] = frame.index;
    const tile = scaleNearest(frame.image, tileWidth, tileHeight);
    const row = Math.floor(cell / gridSide);
    const col = cell % gridSide;
    for (let y = 0; y < tileHeight; y++) {
      const dstOffset = ((row * tileHeight + y) * width + col * tileWidth) * 3;
      const srcOffset = y * tileWidth * 3;
      data.set(tile.data.subarray(srcOffset, srcOffset + tileWidth * 3), dstOffset);
    }
  });

  return { image: { width, height, data }, gridSide, tileWidth, tileHeight, cellFrames };
}

/** Map mosaic pixel coordinates to the source frame index, or -1 for padding. */
export function frameAt(mosaic: Mosaic, x: number, y: number): number {
  const col = Math.min(mosaic.gridSide - 1, Math.floor(x / mosaic.tileWidth));
  const row = Math.min(mosaic.gridSide - 1, Math.floor(y / mosaic.tileHeight));
  return mosaic.cellFrames[row * mosaic.gridSide + col] ?? -1;
}
