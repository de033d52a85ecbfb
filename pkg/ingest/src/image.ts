/**
 * Deterministic synthetic image source.
 *
 * No dataset ships with the repository and the sandbox mounts no image
 * corpus, so image ids map to procedurally rendered RGB fields: a soft
 * gradient plus a few gaussian blobs, all drawn from the id's hash. The
 * rest of the pipeline treats these exactly like decoded photos.
 */

import { hash64, SplitStream } from "./rng.js";
import { IngestError } from "./errors.js";
import type { CropSpec } from "./crops.js";

export interface PixelImage {
  width: number;
  height: number;
  // RGB interleaved, values in [0, 1], row-major
  data: Float64Array;
}

export function renderImage(imageId: string, size = 64): PixelImage {
  const stream = new SplitStream(hash64(imageId));
  const data = new Float64Array(size * size * 3);

  const gx = stream.uniform(-0.3, 0.3);
  const gy = stream.uniform(-0.3, 0.3);
  const base = [stream.uniform(0.2, 0.5), stream.uniform(0.2, 0.5), stream.uniform(0.2, 0.5)];

  interface Blob {
    cx: number;
    cy: number;
    sigma: number;
    color: number[];
  }
  const nBlobs = 2 + Number(stream.nextU64() % 2n);
  const blobs: Blob[] = [];
  for (let b = 0; b < nBlobs; b++) {
    blobs.push({
      cx: stream.uniform(0.2, 0.8),
      cy: stream.uniform(0.2, 0.8),
      sigma: stream.uniform(0.08, 0.2),
      color: [stream.uniform(0, 0.6), stream.uniform(0, 0.6), stream.uniform(0, 0.6)],
    });
  }

  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const u = (x + 0.5) / size;
      const v = (y + 0.5) / size;
      for (let c = 0; c < 3; c++) {
        let val = base[c] + gx * (u - 0.5) + gy * (v - 0.5);
        for (const blob of blobs) {
          const r2 = (u - blob.cx) ** 2 + (v - blob.cy) ** 2;
          val += blob.color[c] * Math.exp(-r2 / (2 * blob.sigma * blob.sigma));
        }
        data[(y * size + x) * 3 + c] = Math.min(1, Math.max(0, val));
      }
    }
  }
  return { width: size, height: size, data };
}

/**
 * Extract the pixel rectangle for a crop spec; the flip is applied here,
 * before encoding, so a flipped spec yields a genuinely different view.
 * Boxes are floored to pixel edges with a one-pixel minimum per side.
 */
export function cropPixels(img: PixelImage, spec: CropSpec): PixelImage {
  let xLo = Math.floor(spec.x0 * img.width);
  let yLo = Math.floor(spec.y0 * img.height);
  const xHi = Math.min(img.width, Math.max(xLo + 1, Math.floor((spec.x0 + spec.w) * img.width)));
  const yHi = Math.min(img.height, Math.max(yLo + 1, Math.floor((spec.y0 + spec.h) * img.height)));
  xLo = Math.min(xLo, img.width - 1);
  yLo = Math.min(yLo, img.height - 1);
  const w = xHi - xLo;
  const h = yHi - yLo;
  if (w < 1 || h < 1) throw new IngestError(`empty crop from spec ${spec.seedIndex}`);
  const data = new Float64Array(w * h * 3);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const srcX = spec.hflip ? xHi - 1 - x : xLo + x;
      const srcI = ((yLo + y) * img.width + srcX) * 3;
      const dstI = (y * w + x) * 3;
      data[dstI] = img.data[srcI];
      data[dstI + 1] = img.data[srcI + 1];
      data[dstI + 2] = img.data[srcI + 2];
    }
  }
  return { width: w, height: h, data };
}

/** Mean luminance per cell of a g x g grid laid over the image. */
export function patchMeans(img: PixelImage, grid: number): Float64Array {
  const out = new Float64Array(grid * grid);
  const counts = new Float64Array(grid * grid);
  for (let y = 0; y < img.height; y++) {
    const py = Math.min(grid - 1, Math.floor((y * grid) / img.height));
    for (let x = 0; x < img.width; x++) {
      const px = Math.min(grid - 1, Math.floor((x * grid) / img.width));
      const i = (y * img.width + x) * 3;
      const lum = 0.299 * img.data[i] + 0.587 * img.data[i + 1] + 0.114 * img.data[i + 2];
      out[py * grid + px] += lum;
      counts[py * grid + px] += 1;
    }
  }
  for (let i = 0; i < out.length; i++) {
    out[i] = counts[i] > 0 ? out[i] / counts[i] : 0;
  }
  return out;
}
