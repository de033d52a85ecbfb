/**
 * Attention extraction: per-layer matrices from a vision model, composed
 * into a per-pixel saliency map by attention rollout.
 *
 * Rollout here means: average attention over heads within a layer, mix with
 * the identity at weight 0.5 to account for residual connections,
 * row-normalize, multiply the layers together, then read off the class
 * token's row over patch tokens and spread it onto the pixel grid.
 */

import { hash64, SplitStream } from "./rng.js";
import { IngestError } from "./errors.js";
import { patchMeans, PixelImage } from "./image.js";

export interface AttentionModel {
  readonly name: string;
  readonly grid: number;
  readonly layers: number;
  readonly heads: number;
  /** [layer][head] row-major (1 + grid^2)^2 stochastic matrices. */
  attention(img: PixelImage): Float32Array[][];
}

const RESIDUAL = 0.5;

function softmaxRow(scores: Float64Array, out: Float32Array, offset: number): void {
  let max = -Infinity;
  for (const s of scores) max = Math.max(max, s);
  let sum = 0;
  for (let i = 0; i < scores.length; i++) {
    const e = Math.exp(scores[i] - max);
    out[offset + i] = e;
    sum += e;
  }
  for (let i = 0; i < scores.length; i++) out[offset + i] /= sum;
}

class SyntheticAttentionModel implements AttentionModel {
  constructor(
    readonly name: string,
    readonly grid = 8,
    readonly layers = 4,
    readonly heads = 3,
  ) {}

  attention(img: PixelImage): Float32Array[][] {
    const tokens = 1 + this.grid * this.grid;
    const means = patchMeans(img, this.grid);
    let overall = 0;
    for (const m of means) overall += m;
    overall /= means.length;
    // token 0 is the class token; its "content" is the global mean
    const content = new Float64Array(tokens);
    content[0] = overall;
    content.set(means, 1);

    const base = new SplitStream(hash64(`${this.name}|attention`));
    const result: Float32Array[][] = [];
    for (let l = 0; l < this.layers; l++) {
      const headMats: Float32Array[] = [];
      for (let h = 0; h < this.heads; h++) {
        const stream = base.substream(l * this.heads + h);
        const mat = new Float32Array(tokens * tokens);
        const scores = new Float64Array(tokens);
        for (let i = 0; i < tokens; i++) {
          for (let j = 0; j < tokens; j++) {
            // keys with more content attract attention; noise varies by head
            scores[j] = 3.0 * content[j] + 0.5 * stream.gauss();
          }
          softmaxRow(scores, mat, i * tokens);
        }
        headMats.push(mat);
      }
      result.push(headMats);
    }
    return result;
  }
}

/** Every row uniform; rollout of this must be a constant map. */
class ConstantAttentionModel implements AttentionModel {
  constructor(
    readonly name: string,
    readonly grid = 8,
    readonly layers = 2,
    readonly heads = 2,
  ) {}

  attention(_img: PixelImage): Float32Array[][] {
    const tokens = 1 + this.grid * this.grid;
    const mat = new Float32Array(tokens * tokens).fill(1 / tokens);
    return Array.from({ length: this.layers }, () =>
      Array.from({ length: this.heads }, () => mat),
    );
  }
}

export function attentionModelByName(name: string): AttentionModel {
  const m = /^synthetic-(\d+)$/.exec(name);
  if (m) return new SyntheticAttentionModel(name);
  if (name === "constant") return new ConstantAttentionModel(name);
  throw new IngestError(
    `vision checkpoint for ${name} is not available in this environment; ` +
      `use a synthetic-<dim> model`,
  );
}

/**
 * Compose per-layer attention into the class token's saliency over patches.
 * Returns a grid x grid map (unnormalized, nonnegative).
 */
export function attentionRollout(
  layers: Float32Array[][],
  tokens: number,
  residual = RESIDUAL,
): Float64Array {
  if (layers.length === 0) throw new IngestError("rollout needs at least one layer");
  const n = tokens;
  // rollout = A_L * ... * A_1, built left-to-right
  let rollout: Float64Array | null = null;
  const mixed = new Float64Array(n * n);
  for (const heads of layers) {
    if (heads.length === 0) throw new IngestError("rollout layer has no heads");
    mixed.fill(0);
    for (const head of heads) {
      if (head.length !== n * n) {
        throw new IngestError(`attention matrix is not ${n}x${n}`);
      }
      for (let i = 0; i < n * n; i++) mixed[i] += head[i];
    }
    for (let i = 0; i < n * n; i++) mixed[i] /= heads.length;
    for (let i = 0; i < n; i++) {
      mixed[i * n + i] = (1 - residual) * mixed[i * n + i] + residual;
      for (let j = 0; j < n; j++) {
        if (j !== i) mixed[i * n + j] *= 1 - residual;
      }
      let sum = 0;
      for (let j = 0; j < n; j++) sum += mixed[i * n + j];
      for (let j = 0; j < n; j++) mixed[i * n + j] /= sum;
    }
    if (rollout === null) {
      rollout = Float64Array.from(mixed);
    } else {
      const next = new Float64Array(n * n);
      for (let i = 0; i < n; i++) {
        for (let k = 0; k < n; k++) {
          const a = mixed[i * n + k];
          if (a === 0) continue;
          for (let j = 0; j < n; j++) {
            next[i * n + j] += a * rollout[k * n + j];
          }
        }
      }
      rollout = next;
    }
  }
  // class token row over patch tokens (drop the class column)
  const grid = Math.round(Math.sqrt(n - 1));
  const map = new Float64Array(grid * grid);
  for (let j = 0; j < grid * grid; j++) map[j] = rollout![j + 1];
  return map;
}

/** Nearest-neighbor upsample of a square grid to the target resolution. */
export function upsampleNearest(
  grid: Float64Array,
  gridSize: number,
  height: number,
  width: number,
): Float32Array {
  const out = new Float32Array(height * width);
  for (let y = 0; y < height; y++) {
    const gy = Math.min(gridSize - 1, Math.floor((y * gridSize) / height));
    for (let x = 0; x < width; x++) {
      const gx = Math.min(gridSize - 1, Math.floor((x * gridSize) / width));
      out[y * width + x] = grid[gy * gridSize + gx];
    }
  }
  return out;
}

/** Full pipeline for one image: model attention, rollout, upsample. */
export function extractAttention(
  img: PixelImage,
  model: AttentionModel,
  outHeight?: number,
  outWidth?: number,
): { height: number; width: number; values: Float32Array } {
  const tokens = 1 + model.grid * model.grid;
  const map = attentionRollout(model.attention(img), tokens);
  const height = outHeight ?? img.height;
  const width = outWidth ?? img.width;
  return { height, width, values: upsampleNearest(map, model.grid, height, width) };
}
