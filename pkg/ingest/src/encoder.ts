/**
 * Text and image encoders behind one interface.
 *
 * A real deployment wires a contrastive checkpoint in here. Offline, the
 * "synthetic-<dim>" family stands in: text embeds through a hash-seeded
 * gaussian draw, images through a fixed random projection of coarse pixel
 * statistics. Both are pure functions of (model name, input), which is what
 * the byte-identical replay guarantee rests on.
 */

import { hash64, SplitStream } from "./rng.js";
import { IngestError } from "./errors.js";
import { normalizedF32Row } from "./formats.js";
import { patchMeans, PixelImage } from "./image.js";

export interface Encoder {
  readonly name: string;
  readonly dim: number;
  encodeText(text: string): Float32Array;
  encodeImage(img: PixelImage): Float32Array;
}

const FEATURE_GRID = 8; // images pool to an 8x8 luminance grid before projection

class SyntheticEncoder implements Encoder {
  readonly dim: number;
  private projection: Float64Array | null = null;

  constructor(readonly name: string, dim: number) {
    this.dim = dim;
  }

  encodeText(text: string): Float32Array {
    const stream = new SplitStream(hash64(`${this.name}|text`)).substream(hash64(text));
    return normalizedF32Row(stream.gaussVector(this.dim));
  }

  encodeImage(img: PixelImage): Float32Array {
    const feat = patchMeans(img, FEATURE_GRID);
    const proj = this.visionProjection(feat.length);
    const out = new Float64Array(this.dim);
    for (let j = 0; j < this.dim; j++) {
      let acc = 0;
      for (let i = 0; i < feat.length; i++) {
        acc += proj[j * feat.length + i] * feat[i];
      }
      out[j] = acc;
    }
    return normalizedF32Row(out);
  }

  private visionProjection(nFeatures: number): Float64Array {
    if (this.projection === null) {
      const stream = new SplitStream(hash64(`${this.name}|vision`));
      this.projection = stream.gaussVector(this.dim * nFeatures);
    }
    return this.projection;
  }
}

/** "synthetic-32", "synthetic-512", ... anything else needs a checkpoint. */
export function encoderByName(name: string): Encoder {
  const m = /^synthetic-(\d+)$/.exec(name);
  if (m) {
    const dim = parseInt(m[1], 10);
    if (dim < 2 || dim > 4096) throw new IngestError(`encoder dim out of range: ${name}`);
    return new SyntheticEncoder(name, dim);
  }
  throw new IngestError(
    `encoder checkpoint for ${name} is not available in this environment; ` +
      `use a synthetic-<dim> model`,
  );
}
