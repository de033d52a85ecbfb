import { SplitStream } from "./rng.js";
import { IngestError } from "./errors.js";

/** Relative crop rectangle plus horizontal-flip flag. */
export interface CropSpec {
  x0: number;
  y0: number;
  w: number;
  h: number;
  hflip: boolean;
  seedIndex: number;
}

/**
 * Deterministic random-resized-crop specs for one image.
 *
 * Spec i is drawn from its own (seed, i) stream with draw order area, aspect
 * ratio, x0, y0, flip, so the engine regenerates the identical rectangles
 * from the same seed. The specs are the contract between the two packages;
 * pixels never cross the boundary.
 */
export function generateCropSpecs(
  seed: number | bigint,
  n: number,
  scale: [number, number] = [0.2, 1.0],
  aspect: [number, number] = [0.75, 4.0 / 3.0],
): CropSpec[] {
  if (n < 1) throw new IngestError("need n >= 1 crop specs");
  const [lo, hi] = scale;
  if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) {
    throw new IngestError(`invalid crop scale range [${lo}, ${hi}]`);
  }
  const specs: CropSpec[] = [];
  const root = new SplitStream(seed);
  for (let i = 0; i < n; i++) {
    const s = root.substream(i);
    const area = s.uniform(lo, hi);
    const ratio = s.uniform(aspect[0], aspect[1]);
    const w = Math.min(Math.sqrt(area * ratio), 1.0);
    const h = Math.min(Math.sqrt(area / ratio), 1.0);
    const x0 = s.uniform(0.0, 1.0 - w);
    const y0 = s.uniform(0.0, 1.0 - h);
    const hflip = s.uniform() < 0.5;
    specs.push({ x0, y0, w, h, hflip, seedIndex: i });
  }
  return specs;
}

/** JSON form matching the manifest schema: [x0, y0, w, h, hflip]. */
export function cropSpecToJson(spec: CropSpec): [number, number, number, number, boolean] {
  return [spec.x0, spec.y0, spec.w, spec.h, spec.hflip];
}
