/**
 * Counter-based deterministic random streams (splitmix64 output mix).
 *
 * This is a line-for-line port of the engine's stream generator so that crop
 * specs and synthetic fixtures agree bit-for-bit across the language
 * boundary. All integer arithmetic is 64-bit via BigInt; uniforms take the
 * top 53 bits so the resulting doubles are exact on both sides.
 *
 *   mix(z)      = splitmix64 finalizer of z
 *   state(s, t) = mix(mix(s) + GOLDEN * t)
 *   value(n)    = mix(state + (n + 1) * GOLDEN)
 *   uniform(n)  = (value(n) >> 11) * 2^-53
 */

const MASK = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;
const M1 = 0xbf58476d1ce4e5b9n;
const M2 = 0x94d049bb133111ebn;

/** splitmix64 finalizer: avalanche a 64-bit integer. */
export function mix64(z: bigint): bigint {
  z &= MASK;
  z = ((z ^ (z >> 30n)) * M1) & MASK;
  z = ((z ^ (z >> 27n)) * M2) & MASK;
  return z ^ (z >> 31n);
}

export class SplitStream {
  readonly seed: bigint;
  readonly stream: bigint;
  private state: bigint;
  private n: bigint;

  constructor(seed: number | bigint, stream: number | bigint = 0) {
    this.seed = BigInt(seed) & MASK;
    this.stream = BigInt(stream) & MASK;
    this.state = mix64((mix64(this.seed) + GOLDEN * this.stream) & MASK);
    this.n = 0n;
  }

  /** Child stream keyed off this stream's state; independent of draw position. */
  substream(stream: number | bigint): SplitStream {
    return new SplitStream(this.state, stream);
  }

  nextU64(): bigint {
    const v = mix64((this.state + (this.n + 1n) * GOLDEN) & MASK);
    this.n += 1n;
    return v;
  }

  uniform(lo = 0.0, hi = 1.0): number {
    const u = Number(this.nextU64() >> 11n) * 2 ** -53;
    return lo + (hi - lo) * u;
  }

  uniforms(n: number): Float64Array {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = this.uniform();
    return out;
  }

  gauss(): number {
    // Box-Muller, two fresh uniforms per call; draw count stays a pure
    // function of the call count.
    const u1 = Math.max(this.uniform(), 2 ** -53);
    const u2 = this.uniform();
    return Math.sqrt(-2.0 * Math.log(u1)) * Math.cos(2.0 * Math.PI * u2);
  }

  gaussVector(n: number): Float64Array {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = this.gauss();
    return out;
  }
}

/**
 * FNV-1a 64-bit hash of a UTF-8 string, used to seed streams from text.
 * Stable across platforms; collisions are harmless here (two strings
 * sharing an embedding) and vanishingly rare.
 */
export function hash64(s: string): bigint {
  let h = 0xcbf29ce484222325n;
  const bytes = Buffer.from(s, "utf-8");
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * 0x100000001b3n) & MASK;
  }
  return h;
}
