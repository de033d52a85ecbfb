/**
 * Writers and readers for the engine's two binary containers.
 *
 * CPEB: "CPEB" | u16 version=1 | u8 dtype=0 (f32) | u8 reserved | u32 rows
 *       | u32 dim | rows*dim little-endian float32, row-major.
 * CPEA: "CPEA" | u16 version=1 | u32 height | u32 width | height*width
 *       little-endian float32, all >= 0.  (14-byte header: no padding.)
 *
 * Writes go through DataView with explicit little-endian flags so the files
 * are identical on any host.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { IngestError } from "./errors.js";

const CPEB_MAGIC = "CPEB";
const CPEA_MAGIC = "CPEA";
const VERSION = 1;
const DTYPE_F32 = 0;
const CPEB_HEADER_SIZE = 16;
const CPEA_HEADER_SIZE = 14;
const MAX_ELEMENTS = 2 ** 31;
const UNIT_NORM_ATOL = 1e-5;

export interface EmbeddingMatrix {
  rows: number;
  dim: number;
  // row-major, rows * dim entries
  values: Float32Array;
}

function ensureParentDir(file: string): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
}

export function writeCpeb(matrix: EmbeddingMatrix, file: string): void {
  const { rows, dim, values } = matrix;
  if (rows < 1 || dim < 1 || values.length !== rows * dim) {
    throw new IngestError(
      `embedding matrix shape mismatch: ${rows}x${dim} with ${values.length} values`,
    );
  }
  const buf = Buffer.alloc(CPEB_HEADER_SIZE + 4 * rows * dim);
  buf.write(CPEB_MAGIC, 0, "ascii");
  const view = new DataView(buf.buffer, buf.byteOffset);
  view.setUint16(4, VERSION, true);
  view.setUint8(6, DTYPE_F32);
  view.setUint8(7, 0);
  view.setUint32(8, rows, true);
  view.setUint32(12, dim, true);
  for (let i = 0; i < values.length; i++) {
    view.setFloat32(CPEB_HEADER_SIZE + 4 * i, values[i], true);
  }
  ensureParentDir(file);
  fs.writeFileSync(file, buf);
}

export function readCpeb(file: string, expectNormalized = true): EmbeddingMatrix {
  const buf = fs.readFileSync(file);
  if (buf.length < CPEB_HEADER_SIZE || buf.toString("ascii", 0, 4) !== CPEB_MAGIC) {
    throw new IngestError(`not a CPEB file: ${file}`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.length);
  const version = view.getUint16(4, true);
  if (version !== VERSION) throw new IngestError(`unsupported CPEB version ${version}: ${file}`);
  const dtype = view.getUint8(6);
  if (dtype !== DTYPE_F32) throw new IngestError(`unsupported CPEB dtype tag ${dtype}: ${file}`);
  const rows = view.getUint32(8, true);
  const dim = view.getUint32(12, true);
  if (rows < 1 || dim < 1 || rows * dim > MAX_ELEMENTS) {
    throw new IngestError(`unreasonable CPEB header (${rows} rows x ${dim} dim): ${file}`);
  }
  const expected = CPEB_HEADER_SIZE + 4 * rows * dim;
  if (buf.length < expected) throw new IngestError(`truncated CPEB payload in ${file}`);
  if (buf.length > expected) throw new IngestError(`trailing bytes after CPEB payload in ${file}`);
  const values = new Float32Array(rows * dim);
  for (let i = 0; i < values.length; i++) {
    values[i] = view.getFloat32(CPEB_HEADER_SIZE + 4 * i, true);
  }
  if (expectNormalized) {
    for (let r = 0; r < rows; r++) {
      let ss = 0;
      for (let c = 0; c < dim; c++) {
        const v = values[r * dim + c];
        ss += v * v;
      }
      if (Math.abs(Math.sqrt(ss) - 1.0) > UNIT_NORM_ATOL) {
        throw new IngestError(`embedding row ${r} in ${file} is not unit-normalized`);
      }
    }
  }
  return { rows, dim, values };
}

export function writeCpea(values: Float32Array, height: number, width: number, file: string): void {
  if (height < 1 || width < 1 || values.length !== height * width) {
    throw new IngestError(
      `attention map shape mismatch: ${height}x${width} with ${values.length} values`,
    );
  }
  for (const v of values) {
    if (!(v >= 0) || !Number.isFinite(v)) {
      throw new IngestError("attention map must be finite and >= 0");
    }
  }
  const buf = Buffer.alloc(CPEA_HEADER_SIZE + 4 * values.length);
  buf.write(CPEA_MAGIC, 0, "ascii");
  const view = new DataView(buf.buffer, buf.byteOffset);
  view.setUint16(4, VERSION, true);
  view.setUint32(6, height, true);
  view.setUint32(10, width, true);
  for (let i = 0; i < values.length; i++) {
    view.setFloat32(CPEA_HEADER_SIZE + 4 * i, values[i], true);
  }
  ensureParentDir(file);
  fs.writeFileSync(file, buf);
}

export function readCpea(file: string): { height: number; width: number; values: Float32Array } {
  const buf = fs.readFileSync(file);
  if (buf.length < CPEA_HEADER_SIZE || buf.toString("ascii", 0, 4) !== CPEA_MAGIC) {
    throw new IngestError(`not a CPEA file: ${file}`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.length);
  const version = view.getUint16(4, true);
  if (version !== VERSION) throw new IngestError(`unsupported CPEA version ${version}: ${file}`);
  const height = view.getUint32(6, true);
  const width = view.getUint32(10, true);
  if (height < 1 || width < 1 || height * width > MAX_ELEMENTS) {
    throw new IngestError(`unreasonable CPEA header (${height} x ${width}): ${file}`);
  }
  const expected = CPEA_HEADER_SIZE + 4 * height * width;
  if (buf.length < expected) throw new IngestError(`truncated CPEA payload in ${file}`);
  if (buf.length > expected) throw new IngestError(`trailing bytes after CPEA payload in ${file}`);
  const values = new Float32Array(height * width);
  for (let i = 0; i < values.length; i++) {
    const v = view.getFloat32(CPEA_HEADER_SIZE + 4 * i, true);
    if (!(v >= 0) || !Number.isFinite(v)) {
      throw new IngestError(`attention map ${file} has negative or non-finite values`);
    }
    values[i] = v;
  }
  return { height, width, values };
}

/** L2-normalize in double precision, then round once to float32. */
export function normalizedF32Row(row: Float64Array | number[]): Float32Array {
  let ss = 0;
  for (const v of row) ss += v * v;
  const norm = Math.sqrt(ss);
  if (!(norm > 0) || !Number.isFinite(norm)) {
    throw new IngestError("degenerate embedding: zero or non-finite norm");
  }
  const out = new Float32Array(row.length);
  for (let i = 0; i < row.length; i++) out[i] = Number(row[i]) / norm;
  return out;
}

/** Stack equal-length f32 rows into one row-major matrix. */
export function stackRows(rows: Float32Array[]): EmbeddingMatrix {
  if (rows.length === 0) throw new IngestError("cannot stack zero rows");
  const dim = rows[0].length;
  const values = new Float32Array(rows.length * dim);
  rows.forEach((row, r) => {
    if (row.length !== dim) {
      throw new IngestError(`row ${r} has dim ${row.length}, expected ${dim}`);
    }
    values.set(row, r * dim);
  });
  return { rows: rows.length, dim, values };
}
