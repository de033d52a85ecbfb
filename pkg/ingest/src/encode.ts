/**
 * Turn cached generations and rendered images into the engine's on-disk
 * shapes: one text matrix with bare-synonym rows followed by per-description
 * blocks (one row per synonym, class order preserved), and one view matrix
 * per image with the full frame at row 0.
 */

import { EmbeddingMatrix, normalizedF32Row, stackRows } from "./formats.js";
import { Encoder } from "./encoder.js";
import { cropPixels, PixelImage } from "./image.js";
import type { CropSpec } from "./crops.js";
import { IngestError } from "./errors.js";

export const PROMPT_TEMPLATE = "a photo of a {synonym}, {description}";
export const BARE_TEMPLATE = "a photo of a {synonym}";

// Stand-in for the tokenizer context window; prompts beyond this are
// truncated with a warning and the truncation is recorded per row.
export const MAX_PROMPT_CHARS = 280;

export interface SynonymRowEntry {
  text: string;
  row: number;
  is_original: boolean;
}

export interface DescriptionRowEntry {
  text: string;
  rows: [number, number];
}

export interface ClassRows {
  class_id: string;
  given_name: string;
  synonyms: SynonymRowEntry[];
  descriptions: DescriptionRowEntry[];
}

export interface PromptRowProvenance {
  row: number;
  class_id: string;
  synonym: string;
  description: string;
  prompt: string;
  truncated: boolean;
}

export interface EncodedPrompts {
  matrix: EmbeddingMatrix;
  classes: ClassRows[];
  provenance: PromptRowProvenance[];
}

function renderPrompt(template: string, synonym: string, description: string): string {
  return template.replace("{synonym}", synonym).replace("{description}", description);
}

/**
 * Encode every prompt for the given classes. `synonyms` maps class name to
 * [original, ...alternates]; `descriptions` maps class name to description
 * phrases (may be empty, which leaves only the bare rows).
 */
export function encodePrompts(
  synonyms: Map<string, string[]>,
  descriptions: Map<string, string[]>,
  encoder: Encoder,
  warn: (msg: string) => void = (msg) => console.warn(msg),
): EncodedPrompts {
  const rows: Float32Array[] = [];
  const classes: ClassRows[] = [];
  const provenance: PromptRowProvenance[] = [];

  const pushRow = (
    classId: string,
    synonym: string,
    description: string,
    template: string,
  ): number => {
    let prompt = renderPrompt(template, synonym, description);
    let truncated = false;
    if (prompt.length > MAX_PROMPT_CHARS) {
      prompt = prompt.slice(0, MAX_PROMPT_CHARS);
      truncated = true;
      warn(`prompt for ${classId} truncated to ${MAX_PROMPT_CHARS} chars`);
    }
    const row = rows.length;
    rows.push(encoder.encodeText(prompt));
    provenance.push({ row, class_id: classId, synonym, description, prompt, truncated });
    return row;
  };

  for (const [className, synList] of synonyms) {
    if (synList.length === 0) throw new IngestError(`class ${className} has no synonyms`);
    const record: ClassRows = {
      class_id: className,
      given_name: className,
      synonyms: [],
      descriptions: [],
    };
    for (let i = 0; i < synList.length; i++) {
      const row = pushRow(className, synList[i], "", BARE_TEMPLATE);
      record.synonyms.push({ text: synList[i], row, is_original: i === 0 });
    }
    for (const desc of descriptions.get(className) ?? []) {
      const start = rows.length;
      for (const syn of synList) {
        pushRow(className, syn, desc, PROMPT_TEMPLATE);
      }
      record.descriptions.push({ text: desc, rows: [start, rows.length] });
    }
    classes.push(record);
  }
  return { matrix: stackRows(rows), classes, provenance };
}

/**
 * Row 0 is the full image, rows 1..N the crops in spec order. Flips happen
 * at the pixel level inside cropPixels.
 */
export function encodeViews(
  img: PixelImage,
  specs: CropSpec[],
  encoder: Encoder,
): EmbeddingMatrix {
  const rows: Float32Array[] = [encoder.encodeImage(img)];
  for (const spec of specs) {
    rows.push(encoder.encodeImage(cropPixels(img, spec)));
  }
  return stackRows(rows);
}

/** Final check before writing; every encoder output should already pass. */
export function assertUnitRows(matrix: EmbeddingMatrix, what: string): void {
  for (let r = 0; r < matrix.rows; r++) {
    let ss = 0;
    for (let c = 0; c < matrix.dim; c++) {
      const v = matrix.values[r * matrix.dim + c];
      ss += v * v;
    }
    if (Math.abs(Math.sqrt(ss) - 1) > 1e-5) {
      throw new IngestError(`${what}: row ${r} lost unit norm`);
    }
  }
}
