/**
 * Manifest assembly mirroring the engine's schema. Only plain data here;
 * the engine validates row ranges on load.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { cropSpecToJson, CropSpec } from "./crops.js";
import type { ClassRows } from "./encode.js";

export interface ManifestImage {
  image_id: string;
  true_class_id: string;
  views_file: string;
  attention_file: string;
  crop_specs: CropSpec[];
}

export function buildManifest(
  datasetName: string,
  textEmbeddingFile: string,
  classes: ClassRows[],
  images: ManifestImage[],
): object {
  return {
    dataset_name: datasetName,
    text_embedding_file: textEmbeddingFile,
    classes: classes.map((c) => ({
      class_id: c.class_id,
      given_name: c.given_name,
      synonyms: c.synonyms,
      descriptions: c.descriptions.map((d) => ({ text: d.text, rows: [d.rows[0], d.rows[1]] })),
    })),
    images: images.map((im) => ({
      image_id: im.image_id,
      true_class_id: im.true_class_id,
      views_file: im.views_file,
      attention_file: im.attention_file,
      crop_specs: im.crop_specs.map(cropSpecToJson),
    })),
  };
}

export function writeJson(obj: object, file: string): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, JSON.stringify(obj, null, 2) + "\n");
}
