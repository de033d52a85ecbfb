/**
 * The committed sample dataset: three classes, two synthetic images each,
 * every stage of the pipeline exercised. Regeneration is byte-identical
 * because all inputs are the committed cache plus pure functions of fixed
 * seeds; scripts/replay-sample.mjs verifies exactly that.
 */

import * as path from "node:path";
import { GenerationCache } from "./cache.js";
import { generateCropSpecs } from "./crops.js";
import { encoderByName } from "./encoder.js";
import { assertUnitRows, encodePrompts, encodeViews } from "./encode.js";
import { writeCpeb, writeCpea } from "./formats.js";
import { fetchDescriptions, fetchSynonyms } from "./generate.js";
import { renderImage } from "./image.js";
import { buildManifest, ManifestImage, writeJson } from "./manifest.js";
import { providerByName } from "./providers.js";
import { attentionModelByName, extractAttention } from "./rollout.js";

export const SAMPLE_CLASSES = ["hellebore", "boxer", "tabby cat"];
export const SAMPLE_CONTEXT = "a small collection of flower and pet photographs";
export const SAMPLE_MODEL = "synthetic-32";

const IMAGES_PER_CLASS = 2;
const N_CROPS = 8;
const IMAGE_SIZE = 64;
const ATTENTION_SIZE = 16;
const CROP_SEED_BASE = 2026;
const M_STAR = 3;

export interface SampleOptions {
  offline?: boolean;
}

/** Generate the full sample dataset under outDir, reading cacheDir. */
export async function generateSample(
  outDir: string,
  cacheDir: string,
  options: SampleOptions = {},
): Promise<void> {
  const offline = options.offline ?? true;
  const cache = GenerationCache.load(cacheDir);
  const provider = providerByName("builtin");
  const encoder = encoderByName(SAMPLE_MODEL);
  const attentionModel = attentionModelByName(SAMPLE_MODEL);

  const synonyms = await fetchSynonyms(SAMPLE_CLASSES, provider, M_STAR, cache, { offline });
  const descriptions = await fetchDescriptions(SAMPLE_CLASSES, SAMPLE_CONTEXT, provider, cache, {
    offline,
  });
  if (!offline) cache.save();

  const prompts = encodePrompts(synonyms, descriptions, encoder);
  assertUnitRows(prompts.matrix, "text prompts");
  writeCpeb(prompts.matrix, path.join(outDir, "text_prompts.cpeb"));
  writeJson({ rows: prompts.provenance }, path.join(outDir, "text_rows.json"));

  const images: ManifestImage[] = [];
  let imageIndex = 0;
  for (const className of SAMPLE_CLASSES) {
    for (let i = 0; i < IMAGES_PER_CLASS; i++) {
      const imageId = `${className.replace(/ /g, "-")}-${i}`;
      const img = renderImage(imageId, IMAGE_SIZE);
      const specs = generateCropSpecs(CROP_SEED_BASE + imageIndex, N_CROPS);

      const views = encodeViews(img, specs, encoder);
      assertUnitRows(views, `views for ${imageId}`);
      writeCpeb(views, path.join(outDir, "views", `${imageId}.cpeb`));

      const attn = extractAttention(img, attentionModel, ATTENTION_SIZE, ATTENTION_SIZE);
      writeCpea(
        attn.values,
        attn.height,
        attn.width,
        path.join(outDir, "attention", `${imageId}.cpea`),
      );

      images.push({
        image_id: imageId,
        true_class_id: className,
        views_file: `views/${imageId}.cpeb`,
        attention_file: `attention/${imageId}.cpea`,
        crop_specs: specs,
      });
      imageIndex += 1;
    }
  }

  const manifest = buildManifest("ingest-sample", "text_prompts.cpeb", prompts.classes, images);
  writeJson(manifest, path.join(outDir, "manifest.json"));
}
