export { mix64, SplitStream, hash64 } from "./rng.js";
export { generateCropSpecs, cropSpecToJson } from "./crops.js";
export type { CropSpec } from "./crops.js";
export {
  readCpeb,
  writeCpeb,
  readCpea,
  writeCpea,
  normalizedF32Row,
  stackRows,
} from "./formats.js";
export type { EmbeddingMatrix } from "./formats.js";
export { GenerationCache } from "./cache.js";
export type { GenerationRecord } from "./cache.js";
export { providerByName, FlakyProvider, SYNONYM_TEMPLATE, DESCRIPTION_TEMPLATE } from "./providers.js";
export type { Provider } from "./providers.js";
export { fetchSynonyms, fetchDescriptions } from "./generate.js";
export { renderImage, cropPixels, patchMeans } from "./image.js";
export type { PixelImage } from "./image.js";
export { encoderByName } from "./encoder.js";
export type { Encoder } from "./encoder.js";
export {
  attentionModelByName,
  attentionRollout,
  upsampleNearest,
  extractAttention,
} from "./rollout.js";
export type { AttentionModel } from "./rollout.js";
export {
  encodePrompts,
  encodeViews,
  assertUnitRows,
  PROMPT_TEMPLATE,
  BARE_TEMPLATE,
  MAX_PROMPT_CHARS,
} from "./encode.js";
export type { EncodedPrompts, ClassRows } from "./encode.js";
export { buildManifest, writeJson } from "./manifest.js";
export { generateSample, SAMPLE_CLASSES, SAMPLE_MODEL } from "./sample.js";
export { IngestError, UsageError } from "./errors.js";
