#!/usr/bin/env node
/**
 * cpe-ingest: produce engine-readable fixtures.
 *
 *   cpe-ingest synonyms     --classes a,b --cache DIR [--provider P] [--max N] [--offline]
 *   cpe-ingest descriptions --classes a,b --context TEXT --cache DIR [--provider P] [--offline]
 *   cpe-ingest encode-text  --classes a,b --cache DIR --out DIR --model NAME [--max N] [--offline]
 *   cpe-ingest encode-views --image-id ID --out DIR --model NAME [--seed N] [--n-crops N] [--size N]
 *   cpe-ingest attention    --image-id ID --out DIR --model NAME [--size N] [--attention-size N]
 *   cpe-ingest sample       --out DIR --cache DIR [--offline]
 */

import * as path from "node:path";
import { GenerationCache } from "./cache.js";
import { generateCropSpecs, cropSpecToJson } from "./crops.js";
import { encoderByName } from "./encoder.js";
import { assertUnitRows, encodePrompts, encodeViews } from "./encode.js";
import { IngestError, UsageError } from "./errors.js";
import { writeCpeb, writeCpea } from "./formats.js";
import { fetchDescriptions, fetchSynonyms } from "./generate.js";
import { renderImage } from "./image.js";
import { writeJson } from "./manifest.js";
import { providerByName } from "./providers.js";
import { attentionModelByName, extractAttention } from "./rollout.js";
import { generateSample } from "./sample.js";

const BOOL_FLAGS = new Set(["offline"]);

interface Args {
  command: string;
  flags: Map<string, string>;
  bools: Set<string>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) throw new UsageError("missing command");
  const [command, ...rest] = argv;
  const flags = new Map<string, string>();
  const bools = new Set<string>();
  for (let i = 0; i < rest.length; i++) {
    const token = rest[i];
    if (!token.startsWith("--")) throw new UsageError(`unexpected argument ${token}`);
    const name = token.slice(2);
    if (BOOL_FLAGS.has(name)) {
      bools.add(name);
      continue;
    }
    if (i + 1 >= rest.length) throw new UsageError(`flag --${name} needs a value`);
    flags.set(name, rest[++i]);
  }
  return { command, flags, bools };
}

function required(args: Args, name: string): string {
  const v = args.flags.get(name);
  if (v === undefined) throw new UsageError(`--${name} is required`);
  return v;
}

function intFlag(args: Args, name: string, fallback: number): number {
  const v = args.flags.get(name);
  if (v === undefined) return fallback;
  const n = parseInt(v, 10);
  if (!Number.isFinite(n) || String(n) !== v) throw new UsageError(`--${name} must be an integer`);
  return n;
}

function classList(args: Args): string[] {
  const names = required(args, "classes")
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
  if (names.length === 0) throw new UsageError("--classes lists no names");
  return names;
}

async function cmdSynonyms(args: Args): Promise<void> {
  const cache = GenerationCache.load(required(args, "cache"));
  const provider = providerByName(args.flags.get("provider") ?? "builtin");
  const result = await fetchSynonyms(
    classList(args),
    provider,
    intFlag(args, "max", 5),
    cache,
    { offline: args.bools.has("offline") },
  );
  if (!args.bools.has("offline")) cache.save();
  for (const [className, items] of result) {
    console.log(`${className}: ${items.join(" | ")}`);
  }
}

async function cmdDescriptions(args: Args): Promise<void> {
  const cache = GenerationCache.load(required(args, "cache"));
  const provider = providerByName(args.flags.get("provider") ?? "builtin");
  const result = await fetchDescriptions(
    classList(args),
    required(args, "context"),
    provider,
    cache,
    { offline: args.bools.has("offline") },
  );
  if (!args.bools.has("offline")) cache.save();
  for (const [className, items] of result) {
    console.log(`${className}:`);
    for (const item of items) console.log(`  - ${item}`);
  }
}

async function cmdEncodeText(args: Args): Promise<void> {
  const cache = GenerationCache.load(required(args, "cache"));
  const provider = providerByName(args.flags.get("provider") ?? "builtin");
  const encoder = encoderByName(required(args, "model"));
  const out = required(args, "out");
  const offline = args.bools.has("offline");
  const classes = classList(args);

  const synonyms = await fetchSynonyms(classes, provider, intFlag(args, "max", 5), cache, {
    offline,
  });
  const context = args.flags.get("context") ?? "a photograph collection";
  const descriptions = await fetchDescriptions(classes, context, provider, cache, { offline });
  if (!offline) cache.save();

  const prompts = encodePrompts(synonyms, descriptions, encoder);
  assertUnitRows(prompts.matrix, "text prompts");
  writeCpeb(prompts.matrix, path.join(out, "text_prompts.cpeb"));
  writeJson({ rows: prompts.provenance }, path.join(out, "text_rows.json"));
  writeJson({ classes: prompts.classes }, path.join(out, "classes.json"));
  console.log(`${prompts.matrix.rows} prompt rows x ${prompts.matrix.dim} dims -> ${out}`);
}

async function cmdEncodeViews(args: Args): Promise<void> {
  const encoder = encoderByName(required(args, "model"));
  const out = required(args, "out");
  const imageId = required(args, "image-id");
  const img = renderImage(imageId, intFlag(args, "size", 64));
  const specs = generateCropSpecs(intFlag(args, "seed", 0), intFlag(args, "n-crops", 100));
  const views = encodeViews(img, specs, encoder);
  assertUnitRows(views, `views for ${imageId}`);
  writeCpeb(views, path.join(out, "views", `${imageId}.cpeb`));
  writeJson(
    { image_id: imageId, crop_specs: specs.map(cropSpecToJson) },
    path.join(out, "crop_specs", `${imageId}.json`),
  );
  console.log(`${views.rows} view rows -> ${out}`);
}

async function cmdAttention(args: Args): Promise<void> {
  const model = attentionModelByName(required(args, "model"));
  const out = required(args, "out");
  const imageId = required(args, "image-id");
  const img = renderImage(imageId, intFlag(args, "size", 64));
  const side = intFlag(args, "attention-size", 16);
  const attn = extractAttention(img, model, side, side);
  writeCpea(attn.values, attn.height, attn.width, path.join(out, "attention", `${imageId}.cpea`));
  console.log(`${attn.height}x${attn.width} attention map -> ${out}`);
}

async function cmdSample(args: Args): Promise<void> {
  await generateSample(required(args, "out"), required(args, "cache"), {
    offline: args.bools.has("offline"),
  });
  console.log(`sample dataset -> ${required(args, "out")}`);
}

const COMMANDS: Record<string, (args: Args) => Promise<void>> = {
  synonyms: cmdSynonyms,
  descriptions: cmdDescriptions,
  "encode-text": cmdEncodeText,
  "encode-views": cmdEncodeViews,
  attention: cmdAttention,
  sample: cmdSample,
};

export async function main(argv: string[]): Promise<number> {
  try {
    const args = parseArgs(argv);
    const handler = COMMANDS[args.command];
    if (!handler) {
      throw new UsageError(
        `unknown command ${args.command}; expected one of ${Object.keys(COMMANDS).join(", ")}`,
      );
    }
    await handler(args);
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    if (err instanceof IngestError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;

if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
