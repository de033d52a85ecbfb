/**
 * Synonym and description acquisition with cache-first semantics.
 *
 * A class already in the cache never triggers a provider call and always
 * yields the identical strings. In offline mode a cache miss is an error
 * naming every missing class; in online mode each miss is retried before
 * giving up, and the failure still lists the full set of missing classes so
 * one run reports everything.
 */

import { GenerationCache } from "./cache.js";
import { IngestError } from "./errors.js";
import {
  DESCRIPTION_TEMPLATE,
  Provider,
  SYNONYM_TEMPLATE,
} from "./providers.js";

export interface FetchOptions {
  offline?: boolean;
  retries?: number;
}

async function fetchGenerations(
  classNames: string[],
  template: string,
  renderPrompt: (className: string) => string,
  provider: Provider,
  cache: GenerationCache,
  options: FetchOptions,
): Promise<Map<string, string[]>> {
  const retries = options.retries ?? 2;
  const results = new Map<string, string[]>();
  const missing: string[] = [];

  for (const className of classNames) {
    const hit = cache.get(provider.name, template, className);
    if (hit) {
      results.set(className, [...hit.items]);
      continue;
    }
    if (options.offline) {
      missing.push(className);
      continue;
    }
    let items: string[] | null = null;
    for (let attempt = 0; attempt <= retries && items === null; attempt++) {
      try {
        items = await provider.generate(renderPrompt(className), className);
      } catch {
        items = null;
      }
    }
    if (items === null) {
      missing.push(className);
      continue;
    }
    cache.insert({
      provider: provider.name,
      template,
      className,
      items,
      timestamp: new Date().toISOString(),
    });
    results.set(className, [...items]);
  }

  if (missing.length > 0) {
    const mode = options.offline ? "offline cache miss" : "provider failure";
    throw new IngestError(`${mode} for classes: ${missing.join(", ")}`);
  }
  return results;
}

/**
 * Synonyms per class: the original name first, then up to mStar cached
 * generations. The cache keeps the provider response untruncated.
 */
export async function fetchSynonyms(
  classNames: string[],
  provider: Provider,
  mStar: number,
  cache: GenerationCache,
  options: FetchOptions = {},
): Promise<Map<string, string[]>> {
  if (mStar < 1) throw new IngestError(`synonym budget must be >= 1, got ${mStar}`);
  const raw = await fetchGenerations(
    classNames,
    SYNONYM_TEMPLATE,
    (c) => SYNONYM_TEMPLATE.replace("{class_name}", c),
    provider,
    cache,
    options,
  );
  const out = new Map<string, string[]>();
  for (const [className, items] of raw) {
    out.set(className, [className, ...items.slice(0, mStar)]);
  }
  return out;
}

export async function fetchDescriptions(
  classNames: string[],
  datasetContext: string,
  provider: Provider,
  cache: GenerationCache,
  options: FetchOptions = {},
): Promise<Map<string, string[]>> {
  const template = DESCRIPTION_TEMPLATE.replace("{dataset_context}", datasetContext);
  const out = await fetchGenerations(
    classNames,
    template,
    (c) => template.replace("{class_name}", c),
    provider,
    cache,
    options,
  );
  for (const [className, items] of out) {
    if (items.length === 0) {
      throw new IngestError(`provider returned no descriptions for ${className}`);
    }
  }
  return out;
}
