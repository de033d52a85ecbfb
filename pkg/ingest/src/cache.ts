/**
 * Append-only cache of LLM generations.
 *
 * Every synonym/description request goes through this cache so the test
 * suite and fixture regeneration never need network access. Records are
 * keyed by (provider, prompt template, class name); a key, once written, is
 * never mutated. Stored items are the provider's response verbatim;
 * truncation to a synonym budget happens downstream.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { IngestError } from "./errors.js";

export interface GenerationRecord {
  provider: string;
  template: string;
  className: string;
  items: string[];
  timestamp: string;
}

const CACHE_FILE = "generations.json";

function keyOf(provider: string, template: string, className: string): string {
  return JSON.stringify([provider, template, className]);
}

export class GenerationCache {
  private records: GenerationRecord[] = [];
  private index = new Map<string, GenerationRecord>();

  constructor(readonly dir: string) {}

  static load(dir: string): GenerationCache {
    const cache = new GenerationCache(dir);
    const file = path.join(dir, CACHE_FILE);
    if (!fs.existsSync(file)) return cache;
    let parsed: unknown;
    try {
      parsed = JSON.parse(fs.readFileSync(file, "utf-8"));
    } catch (err) {
      throw new IngestError(`cache file ${file} is not valid JSON: ${err}`);
    }
    if (!Array.isArray(parsed)) {
      throw new IngestError(`cache file ${file} must hold a JSON array`);
    }
    for (const rec of parsed as GenerationRecord[]) {
      cache.insert(rec);
    }
    return cache;
  }

  get size(): number {
    return this.records.length;
  }

  all(): readonly GenerationRecord[] {
    return this.records;
  }

  get(provider: string, template: string, className: string): GenerationRecord | null {
    return this.index.get(keyOf(provider, template, className)) ?? null;
  }

  /**
   * Add a record. Re-adding an identical record is a no-op; trying to change
   * an existing key is an error, because cached generations are the ground
   * truth downstream artifacts were built from.
   */
  insert(rec: GenerationRecord): void {
    const key = keyOf(rec.provider, rec.template, rec.className);
    const existing = this.index.get(key);
    if (existing) {
      const same = JSON.stringify(existing.items) === JSON.stringify(rec.items);
      if (!same) {
        throw new IngestError(
          `cache is append-only: refusing to overwrite entry for ${rec.className} ` +
            `(provider ${rec.provider})`,
        );
      }
      return;
    }
    this.records.push(rec);
    this.index.set(key, rec);
  }

  /** Persist to <dir>/generations.json. Single-writer; last save wins. */
  save(): void {
    fs.mkdirSync(this.dir, { recursive: true });
    const file = path.join(this.dir, CACHE_FILE);
    const tmp = file + ".tmp";
    fs.writeFileSync(tmp, JSON.stringify(this.records, null, 2) + "\n");
    fs.renameSync(tmp, file);
  }
}
