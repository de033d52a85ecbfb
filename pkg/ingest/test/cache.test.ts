import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, describe, expect, it } from "vitest";
import { GenerationCache, GenerationRecord } from "../src/cache.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "ingest-cache-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function record(className: string, items: string[]): GenerationRecord {
  return {
    provider: "builtin",
    template: "t {class_name}",
    className,
    items,
    timestamp: "2026-08-22T00:00:00.000Z",
  };
}

describe("GenerationCache", () => {
  it("starts empty for a missing directory", () => {
    const cache = GenerationCache.load(path.join(tmp, "nope"));
    expect(cache.size).toBe(0);
    expect(cache.get("builtin", "t", "x")).toBeNull();
  });

  it("round-trips through save and load", () => {
    const dir = path.join(tmp, "rt");
    const cache = GenerationCache.load(dir);
    cache.insert(record("boxer", ["boxer dog"]));
    cache.insert(record("hellebore", ["lenten rose", "christmas rose"]));
    cache.save();

    const again = GenerationCache.load(dir);
    expect(again.size).toBe(2);
    expect(again.get("builtin", "t {class_name}", "hellebore")?.items).toEqual([
      "lenten rose",
      "christmas rose",
    ]);
  });

  it("treats identical re-inserts as no-ops", () => {
    const cache = GenerationCache.load(path.join(tmp, "noop"));
    cache.insert(record("boxer", ["boxer dog"]));
    cache.insert(record("boxer", ["boxer dog"]));
    expect(cache.size).toBe(1);
  });

  it("refuses to overwrite an existing key with different items", () => {
    const cache = GenerationCache.load(path.join(tmp, "ro"));
    cache.insert(record("boxer", ["boxer dog"]));
    expect(() => cache.insert(record("boxer", ["something else"]))).toThrow(/append-only/);
  });

  it("keys by provider, template, and class name", () => {
    const cache = GenerationCache.load(path.join(tmp, "keys"));
    cache.insert(record("boxer", ["a"]));
    cache.insert({ ...record("boxer", ["b"]), provider: "other" });
    cache.insert({ ...record("boxer", ["c"]), template: "t2" });
    expect(cache.size).toBe(3);
    expect(cache.get("other", "t {class_name}", "boxer")?.items).toEqual(["b"]);
  });

  it("rejects a corrupt cache file", () => {
    const dir = path.join(tmp, "bad");
    fs.mkdirSync(dir, { recursive: true });
    fs.writeFileSync(path.join(dir, "generations.json"), "{not json");
    expect(() => GenerationCache.load(dir)).toThrow(/not valid JSON/);
  });
});
