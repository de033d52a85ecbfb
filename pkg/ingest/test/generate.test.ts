import { describe, expect, it } from "vitest";
import { GenerationCache } from "../src/cache.js";
import { fetchDescriptions, fetchSynonyms } from "../src/generate.js";
import { FlakyProvider, Provider, providerByName } from "../src/providers.js";

function freshCache(): GenerationCache {
  return new GenerationCache("/nonexistent-never-saved");
}

const failingProvider: Provider = {
  name: "builtin",
  generate: async () => {
    throw new Error("no network");
  },
};

describe("fetchSynonyms", () => {
  it("includes well-known alternate names", async () => {
    const result = await fetchSynonyms(["hellebore"], providerByName("builtin"), 5, freshCache());
    const items = result.get("hellebore")!;
    expect(items[0]).toBe("hellebore");
    expect(items).toContain("christmas rose");
    expect(items).toContain("lenten rose");
  });

  it("keeps only the top synonym when the budget is 1", async () => {
    const result = await fetchSynonyms(["hellebore"], providerByName("builtin"), 1, freshCache());
    expect(result.get("hellebore")).toEqual(["hellebore", "christmas rose"]);
  });

  it("serves repeat requests from the cache without a provider call", async () => {
    const cache = freshCache();
    const first = await fetchSynonyms(["boxer"], providerByName("builtin"), 5, cache);
    // same cache, but a provider that always fails: must still answer
    const second = await fetchSynonyms(["boxer"], failingProvider, 5, cache);
    expect(second.get("boxer")).toEqual(first.get("boxer"));
  });

  it("caches the provider response verbatim, untruncated", async () => {
    const cache = freshCache();
    await fetchSynonyms(["hellebore"], providerByName("builtin"), 1, cache);
    const rec = cache.all()[0];
    expect(rec.items.length).toBeGreaterThan(1);
  });

  it("fails offline with every missing class listed", async () => {
    await expect(
      fetchSynonyms(["boxer", "beagle"], providerByName("builtin"), 5, freshCache(), {
        offline: true,
      }),
    ).rejects.toThrow(/offline cache miss for classes: boxer, beagle/);
  });

  it("retries a flaky provider before failing", async () => {
    const ok = await fetchSynonyms(["boxer"], new FlakyProvider(2), 5, freshCache(), {
      retries: 2,
    });
    expect(ok.get("boxer")![0]).toBe("boxer");

    await expect(
      fetchSynonyms(["boxer"], new FlakyProvider(5), 5, freshCache(), { retries: 2 }),
    ).rejects.toThrow(/provider failure for classes: boxer/);
  });

  it("rejects a non-positive synonym budget", async () => {
    await expect(
      fetchSynonyms(["boxer"], providerByName("builtin"), 0, freshCache()),
    ).rejects.toThrow(/budget/);
  });
});

describe("fetchDescriptions", () => {
  it("returns nonempty descriptions for every class", async () => {
    const result = await fetchDescriptions(
      ["hellebore", "boxer", "some unknown thing"],
      "a photo collection",
      providerByName("builtin"),
      freshCache(),
    );
    for (const items of result.values()) {
      expect(items.length).toBeGreaterThan(0);
    }
  });

  it("is identical on offline rerun once cached", async () => {
    const cache = freshCache();
    const online = await fetchDescriptions(["boxer"], "pets", providerByName("builtin"), cache);
    const offline = await fetchDescriptions(["boxer"], "pets", failingProvider, cache, {
      offline: true,
    });
    expect(offline.get("boxer")).toEqual(online.get("boxer"));
  });

  it("keys the cache by dataset context", async () => {
    const cache = freshCache();
    await fetchDescriptions(["boxer"], "pets", providerByName("builtin"), cache);
    await expect(
      fetchDescriptions(["boxer"], "dogs at shows", failingProvider, cache, { offline: true }),
    ).rejects.toThrow(/offline cache miss/);
  });
});
