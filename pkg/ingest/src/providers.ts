/**
 * Generation providers behind a single interface.
 *
 * Real deployments plug an HTTP-backed provider in here. The sandbox has no
 * model credentials, so the shipped provider is a deterministic builtin: a
 * small curated table for classes with well-known alternate names, plus a
 * rule-based fallback. Whatever provider runs, responses land in the
 * append-only cache and later stages read only the cache.
 */

import { IngestError } from "./errors.js";

export interface Provider {
  readonly name: string;
  generate(prompt: string, className: string): Promise<string[]>;
}

export const SYNONYM_TEMPLATE =
  "Tell me in five words or less what are some common ways of referring to {class_name}?";

export const DESCRIPTION_TEMPLATE =
  "Describe distinguishing visual features of {class_name} in the context of {dataset_context}, one short phrase per line.";

const CURATED_SYNONYMS: Record<string, string[]> = {
  hellebore: ["christmas rose", "lenten rose", "winter rose", "helleborus"],
  boxer: ["boxer dog", "german boxer", "deutscher boxer"],
  "tabby cat": ["tabby", "striped cat", "tiger cat", "grey tabby"],
  sunflower: ["helianthus", "common sunflower"],
  beagle: ["beagle hound", "english beagle"],
};

const CURATED_DESCRIPTIONS: Record<string, string[]> = {
  hellebore: [
    "five broad overlapping sepals in white, green, or dusky purple",
    "nodding cup-shaped flower above dark evergreen leaves",
  ],
  boxer: [
    "square muzzle with an underbite and loose jowls",
    "short fawn or brindle coat with a white chest blaze",
  ],
  "tabby cat": [
    "striped or swirled coat with an M-shaped marking on the forehead",
    "banded legs and tail with a lighter belly",
  ],
  sunflower: [
    "large yellow ray petals around a dark seed disc",
    "tall rough stem with broad heart-shaped leaves",
  ],
  beagle: [
    "tricolor coat with long drooping ears",
    "white-tipped tail carried upright",
  ],
};

class BuiltinProvider implements Provider {
  readonly name = "builtin";

  async generate(prompt: string, className: string): Promise<string[]> {
    const curated = prompt.startsWith("Tell me")
      ? CURATED_SYNONYMS[className]
      : CURATED_DESCRIPTIONS[className];
    if (curated) return [...curated];
    if (prompt.startsWith("Tell me")) {
      // Rule-based stand-in for classes outside the curated table.
      return [`the ${className}`, `${className} variety`, `common ${className}`];
    }
    return [
      `typical form and coloring of a ${className}`,
      `a ${className} photographed against a plain background`,
    ];
  }
}

/** Provider that fails a fixed number of times before succeeding; test-only. */
export class FlakyProvider implements Provider {
  readonly name = "flaky";
  private failures: number;

  constructor(failures: number, private inner: Provider = new BuiltinProvider()) {
    this.failures = failures;
  }

  async generate(prompt: string, className: string): Promise<string[]> {
    if (this.failures > 0) {
      this.failures -= 1;
      throw new Error("provider unavailable");
    }
    return this.inner.generate(prompt, className);
  }
}

export function providerByName(name: string): Provider {
  if (name === "builtin") return new BuiltinProvider();
  throw new IngestError(
    `unknown provider ${name}; no credentials are configured in this environment, ` +
      `use "builtin" or run offline from a populated cache`,
  );
}
