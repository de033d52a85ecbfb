import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { main } from "../src/cli.js";

const CACHE_DIR = fileURLToPath(new URL("../cache", import.meta.url));

let tmp: string;

beforeEach(() => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), "cpe-cli-"));
  vi.spyOn(console, "log").mockImplementation(() => {});
  vi.spyOn(console, "error").mockImplementation(() => {});
});

afterEach(() => {
  fs.rmSync(tmp, { recursive: true, force: true });
  vi.restoreAllMocks();
});

describe("cli", () => {
  it("rejects an unknown command", async () => {
    expect(await main(["frobnicate"])).toBe(2);
    expect(await main([])).toBe(2);
  });

  it("rejects a missing required flag", async () => {
    expect(await main(["encode-views", "--out", tmp])).toBe(2);
    expect(await main(["synonyms", "--cache", tmp, "--classes"])).toBe(2);
  });

  it("encode-views writes view rows and crop specs", async () => {
    const code = await main([
      "encode-views",
      "--image-id",
      "probe",
      "--out",
      tmp,
      "--model",
      "synthetic-16",
      "--n-crops",
      "4",
      "--size",
      "32",
    ]);
    expect(code).toBe(0);
    expect(fs.existsSync(path.join(tmp, "views", "probe.cpeb"))).toBe(true);
    const specs = JSON.parse(
      fs.readFileSync(path.join(tmp, "crop_specs", "probe.json"), "utf8"),
    );
    expect(specs.image_id).toBe("probe");
    expect(specs.crop_specs).toHaveLength(4);
  });

  it("reports unavailable checkpoints as errors, not usage mistakes", async () => {
    const code = await main([
      "encode-views",
      "--image-id",
      "probe",
      "--out",
      tmp,
      "--model",
      "vit-b-32",
    ]);
    expect(code).toBe(1);
  });

  it("serves synonyms offline from the committed cache", async () => {
    const code = await main([
      "synonyms",
      "--classes",
      "hellebore,boxer",
      "--cache",
      CACHE_DIR,
      "--offline",
    ]);
    expect(code).toBe(0);
    const logged = (console.log as ReturnType<typeof vi.fn>).mock.calls
      .map((c) => String(c[0]))
      .join("\n");
    expect(logged).toContain("christmas rose");
  });

  it("attention writes a map with the requested side", async () => {
    const code = await main([
      "attention",
      "--image-id",
      "probe",
      "--out",
      tmp,
      "--model",
      "constant",
      "--attention-size",
      "8",
    ]);
    expect(code).toBe(0);
    expect(fs.existsSync(path.join(tmp, "attention", "probe.cpea"))).toBe(true);
  });
});
