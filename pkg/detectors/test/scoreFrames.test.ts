import { mkdtempSync, mkdirSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ManifestError, validateManifest } from "../src/detectors.js";
import { scoreFrames } from "../src/scoreFrames.js";
import { validateScoreLine, validateStream } from "../src/schema.js";

const MOCK_MANIFEST = validateManifest({
  violence: { model: "mock", version: "1" },
  police: { model: "mock", version: "1" },
  crowd: { model: "mock", version: "1" },
  faces: { model: "mock", version: "1" },
  identity: { model: "mock", version: "1" },
});

function imageDir(videoId: string, count: number): string {
  const root = mkdtempSync(join(tmpdir(), "frames-"));
  const dir = join(root, videoId);
  mkdirSync(dir);
  for (let t = 0; t < count; t++) {
    writeFileSync(join(dir, `${String(t).padStart(5, "0")}.jpg`), `jpeg ${t}`);
  }
  return dir;
}

describe("scoreFrames", () => {
  it("emits one schema-valid line per image in t order", async () => {
    const dir = imageDir("clip_a", 10);
    const out = join(dir, "..", "scores.ndjson");
    const result = await scoreFrames(dir, MOCK_MANIFEST, out);
    expect(result.lines).toHaveLength(10);
    expect(result.warnings).toHaveLength(0);
    const parsed = readFileSync(out, "utf8")
      .trim()
      .split("\n")
      .map((line) => validateScoreLine(JSON.parse(line)));
    validateStream(parsed);
    expect(parsed.map((l) => l.t_index)).toEqual([...Array(10).keys()]);
    expect(new Set(parsed.map((l) => l.video_id))).toEqual(new Set(["clip_a"]));
  });

  it("is deterministic across runs and worker counts", async () => {
    const dir = imageDir("clip_b", 12);
    const out1 = join(dir, "..", "one.ndjson");
    const out2 = join(dir, "..", "two.ndjson");
    await scoreFrames(dir, MOCK_MANIFEST, out1, 1);
    await scoreFrames(dir, MOCK_MANIFEST, out2, 8);
    expect(readFileSync(out1, "utf8")).toBe(readFileSync(out2, "utf8"));
  });

  it("writes an empty file and warns on an empty directory", async () => {
    const root = mkdtempSync(join(tmpdir(), "frames-"));
    const dir = join(root, "empty_clip");
    mkdirSync(dir);
    const out = join(root, "scores.ndjson");
    const result = await scoreFrames(dir, MOCK_MANIFEST, out);
    expect(result.lines).toHaveLength(0);
    expect(result.warnings.some((w) => w.includes("no frame images"))).toBe(true);
    expect(readFileSync(out, "utf8")).toBe("");
  });

  it("emits a sentinel line and warning for an unreadable image", async () => {
    const dir = imageDir("clip_c", 3);
    // a directory with an image name can never be read as bytes, even by root
    rmSync(join(dir, "00001.jpg"));
    mkdirSync(join(dir, "00001.jpg"));
    const out = join(dir, "..", "scores.ndjson");
    const result = await scoreFrames(dir, MOCK_MANIFEST, out);
    expect(result.lines).toHaveLength(3);
    const sentinel = result.lines[1];
    expect(sentinel.violence).toBe(0);
    expect(sentinel.faces).toEqual([]);
    expect(result.warnings.some((w) => w.includes("00001.jpg"))).toBe(true);
  });

  it("aborts up front when a model is not available", async () => {
    const dir = imageDir("clip_d", 2);
    const manifest = {
      ...MOCK_MANIFEST,
      violence: { model: "resnet50-finetuned", version: "3" },
    };
    await expect(
      scoreFrames(dir, manifest, join(dir, "..", "scores.ndjson")),
    ).rejects.toThrow(ManifestError);
  });
});

describe("validateManifest", () => {
  it("requires every role", () => {
    expect(() => validateManifest({ violence: { model: "mock" } })).toThrow(
      /missing the police detector/,
    );
  });

  it("rejects unknown roles", () => {
    expect(() =>
      validateManifest({
        ...MOCK_MANIFEST,
        audio: { model: "mock" },
      }),
    ).toThrow(/unknown manifest role/);
  });
});
