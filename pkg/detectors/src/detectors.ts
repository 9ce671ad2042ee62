/**
 * Detector roles and the manifest that binds models to score fields.
 *
 * Five roles cover the whole score line: the violence model also emits the
 * protest confidence (one model family, two heads), the face detector emits
 * head boxes, and the identity labeler annotates those boxes. Real model
 * wrappers are deliberately thin and optional; the registry ships with the
 * deterministic mock so CI never loads a model.
 *
 * A note on the identity role: automated racial-identity labeling carries
 * real risk of harm and bias against the very communities this kind of
 * analysis is about. The adapter exposes it because the downstream analysis
 * consumes a Black/non-Black flag, but anyone wiring a real model here
 * should read the ethics discussion in the README first.
 */

import { readFile } from "node:fs/promises";

import { FaceObservation } from "./schema.js";
import { hash32, mulberry32 } from "./prng.js";

export const ROLES = ["violence", "police", "crowd", "faces", "identity"] as const;
export type Role = (typeof ROLES)[number];

/** Which score-line fields each role populates; t_index comes from the file name. */
export const ROLE_FIELDS: Record<Role, string[]> = {
  violence: ["violence", "protest_conf"],
  police: ["police_conf"],
  crowd: ["crowd_count"],
  faces: ["faces.head_area_fraction"],
  identity: ["faces.is_black"],
};

export interface ManifestEntry {
  model: string;
  version?: string;
}

export type DetectorManifest = Record<Role, ManifestEntry>;

export interface FrameDetections {
  violence: number;
  protest_conf: number | null;
  police_conf: number;
  crowd_count: number;
  faces: FaceObservation[];
}

export interface Detector {
  readonly role: Role;
  readonly model: string;
  /** Read one image and fill in this role's fields. */
  score(imageBytes: Buffer, imageName: string, partial: FrameDetections): void;
}

export class ManifestError extends Error {}

export function validateManifest(value: unknown): DetectorManifest {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new ManifestError("manifest must be an object keyed by detector role");
  }
  const record = value as Record<string, unknown>;
  for (const role of ROLES) {
    const entry = record[role];
    if (typeof entry !== "object" || entry === null) {
      throw new ManifestError(`manifest is missing the ${role} detector`);
    }
    if (typeof (entry as ManifestEntry).model !== "string") {
      throw new ManifestError(`manifest entry ${role} needs a model name`);
    }
  }
  const extras = Object.keys(record).filter((key) => !ROLES.includes(key as Role));
  if (extras.length > 0) {
    throw new ManifestError(`unknown manifest role(s): ${extras.join(", ")}`);
  }
  return value as DetectorManifest;
}

export async function loadManifest(path: string): Promise<DetectorManifest> {
  const raw = await readFile(path, "utf8");
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch (err) {
    throw new ManifestError(`${path}: invalid JSON: ${(err as Error).message}`);
  }
  return validateManifest(parsed);
}

/**
 * Mock detectors: deterministic pseudo-scores derived from the image bytes
 * and name, so a fixed directory always produces the same stream.
 */
function mockDetector(role: Role): Detector {
  return {
    role,
    model: "mock",
    score(imageBytes, imageName, partial) {
      const rand = mulberry32(hash32(imageName) ^ hash32(role) ^ imageBytes.length);
      switch (role) {
        case "violence":
          partial.violence = Number(rand().toFixed(4));
          partial.protest_conf = Number(rand().toFixed(4));
          break;
        case "police":
          partial.police_conf = Number(rand().toFixed(4));
          break;
        case "crowd":
          partial.crowd_count = Math.floor(rand() * 250);
          break;
        case "faces": {
          const n = Math.floor(rand() * 4);
          partial.faces = Array.from({ length: n }, () => ({
            head_area_fraction: Number((rand() * 0.3).toFixed(4)),
            is_black: false,
          }));
          break;
        }
        case "identity":
          partial.faces = partial.faces.map((face) => ({
            ...face,
            is_black: rand() < 0.5,
          }));
          break;
      }
    },
  };
}

/**
 * Resolve a manifest entry to a detector. Only the mock is bundled; real
 * model wrappers register themselves here. An unknown model aborts, as a
 * half-scored stream is worse than no stream.
 */
export function resolveDetector(role: Role, entry: ManifestEntry): Detector {
  if (entry.model === "mock") {
    return mockDetector(role);
  }
  throw new ManifestError(
    `no ${role} wrapper for model "${entry.model}"; available models: mock`,
  );
}
