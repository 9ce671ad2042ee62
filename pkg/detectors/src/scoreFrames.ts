/**
 * Score a directory of per-second frame images into a score-stream file.
 *
 * Images follow the extraction naming convention: the directory is the
 * video id and each file is the zero-padded second it was sampled at
 * (00000.jpg, 00001.jpg, ...). Scoring may run on a worker pool, but lines
 * are buffered and written in t_index order regardless of completion order.
 */

import { readdir, readFile } from "node:fs/promises";
import { basename, join } from "node:path";

import {
  Detector,
  DetectorManifest,
  ROLES,
  resolveDetector,
} from "./detectors.js";
import { FrameDetections } from "./detectors.js";
import { ScoreLine, serializeScoreLine, validateScoreLine } from "./schema.js";
import { mkdirSync, renameSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { randomBytes } from "node:crypto";

export interface ScoreFramesResult {
  lines: ScoreLine[];
  warnings: string[];
}

const IMAGE_PATTERN = /^(\d{5})\.jpe?g$/i;

// An unreadable image still gets a line so the stream has no silent holes;
// all-quiet scores are the sentinel and the warning carries the reason.
function sentinelLine(videoId: string, t: number): ScoreLine {
  return {
    video_id: videoId,
    t_index: t,
    violence: 0,
    police_conf: 0,
    protest_conf: null,
    crowd_count: 0,
    faces: [],
  };
}

async function scoreOne(
  videoId: string,
  path: string,
  t: number,
  detectors: Detector[],
  warnings: string[],
): Promise<ScoreLine> {
  let bytes: Buffer;
  try {
    bytes = await readFile(path);
  } catch (err) {
    warnings.push(`unreadable image ${path}: ${(err as Error).message}`);
    return sentinelLine(videoId, t);
  }
  const partial: FrameDetections = {
    violence: 0,
    protest_conf: null,
    police_conf: 0,
    crowd_count: 0,
    faces: [],
  };
  for (const detector of detectors) {
    detector.score(bytes, basename(path), partial);
  }
  return validateScoreLine({ video_id: videoId, t_index: t, ...partial });
}

export async function scoreFrames(
  imageDir: string,
  manifest: DetectorManifest,
  outPath: string,
  workers = 4,
): Promise<ScoreFramesResult> {
  // resolve every detector up front: a missing model must abort before any
  // output is produced, not halfway through a file
  const detectors = ROLES.map((role) => resolveDetector(role, manifest[role]));

  const entries = await readdir(imageDir);
  const frames = entries
    .map((name) => {
      const match = IMAGE_PATTERN.exec(name);
      return match ? { t: Number(match[1]), path: join(imageDir, name) } : null;
    })
    .filter((f): f is { t: number; path: string } => f !== null)
    .sort((a, b) => a.t - b.t);

  const videoId = basename(imageDir);
  const warnings: string[] = [];
  if (frames.length === 0) {
    warnings.push(`${imageDir}: no frame images found`);
  }

  const lines: ScoreLine[] = new Array(frames.length);
  let next = 0;
  const pool = Array.from({ length: Math.max(1, workers) }, async () => {
    while (next < frames.length) {
      const index = next++;
      const frame = frames[index];
      lines[index] = await scoreOne(videoId, frame.path, frame.t, detectors, warnings);
    }
  });
  await Promise.all(pool);

  writeAtomic(outPath, lines.map(serializeScoreLine).join("\n") + (lines.length ? "\n" : ""));
  for (const warning of warnings) {
    console.warn(warning);
  }
  return { lines, warnings };
}

function writeAtomic(path: string, text: string): void {
  mkdirSync(dirname(path) || ".", { recursive: true });
  const tmp = join(dirname(path) || ".", `.${randomBytes(6).toString("hex")}.tmp`);
  writeFileSync(tmp, text);
  renameSync(tmp, path);
}
