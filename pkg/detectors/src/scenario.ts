/**
 * Scripted scenarios: a declarative description of what the detectors should
 * "see" at each second of a synthetic video.
 *
 * A scenario starts from a quiet baseline, applies segment overrides over
 * inclusive [start, end] second ranges, optionally skips seconds entirely
 * (to simulate dropped frames) and optionally adds bounded deterministic
 * noise. Expansion is pure: the same scenario and seed always produce the
 * same lines.
 */

import { FaceObservation, ScoreLine, validateScoreLine } from "./schema.js";
import { hash32, mulberry32 } from "./prng.js";

export interface Segment {
  start: number;
  end: number;
  violence?: number;
  police_conf?: number;
  protest_conf?: number | null;
  crowd_count?: number;
  faces?: FaceObservation[];
}

export interface NoiseSpec {
  /** peak absolute jitter added to violence/police/protest confidences */
  amplitude: number;
}

export interface Scenario {
  video_id: string;
  duration_s: number;
  baseline?: Partial<Omit<ScoreLine, "video_id" | "t_index">>;
  skip_seconds?: number[];
  segments: Segment[];
  noise?: NoiseSpec;
  expected?: Record<string, boolean>;
}

export interface ScenarioFile {
  scenarios: Scenario[];
}

const QUIET_BASELINE = {
  violence: 0.02,
  police_conf: 0.02,
  protest_conf: null as number | null,
  crowd_count: 0,
  faces: [] as FaceObservation[],
};

function clamp01(value: number): number {
  return Math.min(1, Math.max(0, value));
}

export function expandScenario(scenario: Scenario, seed = 0): ScoreLine[] {
  if (!Number.isInteger(scenario.duration_s) || scenario.duration_s < 0) {
    throw new Error(`scenario ${scenario.video_id}: bad duration_s ${scenario.duration_s}`);
  }
  const skip = new Set(scenario.skip_seconds ?? []);
  const noise = scenario.noise;
  const rand = mulberry32(hash32(scenario.video_id) ^ (seed >>> 0));
  const lines: ScoreLine[] = [];
  for (let t = 0; t < scenario.duration_s; t++) {
    if (skip.has(t)) continue;
    const row = { ...QUIET_BASELINE, ...(scenario.baseline ?? {}) };
    for (const segment of scenario.segments) {
      if (segment.start <= t && t <= segment.end) {
        if (segment.violence !== undefined) row.violence = segment.violence;
        if (segment.police_conf !== undefined) row.police_conf = segment.police_conf;
        if (segment.protest_conf !== undefined) row.protest_conf = segment.protest_conf;
        if (segment.crowd_count !== undefined) row.crowd_count = segment.crowd_count;
        if (segment.faces !== undefined) row.faces = segment.faces;
      }
    }
    if (noise && noise.amplitude > 0) {
      const jitter = () => (rand() * 2 - 1) * noise.amplitude;
      row.violence = Number(clamp01(row.violence + jitter()).toFixed(4));
      row.police_conf = Number(clamp01(row.police_conf + jitter()).toFixed(4));
      if (row.protest_conf !== null) {
        row.protest_conf = Number(clamp01(row.protest_conf + jitter()).toFixed(4));
      }
    }
    lines.push(
      validateScoreLine({
        video_id: scenario.video_id,
        t_index: t,
        ...row,
      }),
    );
  }
  return lines;
}
