/**
 * The score-stream line format consumed by the analysis pipeline.
 *
 * One JSON object per line, one line per sampled second. This module is the
 * single source of truth for what a valid line looks like; everything the
 * adapters emit goes through validateScoreLine before it is written.
 */

export interface FaceObservation {
  head_area_fraction: number;
  is_black: boolean;
}

export interface ScoreLine {
  video_id: string;
  t_index: number;
  violence: number;
  police_conf: number;
  protest_conf: number | null;
  crowd_count: number;
  faces: FaceObservation[];
}

export class SchemaError extends Error {}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function confidence(value: unknown, field: string): number {
  if (typeof value !== "number" || Number.isNaN(value)) {
    throw new SchemaError(`field ${field} must be a number`);
  }
  if (value < 0 || value > 1) {
    throw new SchemaError(`field ${field} out of [0, 1]: ${value}`);
  }
  return value;
}

function count(value: unknown, field: string): number {
  if (typeof value !== "number" || !Number.isInteger(value)) {
    throw new SchemaError(`field ${field} must be an integer`);
  }
  if (value < 0) {
    throw new SchemaError(`field ${field} must be nonnegative: ${value}`);
  }
  return value;
}

export function validateScoreLine(value: unknown): ScoreLine {
  if (!isRecord(value)) {
    throw new SchemaError("score line must be an object");
  }
  if (typeof value.video_id !== "string" || value.video_id.length === 0) {
    throw new SchemaError("field video_id must be a nonempty string");
  }
  const protest = value.protest_conf;
  if (!Array.isArray(value.faces)) {
    throw new SchemaError("field faces must be an array");
  }
  const faces = value.faces.map((raw, i) => {
    if (!isRecord(raw)) {
      throw new SchemaError(`field faces[${i}] must be an object`);
    }
    if (typeof raw.is_black !== "boolean") {
      throw new SchemaError(`field faces[${i}].is_black must be a boolean`);
    }
    return {
      head_area_fraction: confidence(raw.head_area_fraction, `faces[${i}].head_area_fraction`),
      is_black: raw.is_black,
    };
  });
  return {
    video_id: value.video_id,
    t_index: count(value.t_index, "t_index"),
    violence: confidence(value.violence, "violence"),
    police_conf: confidence(value.police_conf, "police_conf"),
    protest_conf: protest === null ? null : confidence(protest, "protest_conf"),
    crowd_count: count(value.crowd_count, "crowd_count"),
    faces,
  };
}

/** Serialize with a fixed field order so output files are reproducible. */
export function serializeScoreLine(line: ScoreLine): string {
  return JSON.stringify({
    video_id: line.video_id,
    t_index: line.t_index,
    violence: line.violence,
    police_conf: line.police_conf,
    protest_conf: line.protest_conf,
    crowd_count: line.crowd_count,
    faces: line.faces.map((f) => ({
      head_area_fraction: f.head_area_fraction,
      is_black: f.is_black,
    })),
  });
}

/** Streams must also be in strictly increasing t_index order per video. */
export function validateStream(lines: ScoreLine[]): ScoreLine[] {
  const last = new Map<string, number>();
  for (const line of lines) {
    const prev = last.get(line.video_id);
    if (prev !== undefined && line.t_index <= prev) {
      throw new SchemaError(
        `video ${line.video_id}: t_index ${line.t_index} after ${prev} is not increasing`,
      );
    }
    last.set(line.video_id, line.t_index);
  }
  return lines;
}
