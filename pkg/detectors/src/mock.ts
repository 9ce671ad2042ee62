/**
 * The mock detector: scripted scenarios in, schema-valid score-stream file
 * out. This is the test double the whole pipeline is exercised with; no
 * vision model is involved anywhere.
 */

import { mkdirSync, writeFileSync, renameSync } from "node:fs";
import { dirname, join } from "node:path";
import { randomBytes } from "node:crypto";

import { serializeScoreLine, validateStream, ScoreLine } from "./schema.js";
import { expandScenario, Scenario, ScenarioFile } from "./scenario.js";

export function mockScoreLines(scenarios: Scenario[], seed = 0): ScoreLine[] {
  const lines: ScoreLine[] = [];
  for (const scenario of scenarios) {
    lines.push(...expandScenario(scenario, seed));
  }
  return validateStream(lines);
}

function writeAtomic(path: string, text: string): void {
  mkdirSync(dirname(path) || ".", { recursive: true });
  const tmp = join(dirname(path) || ".", `.${randomBytes(6).toString("hex")}.tmp`);
  writeFileSync(tmp, text);
  renameSync(tmp, path);
}

export function mockScoreFrames(file: ScenarioFile, outPath: string, seed = 0): ScoreLine[] {
  const lines = mockScoreLines(file.scenarios, seed);
  writeAtomic(outPath, lines.map(serializeScoreLine).join("\n") + (lines.length ? "\n" : ""));
  return lines;
}

/** The labels each scenario was scripted to produce, in classify-output form. */
export function expectedLabelLines(file: ScenarioFile): string {
  const lines = file.scenarios.map((scenario) => {
    if (!scenario.expected) {
      throw new Error(`scenario ${scenario.video_id} has no expected labels`);
    }
    return JSON.stringify({ video_id: scenario.video_id, ...scenario.expected });
  });
  return lines.join("\n") + (lines.length ? "\n" : "");
}

export function writeExpectedLabels(file: ScenarioFile, outPath: string): void {
  writeAtomic(outPath, expectedLabelLines(file));
}
