export {
  SchemaError,
  serializeScoreLine,
  validateScoreLine,
  validateStream,
} from "./schema.js";
export type { FaceObservation, ScoreLine } from "./schema.js";
export { expandScenario } from "./scenario.js";
export type { Scenario, ScenarioFile, Segment } from "./scenario.js";
export {
  expectedLabelLines,
  mockScoreFrames,
  mockScoreLines,
  writeExpectedLabels,
} from "./mock.js";
export {
  ManifestError,
  ROLES,
  ROLE_FIELDS,
  loadManifest,
  resolveDetector,
  validateManifest,
} from "./detectors.js";
export type { Detector, DetectorManifest, ManifestEntry } from "./detectors.js";
export { scoreFrames } from "./scoreFrames.js";
