#!/usr/bin/env node
/**
 * score-adapters CLI.
 *
 *   score-adapters score-frames <image_dir> --manifest <path> --out <path>
 *   score-adapters mock <scenarios.json> --out <path> [--expected <path>] [--seed <n>]
 */

import { readFile } from "node:fs/promises";
import process from "node:process";

import { loadManifest } from "./detectors.js";
import { mockScoreFrames, writeExpectedLabels } from "./mock.js";
import { ScenarioFile } from "./scenario.js";
import { scoreFrames } from "./scoreFrames.js";

interface Flags {
  positional: string[];
  options: Map<string, string>;
}

function parseArgs(argv: string[]): Flags {
  const positional: string[] = [];
  const options = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith("--")) {
      const value = argv[i + 1];
      if (value === undefined) {
        throw new Error(`flag ${arg} needs a value`);
      }
      options.set(arg.slice(2), value);
      i++;
    } else {
      positional.push(arg);
    }
  }
  return { positional, options };
}

function required(flags: Flags, name: string): string {
  const value = flags.options.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

async function cmdScoreFrames(flags: Flags): Promise<void> {
  const [imageDir] = flags.positional;
  if (!imageDir) {
    throw new Error("usage: score-frames <image_dir> --manifest <path> --out <path>");
  }
  const manifest = await loadManifest(required(flags, "manifest"));
  const out = required(flags, "out");
  const result = await scoreFrames(imageDir, manifest, out);
  console.log(`scored ${result.lines.length} frame(s) -> ${out}`);
}

async function cmdMock(flags: Flags): Promise<void> {
  const [scenarioPath] = flags.positional;
  if (!scenarioPath) {
    throw new Error("usage: mock <scenarios.json> --out <path> [--expected <path>] [--seed <n>]");
  }
  const file = JSON.parse(await readFile(scenarioPath, "utf8")) as ScenarioFile;
  if (!Array.isArray(file.scenarios)) {
    throw new Error(`${scenarioPath}: expected an object with a scenarios array`);
  }
  const seed = Number(flags.options.get("seed") ?? "0");
  const out = required(flags, "out");
  const lines = mockScoreFrames(file, out, seed);
  console.log(`wrote ${lines.length} scripted line(s) for ${file.scenarios.length} scenario(s) -> ${out}`);
  const expected = flags.options.get("expected");
  if (expected !== undefined) {
    writeExpectedLabels(file, expected);
    console.log(`wrote expected labels -> ${expected}`);
  }
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const flags = parseArgs(rest);
    if (command === "score-frames") {
      await cmdScoreFrames(flags);
    } else if (command === "mock") {
      await cmdMock(flags);
    } else {
      console.error("usage: score-adapters <score-frames|mock> ...");
      return 1;
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
