/** Test fixtures: datasets produced by the upstream pipeline CLI. */

import { execFileSync } from "child_process";
import * as fs from "fs";
import * as path from "path";

const CACHE_ROOT = path.join(__dirname, ".cache");

/** Runs the pipeline CLI (synth -> transform -> featurize) once per
 * (cases, seed) and caches the resulting dataset directory. */
export function ensureDataset(cases: number, seed: number): string {
  const root = path.join(CACHE_ROOT, `ds-${cases}-${seed}`);
  const datasetDir = path.join(root, "dataset");
  if (fs.existsSync(path.join(datasetDir, "meta.json"))) {
    return datasetDir;
  }
  fs.mkdirSync(root, { recursive: true });
  const work = path.join(root, "work");
  const run = (args: string[]) => {
    execFileSync("codesight", args, { stdio: "pipe" });
  };
  run(["synth", "--cases", String(cases), "--seed", String(seed), "--out", work]);
  run(["transform", "--snapshot", path.join(work, "snapshot.json"),
       "--out", path.join(work, "events.csv")]);
  run(["featurize", "--log", path.join(work, "events.csv"),
       "--snapshot", path.join(work, "snapshot.json"),
       "--out", datasetDir, "--seed", String(seed)]);
  return datasetDir;
}
