/** Dataset directory loader: the only interface to the upstream pipeline.
 *
 * Layout per split: seq.csv (activity IDs, 0-padded), dt.csv (standardized
 * log transition times), static.csv (headered float matrix), target.csv
 * (pr_id, y_log, y_seconds, elapsed_seconds, deadline_seconds); meta.json
 * carries the fitted preprocessing parameters.
 */

import * as fs from "fs";
import * as path from "path";

import { readMatrix, readTable } from "./csv";

export const SPLIT_NAMES = ["train", "val", "test"] as const;
export type SplitName = (typeof SPLIT_NAMES)[number];

export interface SplitData {
  prIds: number[];
  seq: number[][];
  dt: number[][];
  staticX: number[][];
  yLog: number[];
  ySeconds: number[];
  elapsedSeconds: number[];
  deadlineSeconds: number[];
}

export interface DatasetMeta {
  schema_version: number;
  seed: number;
  max_len: number;
  static_columns: string[];
  split_rows: Record<string, number>;
  params: {
    activity_vocab: Record<string, number>;
    max_len: number;
    dt_mu: number | null;
    dt_sd: number | null;
    [key: string]: unknown;
  };
}

export interface Dataset {
  dir: string;
  meta: DatasetMeta;
  splits: Record<SplitName, SplitData>;
  maxLen: number;
  /** Includes the reserved padding ID 0. */
  vocabSize: number;
  staticDim: number;
}

const TARGET_HEADER = ["pr_id", "y_log", "y_seconds", "elapsed_seconds", "deadline_seconds"];

function loadSplit(dir: string): SplitData {
  const seq = readMatrix(path.join(dir, "seq.csv"));
  const dt = readMatrix(path.join(dir, "dt.csv"));
  const staticTable = readTable(path.join(dir, "static.csv"));
  const target = readTable(path.join(dir, "target.csv"));
  if (target.header.join(",") !== TARGET_HEADER.join(",")) {
    throw new Error(`${dir}/target.csv: unexpected header ${target.header.join(",")}`);
  }
  const staticX = staticTable.rows.map((row) => row.map(Number));
  const rows = target.rows;
  const counts = new Set([seq.length, dt.length, staticX.length, rows.length]);
  if (counts.size !== 1) {
    throw new Error(
      `${dir}: row counts differ across files: seq=${seq.length} dt=${dt.length} ` +
        `static=${staticX.length} target=${rows.length}`
    );
  }
  return {
    prIds: rows.map((r) => Number(r[0])),
    seq,
    dt,
    staticX,
    yLog: rows.map((r) => Number(r[1])),
    ySeconds: rows.map((r) => Number(r[2])),
    elapsedSeconds: rows.map((r) => Number(r[3])),
    deadlineSeconds: rows.map((r) => Number(r[4])),
  };
}

export function loadDataset(dir: string): Dataset {
  const metaPath = path.join(dir, "meta.json");
  const meta: DatasetMeta = JSON.parse(fs.readFileSync(metaPath, "utf-8"));
  if (meta.schema_version !== 1) {
    throw new Error(`${metaPath}: schema_version ${meta.schema_version}, expected 1`);
  }
  const splits = {} as Record<SplitName, SplitData>;
  for (const name of SPLIT_NAMES) {
    splits[name] = loadSplit(path.join(dir, name));
  }
  const vocabIds = Object.values(meta.params.activity_vocab);
  const staticDim = meta.static_columns.length;
  for (const name of SPLIT_NAMES) {
    for (const row of splits[name].staticX) {
      if (row.length !== staticDim) {
        throw new Error(`${dir}/${name}/static.csv: row width ${row.length} != ${staticDim}`);
      }
    }
  }
  return {
    dir,
    meta,
    splits,
    maxLen: meta.max_len,
    vocabSize: Math.max(...vocabIds) + 1,
    staticDim,
  };
}
