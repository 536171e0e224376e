import * as fs from "fs";
import * as path from "path";

import { beforeAll, describe, expect, it } from "vitest";

import { parseCsvLine } from "../src/csv";
import { Dataset, loadDataset, SPLIT_NAMES } from "../src/data";
import { ensureDataset } from "./util";

let datasetDir: string;
let dataset: Dataset;

beforeAll(() => {
  datasetDir = ensureDataset(60, 3);
  dataset = loadDataset(datasetDir);
});

describe("csv parsing", () => {
  it("splits plain fields", () => {
    expect(parseCsvLine("a,b,c")).toEqual(["a", "b", "c"]);
  });

  it("handles quoted fields with commas and escaped quotes", () => {
    expect(parseCsvLine('a,"b,c","d""e"')).toEqual(["a", "b,c", 'd"e']);
  });

  it("keeps empty fields", () => {
    expect(parseCsvLine("a,,c,")).toEqual(["a", "", "c", ""]);
  });
});

describe("dataset loading", () => {
  it("row counts match meta split_rows across all four files", () => {
    for (const name of SPLIT_NAMES) {
      const split = dataset.splits[name];
      const expected = dataset.meta.split_rows[name];
      expect(split.seq.length).toBe(expected);
      expect(split.dt.length).toBe(expected);
      expect(split.staticX.length).toBe(expected);
      expect(split.yLog.length).toBe(expected);
    }
  });

  it("vocab includes padding and every observed id", () => {
    expect(dataset.vocabSize).toBe(6);
    for (const name of SPLIT_NAMES) {
      for (const row of dataset.splits[name].seq) {
        for (const id of row) {
          expect(Number.isInteger(id)).toBe(true);
          expect(id).toBeGreaterThanOrEqual(0);
          expect(id).toBeLessThan(dataset.vocabSize);
        }
      }
    }
  });

  it("padding is a zero suffix and rows have width max_len", () => {
    for (const row of dataset.splits.train.seq) {
      expect(row.length).toBe(dataset.maxLen);
      const firstZero = row.indexOf(0);
      if (firstZero !== -1) {
        expect(row.slice(firstZero).every((v) => v === 0)).toBe(true);
      }
    }
  });

  it("y_log is log1p of y_seconds", () => {
    const split = dataset.splits.test;
    for (let i = 0; i < split.yLog.length; i++) {
      expect(Math.abs(split.yLog[i] - Math.log1p(split.ySeconds[i]))).toBeLessThan(1e-9);
    }
  });

  it("static matrix width matches the meta column list", () => {
    expect(dataset.staticDim).toBe(dataset.meta.static_columns.length);
  });

  it("rejects a wrong schema version", () => {
    const tmp = fs.mkdtempSync(path.join(__dirname, ".cache", "bad-"));
    for (const name of SPLIT_NAMES) {
      fs.cpSync(path.join(datasetDir, name), path.join(tmp, name), { recursive: true });
    }
    const meta = JSON.parse(fs.readFileSync(path.join(datasetDir, "meta.json"), "utf-8"));
    meta.schema_version = 99;
    fs.writeFileSync(path.join(tmp, "meta.json"), JSON.stringify(meta));
    expect(() => loadDataset(tmp)).toThrow("schema_version");
    fs.rmSync(tmp, { recursive: true, force: true });
  });
});
