/** Minimal RFC 4180 CSV reading for the dataset files. */

import * as fs from "fs";

export function parseCsvLine(line: string): string[] {
  const fields: string[] = [];
  let current = "";
  let inQuotes = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (inQuotes) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          current += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      inQuotes = true;
    } else if (ch === ",") {
      fields.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  fields.push(current);
  return fields;
}

function readLines(path: string): string[] {
  const text = fs.readFileSync(path, "utf-8");
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  return lines;
}

/** Numeric matrix from a headerless CSV; [] for an empty file. */
export function readMatrix(path: string): number[][] {
  return readLines(path).map((line, row) =>
    parseCsvLine(line).map((field, col) => {
      const value = Number(field);
      if (Number.isNaN(value)) {
        throw new Error(`${path}:${row + 1}: non-numeric field at column ${col + 1}: ${field}`);
      }
      return value;
    })
  );
}

/** Headered CSV as {header, rows-of-strings}. */
export function readTable(path: string): { header: string[]; rows: string[][] } {
  const lines = readLines(path);
  if (lines.length === 0) {
    throw new Error(`${path}: missing header row`);
  }
  return {
    header: parseCsvLine(lines[0]),
    rows: lines.slice(1).map(parseCsvLine),
  };
}
