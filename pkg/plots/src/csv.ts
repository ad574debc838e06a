/**
 * Reader for the CSV dialect the brwss CLI writes: comma-separated, header
 * row mandatory, '.' decimal point, LF line endings, no quoting.
 */

import { readFileSync } from "fs";

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  /** column-major numeric data, keyed by column name */
  columns: Map<string, number[]>;
  rows: number;
}

export function readTable(path: string, expectedHeader: string[]): Table {
  const raw = readFileSync(path, "utf-8");
  const lines = raw.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty CSV`);
  }
  const header = lines[0].split(",");
  for (const col of expectedHeader) {
    if (!header.includes(col)) {
      throw new SchemaError(`${path}: missing column '${col}' (header: ${header.join(",")})`);
    }
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(`${path}: row ${i} has ${cells.length} cells, expected ${header.length}`);
    }
    header.forEach((h, j) => {
      const v = Number(cells[j]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`${path}: row ${i}, column '${h}': not a number: '${cells[j]}'`);
      }
      columns.get(h)!.push(v);
    });
  }
  return { header, columns, rows: lines.length - 1 };
}
