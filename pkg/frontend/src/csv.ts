/**
 * CSV reading for the simulation outputs.
 *
 * Files carry '#' comment lines (the embedded run configuration), one
 * header row, and numeric/string data columns.  Loading validates the
 * header against the expected schema and fails loudly, naming the first
 * missing column; files with no data rows are rejected outright.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
  comments: string[];
}

export function parseCsv(text: string): Table {
  const comments: string[] = [];
  let header: string[] | null = null;
  const rows: Record<string, string>[] = [];
  for (const raw of text.split(/\r?\n/)) {
    if (raw.trim() === "") continue;
    if (raw.startsWith("#")) {
      comments.push(raw);
      continue;
    }
    const cells = raw.split(",");
    if (header === null) {
      header = cells.map((c) => c.trim());
      continue;
    }
    const row: Record<string, string> = {};
    header.forEach((name, i) => (row[name] = (cells[i] ?? "").trim()));
    rows.push(row);
  }
  if (header === null) {
    throw new SchemaError("no header row found");
  }
  return { columns: header, rows, comments };
}

export function loadTable(path: string, required: string[]): Table {
  const table = parseCsv(readFileSync(path, "utf8"));
  for (const name of required) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(
        `${path}: missing required column '${name}' (found: ${table.columns.join(", ")})`,
      );
    }
  }
  if (table.rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return table;
}

/** Numeric column; rows whose `status` cell is present and not "ok" are skipped. */
export function numericColumn(table: Table, name: string): number[] {
  const out: number[] = [];
  for (const row of table.rows) {
    if ("status" in row && row["status"] !== "ok" && row["status"] !== "") continue;
    const value = Number(row[name]);
    out.push(value);
  }
  return out;
}
