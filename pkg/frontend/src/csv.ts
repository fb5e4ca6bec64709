/**
 * Ingestion of the simulation CLI's CSV artifacts: #-prefixed
 * provenance comments, a header row, and 17-significant-digit values.
 * Missing columns are named errors; no silent coercion.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface CsvTable {
  path: string;
  columns: string[];
  /** column name -> raw string cells (empty string = absent value) */
  cells: Map<string, string[]>;
  rowCount: number;
}

export function readTable(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<string[]>(text.trim(), {
    comments: "#",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: CSV parse error: ${first.message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new Error(`${path}: no header row`);
  }
  const columns = rows[0];
  const body = rows.slice(1);
  for (const [index, row] of body.entries()) {
    if (row.length !== columns.length) {
      throw new Error(
        `${path}: row ${index + 1} has ${row.length} fields, expected ${columns.length}`,
      );
    }
  }
  const cells = new Map<string, string[]>();
  columns.forEach((name, col) => {
    cells.set(name, body.map((row) => row[col]));
  });
  return { path, columns, cells, rowCount: body.length };
}

export function requireColumns(table: CsvTable, names: string[]): void {
  const missing = names.filter((name) => !table.cells.has(name));
  if (missing.length > 0) {
    throw new Error(
      `${table.path}: missing required column(s) ${missing.join(", ")}; ` +
        `found ${table.columns.join(", ")}`,
    );
  }
}

export function numericColumn(table: CsvTable, name: string): number[] {
  requireColumns(table, [name]);
  return table.cells.get(name)!.map((cell, index) => {
    const value = Number(cell);
    if (cell === "" || Number.isNaN(value)) {
      throw new Error(
        `${table.path}: column ${name}, row ${index + 1}: not a number (${JSON.stringify(cell)})`,
      );
    }
    return value;
  });
}

/** Numeric column where empty cells mean "absent" and become null. */
export function optionalNumericColumn(
  table: CsvTable,
  name: string,
): (number | null)[] {
  requireColumns(table, [name]);
  return table.cells.get(name)!.map((cell, index) => {
    if (cell === "") return null;
    const value = Number(cell);
    if (Number.isNaN(value)) {
      throw new Error(
        `${table.path}: column ${name}, row ${index + 1}: not a number (${JSON.stringify(cell)})`,
      );
    }
    return value;
  });
}
