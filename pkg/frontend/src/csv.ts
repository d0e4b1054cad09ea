/** Strict reader for the simulator's CSV bundle.
 *
 * The bundle never quotes cells (all values are numeric or bare
 * categorical tokens), so a plain split is exact. Unknown or missing
 * columns fail loudly with the column name.
 */

import * as fs from "node:fs";

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    return { columns: [], rows: [] };
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `row ${i + 2}: expected ${columns.length} cells, got ${cells.length}`
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((name, j) => (row[name] = cells[j]));
    return row;
  });
  return { columns, rows };
}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf-8");
  } catch (err) {
    throw new Error(`cannot read ${path}: ${(err as Error).message}`);
  }
  try {
    return parseCsv(text);
  } catch (err) {
    throw new Error(`${path}: ${(err as Error).message}`);
  }
}

export function requireColumns(table: Table, needed: string[], source: string): void {
  for (const name of needed) {
    if (!table.columns.includes(name)) {
      throw new Error(`${source}: missing column "${name}"`);
    }
  }
}

/** Numeric cell access; empty cells and "nan" map to NaN. */
export function num(row: Record<string, string>, column: string): number {
  const raw = row[column];
  if (raw === undefined) {
    throw new Error(`missing column "${column}"`);
  }
  if (raw === "" || raw === "nan") {
    return NaN;
  }
  const value = Number(raw);
  if (Number.isNaN(value)) {
    throw new Error(`column "${column}": cannot parse "${raw}" as a number`);
  }
  return value;
}
