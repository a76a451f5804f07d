/**
 * Minimal CSV reader for the laboratory's output contracts.
 *
 * Files start with `# config <hash>` comment lines, then a header row,
 * then numeric rows (a small number of columns may be plain strings,
 * e.g. classification labels). Schema problems raise errors that name
 * the offending column.
 */

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
  configHash: string | null;
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0);
  let configHash: string | null = null;
  const data: string[] = [];
  for (const line of lines) {
    if (line.startsWith("#")) {
      const m = line.match(/^#\s*config\s+(\S+)/);
      if (m) configHash = m[1];
      continue;
    }
    data.push(line);
  }
  if (data.length === 0) {
    throw new SchemaError("CSV has no header row");
  }
  const header = data[0].split(",").map((c) => c.trim());
  const rows = data.slice(1).map((line) => line.split(",").map((c) => c.trim()));
  if (rows.length === 0) {
    throw new SchemaError("CSV has a header but no data rows");
  }
  for (const [i, row] of rows.entries()) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `row ${i + 1} has ${row.length} fields, expected ${header.length}`,
      );
    }
  }
  return { header, rows, configHash };
}

/** Numeric column by name; throws a SchemaError naming any missing column. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = requireColumn(table, name);
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (Number.isNaN(v) && row[idx] !== "nan") {
      throw new SchemaError(`column '${name}' row ${i + 1}: '${row[idx]}' is not numeric`);
    }
    return v;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = requireColumn(table, name);
  return table.rows.map((row) => row[idx]);
}

function requireColumn(table: Table, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `missing column '${name}' (found: ${table.header.join(", ")})`,
    );
  }
  return idx;
}

export function requireColumns(table: Table, names: string[]): void {
  const missing = names.filter((n) => !table.header.includes(n));
  if (missing.length > 0) {
    throw new SchemaError(
      `missing column${missing.length > 1 ? "s" : ""} '${missing.join("', '")}' ` +
        `(found: ${table.header.join(", ")})`,
    );
  }
}
