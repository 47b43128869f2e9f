/**
 * Minimal CSV reading for the campaign outputs: a header row plus numeric
 * or string cells, no quoting (the writer never quotes).
 */

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export class CsvError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV: no header row");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(`row ${i + 1} has ${cells.length} cells, header has ${columns.length}`);
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = cells[j]));
    return row;
  });
  if (rows.length === 0) {
    throw new CsvError("empty CSV: header only, no data rows");
  }
  return { columns, rows };
}

export function requireColumns(table: Table, needed: string[]): void {
  for (const c of needed) {
    if (!table.columns.includes(c)) {
      throw new CsvError(`missing column '${c}' (have: ${table.columns.join(", ")})`);
    }
  }
}

export function numbers(table: Table, column: string): number[] {
  requireColumns(table, [column]);
  return table.rows.map((r, i) => {
    const v = Number(r[column]);
    if (!Number.isFinite(v)) {
      throw new CsvError(`column '${column}' row ${i + 1} is not a finite number: ${r[column]}`);
    }
    return v;
  });
}

export function distinct(table: Table, column: string): string[] {
  requireColumns(table, [column]);
  return [...new Set(table.rows.map((r) => r[column]))];
}
