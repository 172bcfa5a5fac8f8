/**
 * Reader for the solver's CSV tables: a header row plus comma-separated
 * cells with no quoting or escapes.
 */

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string, source = "<csv>"): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error(`empty CSV: ${source} has no header row`);
  }
  const columns = lines[0].split(",");
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `malformed CSV: ${source} line ${i + 1} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = cells[j]));
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new Error(`empty CSV: ${source} has a header but no data rows`);
  }
  return { columns, rows };
}

export function numericColumn(table: Table, name: string, source = "<csv>"): number[] {
  if (!table.columns.includes(name)) {
    throw new Error(
      `column "${name}" not found in ${source} (header: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row, i) => {
    const v = Number(row[name]);
    if (!Number.isFinite(v)) {
      throw new Error(`column "${name}" row ${i + 1} of ${source} is not numeric: ${row[name]}`);
    }
    return v;
  });
}
