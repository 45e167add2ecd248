/**
 * The sweep summary contract: one row per (agent, axis, axis_value, seed),
 * as emitted by the simulator harness in summary.csv. This module parses
 * and validates those files; it never writes them.
 */
import Papa from "papaparse";

export class SchemaError extends Error {}

/** Identity columns every summary file must carry. */
export const KEY_COLUMNS = ["agent", "axis", "axis_value", "seed"] as const;

export interface SummaryRow {
  agent: string;
  axis: string;
  axis_value: number;
  seed: number;
  /** metric columns, already numeric */
  metrics: Record<string, number>;
  /** file the row came from, for error messages */
  source: string;
}

/**
 * Parse one summary CSV. Throws SchemaError naming the first missing
 * identity column. Metric columns are whatever else the header declares;
 * renderers check for the columns they reference.
 */
export function parseSummary(text: string, source: string): SummaryRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${source}: malformed CSV (${e.message} at row ${e.row})`);
  }
  const header = parsed.meta.fields ?? [];
  for (const col of KEY_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(`${source}: missing required column "${col}"`);
    }
  }
  const metricCols = header.filter((c) => !(KEY_COLUMNS as readonly string[]).includes(c));
  return parsed.data.map((raw, i) => {
    const metrics: Record<string, number> = {};
    for (const c of metricCols) {
      metrics[c] = Number(raw[c]);
    }
    const axisValue = raw["axis_value"] === "" || raw["axis_value"] === "nan"
      ? NaN
      : Number(raw["axis_value"]);
    const seed = Number(raw["seed"]);
    if (!Number.isFinite(seed)) {
      throw new SchemaError(`${source}: row ${i + 1} has non-numeric seed "${raw["seed"]}"`);
    }
    return {
      agent: raw["agent"],
      axis: raw["axis"],
      axis_value: axisValue,
      seed,
      metrics,
      source,
    };
  });
}

/** Column names available across a set of rows (union of their metric keys). */
export function availableColumns(rows: SummaryRow[]): Set<string> {
  const cols = new Set<string>(KEY_COLUMNS);
  for (const r of rows) {
    for (const k of Object.keys(r.metrics)) cols.add(k);
  }
  return cols;
}
