/** Seed aggregation: per (agent, axis value) means and spreads. */
import { SummaryRow } from "./summary";

export function mean(xs: number[]): number {
  let s = 0;
  for (const x of xs) s += x;
  return s / xs.length;
}

/** Sample standard deviation; 0 for fewer than two points. */
export function std(xs: number[]): number {
  if (xs.length < 2) return 0;
  // identical observations must give an exactly zero spread, not roundoff
  if (xs.every((x) => x === xs[0])) return 0;
  const m = mean(xs);
  let s = 0;
  for (const x of xs) s += (x - m) * (x - m);
  return Math.sqrt(s / (xs.length - 1));
}

export interface SeriesPoint {
  x: number;
  mean: number;
  std: number;
  n: number;
}

/**
 * Group rows by agent and aggregate one metric over seeds at each axis
 * value. Agents and x values come back sorted so downstream rendering is
 * order-independent of the input files.
 */
export function aggregate(
  rows: SummaryRow[],
  metric: string,
): Map<string, SeriesPoint[]> {
  const byAgent = new Map<string, Map<number, number[]>>();
  for (const r of rows) {
    let perX = byAgent.get(r.agent);
    if (!perX) byAgent.set(r.agent, (perX = new Map()));
    let vals = perX.get(r.axis_value);
    if (!vals) perX.set(r.axis_value, (vals = []));
    vals.push(r.metrics[metric]);
  }
  const out = new Map<string, SeriesPoint[]>();
  for (const agent of [...byAgent.keys()].sort()) {
    const perX = byAgent.get(agent)!;
    const pts = [...perX.keys()]
      .sort((a, b) => a - b)
      .map((x) => {
        const vals = perX.get(x)!;
        return { x, mean: mean(vals), std: std(vals), n: vals.length };
      });
    out.set(agent, pts);
  }
  return out;
}
