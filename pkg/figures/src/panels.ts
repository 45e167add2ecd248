/**
 * Figure assembly: a FigureSpec names the sweep axis, the metric panels to
 * stack, and the output format; render() turns pooled summary rows into one
 * self-contained SVG string with a shared x axis and per-seed error bars.
 */

import { SchemaError, SummaryRow, availableColumns } from "./summary";
import { SeriesPoint, aggregate } from "./stats";
import {
  esc,
  fmt,
  fmtTick,
  line,
  linearScale,
  niceTicks,
  polyline,
  circle,
  textEl,
  FONT,
} from "./svg";

export interface PanelSpec {
  metric: string;
  label: string;
}

export interface FigureSpec {
  /** Sweep axis column the figure slices on, e.g. "n_tbs". */
  axis: string;
  axisLabel: string;
  panels: PanelSpec[];
  format: "svg" | "png";
  /** Error bar mode; only std-over-seeds is implemented. */
  errorBars: "std";
  /** Output file name, e.g. "tbs.svg". */
  output: string;
}

/** The three figure families the CLI knows how to build. */
export const FAMILIES: Record<string, FigureSpec> = {
  velocity: {
    axis: "desired_velocity",
    axisLabel: "desired velocity [m/s]",
    panels: [
      { metric: "mean_reward_tran", label: "transmission reward" },
      { metric: "mean_reward_tele", label: "telemetry reward" },
    ],
    format: "svg",
    errorBars: "std",
    output: "velocity.svg",
  },
  tbs: {
    axis: "n_tbs",
    axisLabel: "THz base stations",
    panels: [
      { metric: "mean_tq", label: "queue throughput [bit/s]" },
      { metric: "handoff_prob", label: "handoff probability" },
      { metric: "collision_rate", label: "collision rate" },
    ],
    format: "svg",
    errorBars: "std",
    output: "tbs.svg",
  },
  avs: {
    axis: "n_avs",
    axisLabel: "vehicles",
    panels: [
      { metric: "mean_tq", label: "queue throughput [bit/s]" },
      { metric: "handoff_prob", label: "handoff probability" },
      { metric: "collision_rate", label: "collision rate" },
    ],
    format: "svg",
    errorBars: "std",
    output: "avs.svg",
  },
};

// Color cycle for agent series; order is by sorted agent name so the same
// inputs always map to the same colors.
export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

const WIDTH = 640;
const PANEL_H = 180;
const MARGIN = { left: 78, right: 16, top: 8, bottom: 34 };
const LEGEND_H = 22;

/** Render one figure family to an SVG string. Pure: rows are not mutated. */
export function render(spec: FigureSpec, rows: SummaryRow[]): string {
  if (spec.format === "png") {
    throw new SchemaError(
      "png output is not supported: the renderer is vector-only, use format \"svg\"",
    );
  }
  const cols = availableColumns(rows);
  for (const panel of spec.panels) {
    if (!cols.has(panel.metric)) {
      throw new SchemaError(`missing required column "${panel.metric}"`);
    }
  }

  const axisRows = rows.filter((r) => r.axis === spec.axis && Number.isFinite(r.axis_value));
  if (axisRows.length === 0) {
    throw new SchemaError(`no rows with axis "${spec.axis}" in the input summaries`);
  }

  const perPanel = spec.panels.map((p) => aggregate(axisRows, p.metric));
  const agents = [...perPanel[0].keys()];

  // shared x domain across panels
  let xLo = Infinity;
  let xHi = -Infinity;
  for (const series of perPanel[0].values()) {
    for (const pt of series) {
      xLo = Math.min(xLo, pt.x);
      xHi = Math.max(xHi, pt.x);
    }
  }
  if (xLo === xHi) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  const xTicks = niceTicks(xLo, xHi, 6).filter((t) => t >= xLo - 1e-9 && t <= xHi + 1e-9);
  const xScale = linearScale([xLo, xHi], [MARGIN.left, WIDTH - MARGIN.right]);

  const totalH = LEGEND_H + spec.panels.length * PANEL_H;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${totalH}" ` +
      `width="${WIDTH}" height="${totalH}" font-family="${FONT}">`,
  );
  parts.push(`<rect x="0" y="0" width="${WIDTH}" height="${totalH}" fill="#ffffff"/>`);
  parts.push(renderLegend(agents));

  spec.panels.forEach((panel, i) => {
    const top = LEGEND_H + i * PANEL_H;
    const last = i === spec.panels.length - 1;
    parts.push(
      renderPanel(panel, perPanel[i], agents, xScale, xTicks, top, last ? spec.axisLabel : null),
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function renderLegend(agents: string[]): string {
  const parts: string[] = [];
  let x = MARGIN.left;
  const y = LEGEND_H / 2 + 4;
  agents.forEach((agent, i) => {
    const color = PALETTE[i % PALETTE.length];
    parts.push(line(x, y - 4, x + 18, y - 4, color, 2));
    parts.push(circle(x + 9, y - 4, 2.6, color));
    parts.push(textEl(x + 23, y, agent, { size: 11 }));
    x += 23 + agent.length * 6.6 + 18;
  });
  return parts.join("\n");
}

function renderPanel(
  panel: PanelSpec,
  series: Map<string, SeriesPoint[]>,
  agents: string[],
  xScale: (v: number) => number,
  xTicks: number[],
  top: number,
  xLabel: string | null,
): string {
  const plotTop = top + MARGIN.top;
  const plotBot = top + PANEL_H - MARGIN.bottom;

  // y domain includes error bar extents
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const pts of series.values()) {
    for (const pt of pts) {
      yLo = Math.min(yLo, pt.mean - pt.std);
      yHi = Math.max(yHi, pt.mean + pt.std);
    }
  }
  if (!Number.isFinite(yLo)) {
    yLo = 0;
    yHi = 1;
  }
  if (yLo === yHi) {
    const pad = yLo === 0 ? 1 : Math.abs(yLo) * 0.1;
    yLo -= pad;
    yHi += pad;
  } else {
    const pad = (yHi - yLo) * 0.08;
    yLo -= pad;
    yHi += pad;
  }
  const yTicks = niceTicks(yLo, yHi, 5).filter((t) => t >= yLo - 1e-9 && t <= yHi + 1e-9);
  const yScale = linearScale([yLo, yHi], [plotBot, plotTop]);

  const left = xScale((xScale as any).domain[0]);
  const right = xScale((xScale as any).domain[1]);

  const parts: string[] = [];

  // frame and grid
  for (const t of yTicks) {
    const y = yScale(t);
    parts.push(line(left, y, right, y, "#dddddd", 0.6));
    parts.push(textEl(left - 6, y + 3.5, fmtTick(t), { size: 10, anchor: "end" }));
  }
  for (const t of xTicks) {
    const x = xScale(t);
    parts.push(line(x, plotBot, x, plotBot + 4, "#222222", 1));
    if (xLabel !== null) {
      parts.push(textEl(x, plotBot + 15, fmtTick(t), { size: 10, anchor: "middle" }));
    }
  }
  parts.push(line(left, plotBot, right, plotBot, "#222222", 1));
  parts.push(line(left, plotTop, left, plotBot, "#222222", 1));

  // y axis label
  const midY = (plotTop + plotBot) / 2;
  parts.push(
    textEl(left - 62, midY, panel.label, { size: 11, anchor: "middle", rotate: -90 }),
  );
  if (xLabel !== null) {
    parts.push(textEl((left + right) / 2, plotBot + 29, xLabel, { size: 11, anchor: "middle" }));
  }

  // series: error bars under lines under markers
  agents.forEach((agent, i) => {
    const pts = series.get(agent) ?? [];
    const color = PALETTE[i % PALETTE.length];
    for (const pt of pts) {
      const x = xScale(pt.x);
      const y1 = yScale(pt.mean - pt.std);
      const y2 = yScale(pt.mean + pt.std);
      parts.push(line(x, y1, x, y2, color, 1, "errbar"));
      parts.push(line(x - 3, y1, x + 3, y1, color, 1, "errbar-cap"));
      parts.push(line(x - 3, y2, x + 3, y2, color, 1, "errbar-cap"));
    }
    parts.push(polyline(pts.map((pt) => [xScale(pt.x), yScale(pt.mean)]), color));
    for (const pt of pts) {
      parts.push(circle(xScale(pt.x), yScale(pt.mean), 2.6, color));
    }
  });

  return parts.join("\n");
}
