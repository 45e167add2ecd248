/**
 * Deterministic SVG primitives. Everything routes number formatting
 * through fmt()/fmtTick() so regenerating a figure from the same data is
 * byte-identical: no timestamps, no randomness, no locale formatting.
 */

/** Coordinate formatting: 2 decimals, trailing zeros stripped, no -0. */
export function fmt(v: number): string {
  const r = Math.round(v * 100) / 100;
  const clean = r === 0 ? 0 : r;
  return String(clean);
}

/** Tick/data label: plain for human scales, exponential for extreme ones. */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(2).replace(/\.?0+e/, "e");
  }
  const s = v.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

/** Heckbert-style nice tick positions covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (lo === hi) {
    // degenerate domain: pad around the value
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const span = niceNum(hi - lo, false);
  const step = niceNum(span / (count - 1), true);
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function niceNum(range: number, round: boolean): number {
  const exp = Math.floor(Math.log10(range));
  const frac = range / Math.pow(10, exp);
  let nice: number;
  if (round) {
    nice = frac < 1.5 ? 1 : frac < 3 ? 2 : frac < 7 ? 5 : 10;
  } else {
    nice = frac <= 1 ? 1 : frac <= 2 ? 2 : frac <= 5 ? 5 : 10;
  }
  return nice * Math.pow(10, exp);
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

/** Linear map domain -> range; clamps nothing, data decides the domain. */
export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = d1 === d0 ? 0 : (r1 - r0) / (d1 - d0);
  const f = ((v: number) => r0 + (v - d0) * k) as Scale;
  f.domain = domain;
  return f;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export const FONT = "Helvetica, Arial, sans-serif";

export function textEl(
  x: number,
  y: number,
  content: string,
  opts: { size?: number; anchor?: string; rotate?: number; fill?: string } = {},
): string {
  const size = opts.size ?? 11;
  const anchor = opts.anchor ?? "start";
  const fill = opts.fill ?? "#222";
  const transform = opts.rotate
    ? ` transform="rotate(${fmt(opts.rotate)} ${fmt(x)} ${fmt(y)})"`
    : "";
  return (
    `<text x="${fmt(x)}" y="${fmt(y)}" font-family="${FONT}" ` +
    `font-size="${size}" text-anchor="${anchor}" fill="${fill}"${transform}>` +
    `${esc(content)}</text>`
  );
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  stroke: string,
  width = 1,
  cls?: string,
): string {
  const c = cls ? ` class="${cls}"` : "";
  return (
    `<line${c} x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
    `stroke="${stroke}" stroke-width="${fmt(width)}"/>`
  );
}

export function polyline(points: Array<[number, number]>, stroke: string, width = 1.5): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${fmt(width)}"/>`;
}

export function circle(cx: number, cy: number, r: number, fill: string): string {
  return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`;
}
