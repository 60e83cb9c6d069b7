/**
 * Minimal deterministic SVG plotting: linear/log scales, axes with tick
 * labels, polylines, scatter markers, and multi-panel layout.  No
 * timestamps or randomness anywhere, so identical inputs give identical
 * bytes.
 */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
  ticks(): number[];
  log: boolean;
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step0, 2 * step0, 5 * step0, 10 * step0];
  const step = candidates.find((s) => span / s <= count + 1) ?? 10 * step0;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const f = ((value: number) => r0 + ((value - d0) / (d1 - d0 || 1)) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  f.ticks = () => niceTicks(d0, d1);
  f.log = false;
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs positive domain");
  const [l0, l1] = [Math.log10(d0), Math.log10(d1)];
  const [r0, r1] = range;
  const f = ((value: number) =>
    r0 + ((Math.log10(value) - l0) / (l1 - l0 || 1)) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  f.ticks = () => {
    const ticks: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); e <= Math.floor(l1 + 1e-9); e++) {
      ticks.push(Math.pow(10, e));
    }
    return ticks.length >= 2 ? ticks : [d0, d1];
  };
  f.log = true;
  return f;
}

export function extent(values: number[], padFrac = 0.05): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v));
  if (finite.length === 0) throw new Error("no finite values to scale");
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * padFrac;
  return [lo - pad, hi + pad];
}

const r3 = (x: number) => (Math.round(x * 1000) / 1000).toString();

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return parseFloat(v.toPrecision(4)).toString();
}

export interface Panel {
  x: number;
  y: number;
  width: number;
  height: number;
  title?: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  body: string[];
}

export function panel(opts: Omit<Panel, "body">): Panel {
  return { ...opts, body: [] };
}

export function polyline(
  p: Panel,
  xs: number[],
  ys: number[],
  stroke: string,
  width = 1.5,
  dash = "",
): void {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
    pts.push(`${r3(p.xScale(xs[i]))},${r3(p.yScale(ys[i]))}`);
  }
  if (pts.length === 0) return;
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  p.body.push(
    `<polyline points="${pts.join(" ")}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`,
  );
}

export function markers(p: Panel, xs: number[], ys: number[], fill: string, radius = 2.4): void {
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
    p.body.push(
      `<circle cx="${r3(p.xScale(xs[i]))}" cy="${r3(p.yScale(ys[i]))}" r="${radius}" fill="${fill}"/>`,
    );
  }
}

export function hline(p: Panel, y: number, stroke: string, dash = "4 3"): void {
  const [x0, x1] = p.xScale.range;
  const yy = r3(p.yScale(y));
  p.body.push(
    `<line x1="${r3(x0)}" y1="${yy}" x2="${r3(x1)}" y2="${yy}" stroke="${stroke}" stroke-width="1" stroke-dasharray="${dash}"/>`,
  );
}

export function legend(p: Panel, entries: [string, string][]): void {
  const x = p.xScale.range[0] + 8;
  let y = p.yScale.range[1] + 14;
  for (const [label, color] of entries) {
    p.body.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 18}" y2="${y - 4}" stroke="${color}" stroke-width="2"/>`);
    p.body.push(`<text x="${x + 24}" y="${y}" font-size="11" fill="#222">${label}</text>`);
    y += 15;
  }
}

function renderPanel(p: Panel): string {
  const [x0, x1] = p.xScale.range;
  const [y0, y1] = p.yScale.range; // y0 = bottom pixel, y1 = top pixel
  const parts: string[] = [];
  parts.push(
    `<rect x="${r3(x0)}" y="${r3(y1)}" width="${r3(x1 - x0)}" height="${r3(y0 - y1)}" fill="none" stroke="#444" stroke-width="1"/>`,
  );
  for (const t of p.xScale.ticks()) {
    const xx = r3(p.xScale(t));
    parts.push(`<line x1="${xx}" y1="${r3(y0)}" x2="${xx}" y2="${r3(y0 - 4)}" stroke="#444"/>`);
    parts.push(
      `<text x="${xx}" y="${r3(y0 + 14)}" font-size="10" text-anchor="middle" fill="#222">${fmtTick(t)}</text>`,
    );
  }
  for (const t of p.yScale.ticks()) {
    const yy = r3(p.yScale(t));
    parts.push(`<line x1="${r3(x0)}" y1="${yy}" x2="${r3(x0 + 4)}" y2="${yy}" stroke="#444"/>`);
    parts.push(
      `<text x="${r3(x0 - 6)}" y="${r3(Number(yy) + 3)}" font-size="10" text-anchor="end" fill="#222">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${r3((x0 + x1) / 2)}" y="${r3(y0 + 30)}" font-size="12" text-anchor="middle" fill="#000">${p.xLabel}</text>`,
  );
  const yMid = (y0 + y1) / 2;
  parts.push(
    `<text x="${r3(x0 - 40)}" y="${r3(yMid)}" font-size="12" text-anchor="middle" fill="#000" transform="rotate(-90 ${r3(x0 - 40)} ${r3(yMid)})">${p.yLabel}</text>`,
  );
  if (p.title) {
    parts.push(
      `<text x="${r3((x0 + x1) / 2)}" y="${r3(y1 - 6)}" font-size="12" text-anchor="middle" fill="#000">${p.title}</text>`,
    );
  }
  return parts.concat(p.body).join("\n");
}

export function renderSvg(width: number, height: number, panels: Panel[]): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
  ];
  for (const p of panels) parts.push(renderPanel(p));
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
