/**
 * Deterministic SVG chart scaffolding: linear/log scales, axes with tick
 * labels, polylines, markers, and shaded bands. No timestamps, no
 * randomness; identical inputs yield identical bytes.
 */

export type Scale = (v: number) => number;

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 640,
  height: 420,
  margin: { top: 36, right: 24, bottom: 52, left: 64 },
};

export const PALETTE = ["#1f6fb2", "#d1495b", "#3a8f5d", "#8f5ab0", "#c98a22", "#4a4a4a"];

const fmt = (v: number): string => {
  if (!Number.isFinite(v)) return "0";
  const rounded = Number(v.toPrecision(6));
  return String(rounded);
};

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const lo = Math.log10(domain[0]);
  const hi = Math.log10(domain[1]);
  const inner = linearScale([lo, hi], range);
  return (v) => inner(Math.log10(v));
}

export function extent(values: number[], padFraction = 0.05): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = (hi - lo) * padFraction;
  return [lo - pad, hi + pad];
}

export function linearTicks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(rawStep) || 1)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function logTicks(domain: [number, number]): number[] {
  const lo = Math.ceil(Math.log10(domain[0]) - 1e-9);
  const hi = Math.floor(Math.log10(domain[1]) + 1e-9);
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return ticks;
}

export class SvgChart {
  private parts: string[] = [];
  readonly frame: Frame;

  constructor(frame: Frame = DEFAULT_FRAME) {
    this.frame = frame;
  }

  get plotLeft(): number {
    return this.frame.margin.left;
  }

  get plotRight(): number {
    return this.frame.width - this.frame.margin.right;
  }

  get plotTop(): number {
    return this.frame.margin.top;
  }

  get plotBottom(): number {
    return this.frame.height - this.frame.margin.bottom;
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  title(text: string): void {
    this.parts.push(
      `<text x="${this.frame.width / 2}" y="20" text-anchor="middle" ` +
      `font-size="14" font-weight="bold">${escapeXml(text)}</text>`,
    );
  }

  line(points: Array<[number, number]>, color: string, width = 1.5, dash = ""): void {
    const d = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${d}" fill="none" stroke="${color}" stroke-width="${width}"${dashAttr}/>`,
    );
  }

  circle(x: number, y: number, r: number, color: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${color}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, opacity = 1): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
      `fill="${fill}" opacity="${opacity}"/>`,
    );
  }

  text(x: number, y: number, value: string, anchor = "start", size = 11): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ` +
      `font-size="${size}">${escapeXml(value)}</text>`,
    );
  }

  xAxis(scale: Scale, ticks: number[], label: string, format?: (v: number) => string): void {
    const y = this.plotBottom;
    this.parts.push(
      `<line x1="${this.plotLeft}" y1="${y}" x2="${this.plotRight}" y2="${y}" stroke="black"/>`,
    );
    const f = format ?? fmt;
    for (const t of ticks) {
      const x = scale(t);
      this.parts.push(`<line x1="${fmt(x)}" y1="${y}" x2="${fmt(x)}" y2="${y + 5}" stroke="black"/>`);
      this.text(x, y + 18, f(t), "middle", 10);
    }
    this.text((this.plotLeft + this.plotRight) / 2, this.frame.height - 10, label, "middle", 12);
  }

  yAxis(scale: Scale, ticks: number[], label: string, format?: (v: number) => string): void {
    const x = this.plotLeft;
    this.parts.push(
      `<line x1="${x}" y1="${this.plotTop}" x2="${x}" y2="${this.plotBottom}" stroke="black"/>`,
    );
    const f = format ?? fmt;
    for (const t of ticks) {
      const y = scale(t);
      this.parts.push(`<line x1="${x - 5}" y1="${fmt(y)}" x2="${x}" y2="${fmt(y)}" stroke="black"/>`);
      this.text(x - 8, y + 3, f(t), "end", 10);
    }
    this.parts.push(
      `<text x="16" y="${(this.plotTop + this.plotBottom) / 2}" text-anchor="middle" ` +
      `font-size="12" transform="rotate(-90 16 ${(this.plotTop + this.plotBottom) / 2})">` +
      `${escapeXml(label)}</text>`,
    );
  }

  legend(entries: Array<[string, string]>, dashes: string[] = []): void {
    let y = this.plotTop + 6;
    for (let i = 0; i < entries.length; i++) {
      const [label, color] = entries[i];
      const x = this.plotRight - 150;
      const dash = dashes[i] ? ` stroke-dasharray="${dashes[i]}"` : "";
      this.parts.push(
        `<line x1="${x}" y1="${y}" x2="${x + 22}" y2="${y}" stroke="${color}" stroke-width="2"${dash}/>`,
      );
      this.text(x + 28, y + 3, label, "start", 10);
      y += 16;
    }
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.frame.width}" ` +
      `height="${this.frame.height}" viewBox="0 0 ${this.frame.width} ${this.frame.height}" ` +
      `font-family="Helvetica, Arial, sans-serif">\n` +
      `<rect width="${this.frame.width}" height="${this.frame.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      `\n</svg>\n`
    );
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export { fmt };
