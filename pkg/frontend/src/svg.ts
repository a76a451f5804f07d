/** Tiny SVG string builder: scales, axes, polylines, labels. No DOM. */

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { left: 70, right: 25, top: 30, bottom: 55 };

export interface Scale {
  (value: number): number;
  domain: [number, number];
  ticks: number[];
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function linearScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const span = hi > lo ? hi - lo : 1;
  const fn = ((v: number) => rLo + ((v - lo) / span) * (rHi - rLo)) as Scale;
  fn.domain = [lo, hi];
  fn.ticks = niceTicks(lo, hi);
  return fn;
}

export function log10Scale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi > llo ? lhi - llo : 1;
  const fn = ((v: number) => rLo + ((Math.log10(v) - llo) / span) * (rHi - rLo)) as Scale;
  fn.domain = [lo, hi];
  const ticks: number[] = [];
  for (let e = Math.ceil(llo); e <= Math.floor(lhi); e++) ticks.push(Math.pow(10, e));
  fn.ticks = ticks.length >= 2 ? ticks : [lo, hi];
  return fn;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmtTick(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) return v.toExponential(0);
  return String(Number(v.toPrecision(6)));
}

export class Svg {
  private parts: string[] = [];

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#444", width = 1) {
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" ` +
        `y2="${y2.toFixed(2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(pts: Array<[number, number]>, stroke = "#1f6fb2", width = 2) {
    const d = pts.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    this.parts.push(
      `<polyline points="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string) {
    this.parts.push(
      `<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: { anchor?: string; size?: number; fill?: string } = {}) {
    const anchor = opts.anchor ?? "start";
    const size = opts.size ?? 13;
    const fill = opts.fill ?? "#222";
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" text-anchor="${anchor}" ` +
        `font-family="sans-serif" font-size="${size}" fill="${fill}">${esc(content)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xLabel: string, yLabel: string) {
    const { left, top } = MARGIN;
    const right = WIDTH - MARGIN.right;
    const bottom = HEIGHT - MARGIN.bottom;
    this.line(left, bottom, right, bottom);
    this.line(left, top, left, bottom);
    for (const t of xs.ticks) {
      const x = xs(t);
      this.line(x, bottom, x, bottom + 5);
      this.text(x, bottom + 20, fmtTick(t), { anchor: "middle", size: 11 });
    }
    for (const t of ys.ticks) {
      const y = ys(t);
      this.line(left - 5, y, left, y);
      this.text(left - 8, y + 4, fmtTick(t), { anchor: "end", size: 11 });
    }
    this.text((left + right) / 2, HEIGHT - 12, xLabel, { anchor: "middle" });
    this.parts.push(
      `<text x="16" y="${(top + bottom) / 2}" text-anchor="middle" ` +
        `font-family="sans-serif" font-size="13" fill="#222" ` +
        `transform="rotate(-90 16 ${(top + bottom) / 2})">${esc(yLabel)}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n<rect width="${WIDTH}" height="${HEIGHT}" ` +
      `fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}
