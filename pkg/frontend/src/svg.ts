/** Minimal SVG scene building: linear/log scales, tick generation and a
 * tag accumulator. Output is plain standalone SVG markup. */

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.ticks = () => niceTicks(d0, d1, 6);
  return scale;
}

export function log10Scale(d0: number, d1: number, r0: number, r1: number): Scale {
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale requires positive domain");
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 === 0 ? 1 : l1 - l0;
  const scale = ((value: number) => r0 + ((Math.log10(value) - l0) / span) * (r1 - r0)) as Scale;
  scale.ticks = () => {
    const ticks: number[] = [];
    for (let p = Math.ceil(Math.min(l0, l1)); p <= Math.floor(Math.max(l0, l1)); p += 1) {
      ticks.push(10 ** p);
    }
    return ticks.length ? ticks : [d0, d1];
  };
  return scale;
}

export function niceTicks(min: number, max: number, count: number): number[] {
  if (!(max > min)) return [min];
  const rawStep = (max - min) / Math.max(count - 1, 1);
  const power = Math.floor(Math.log10(rawStep));
  const base = 10 ** power;
  const step = [1, 2, 5, 10].map((m) => m * base).find((s) => s >= rawStep) ?? base;
  const first = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= max + 1e-12 * step; v += step) ticks.push(Number(v.toPrecision(12)));
  return ticks;
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) return value.toExponential(0);
  return Number(value.toPrecision(4)).toString();
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderAttrs(attrs: Record<string, string | number>): string {
  return Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${typeof value === "number" ? round(value) : escapeXml(value)}"`)
    .join("");
}

function round(value: number): string {
  return Number.isFinite(value) ? String(Math.round(value * 100) / 100) : "0";
}

export class SvgBuilder {
  private readonly parts: string[] = [];

  add(tag: string): void {
    this.parts.push(tag);
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: Record<string, string | number> = {}): void {
    this.add(`<line x1="${round(x1)}" y1="${round(y1)}" x2="${round(x2)}" y2="${round(y2)}"${renderAttrs(attrs)}/>`);
  }

  polyline(points: Array<[number, number]>, attrs: Record<string, string | number> = {}): void {
    const joined = points.map(([x, y]) => `${round(x)},${round(y)}`).join(" ");
    this.add(`<polyline points="${joined}" fill="none"${renderAttrs(attrs)}/>`);
  }

  rect(x: number, y: number, w: number, h: number, attrs: Record<string, string | number> = {}): void {
    this.add(`<rect x="${round(x)}" y="${round(y)}" width="${round(w)}" height="${round(h)}"${renderAttrs(attrs)}/>`);
  }

  text(x: number, y: number, content: string, attrs: Record<string, string | number> = {}): void {
    this.add(`<text x="${round(x)}" y="${round(y)}"${renderAttrs(attrs)}>${escapeXml(content)}</text>`);
  }

  render(width: number, height: number): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">\n` +
      `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 720,
  height: 480,
  margin: { top: 36, right: 24, bottom: 44, left: 64 },
};

/** Axis lines, ticks and labels around the plot area. */
export function drawAxes(
  svg: SvgBuilder,
  frame: Frame,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  title: string,
): void {
  const { width, height, margin } = frame;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const y1 = margin.top;
  const axis = { stroke: "#333333", "stroke-width": 1 };
  svg.line(x0, y0, x1, y0, axis);
  svg.line(x0, y0, x0, y1, axis);
  for (const tick of xScale.ticks()) {
    const px = xScale(tick);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    svg.line(px, y0, px, y0 + 4, axis);
    svg.text(px, y0 + 16, formatTick(tick), { "text-anchor": "middle", fill: "#333333" });
  }
  for (const tick of yScale.ticks()) {
    const py = yScale(tick);
    if (py > y0 + 0.5 || py < y1 - 0.5) continue;
    svg.line(x0 - 4, py, x0, py, axis);
    svg.text(x0 - 7, py + 3.5, formatTick(tick), { "text-anchor": "end", fill: "#333333" });
  }
  svg.text((x0 + x1) / 2, height - 10, xLabel, { "text-anchor": "middle", fill: "#111111" });
  svg.add(
    `<text x="14" y="${(y0 + y1) / 2}" text-anchor="middle" fill="#111111" ` +
    `transform="rotate(-90 14 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
  );
  svg.text((x0 + x1) / 2, 20, title, { "text-anchor": "middle", fill: "#111111", "font-size": 13 });
}
