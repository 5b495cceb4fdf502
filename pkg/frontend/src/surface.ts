/** Space-time surface figure: the position field z(x, t) as a heatmap,
 * blue for troughs, white for zero, red for crests. */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseFields } from "./csv.js";
import { DEFAULT_FRAME, drawAxes, linearScale, SvgBuilder } from "./svg.js";

export interface SurfaceFigureOptions {
  title?: string;
  /** Cap on heatmap cells per axis; larger inputs are strided down. */
  maxCells?: number;
}

const NEGATIVE = [29, 78, 216]; // blue
const ZERO = [255, 255, 255];
const POSITIVE = [185, 28, 28]; // red

function divergingColor(value: number, vmax: number): string {
  if (vmax === 0) return "rgb(255,255,255)";
  const s = Math.max(-1, Math.min(1, value / vmax));
  const from = s < 0 ? NEGATIVE : POSITIVE;
  const a = Math.abs(s);
  const mix = ZERO.map((z, i) => Math.round(z + (from[i] - z) * a));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

function strideIndices(length: number, maxCount: number): number[] {
  const stride = Math.max(1, Math.ceil(length / maxCount));
  const indices: number[] = [];
  for (let i = 0; i < length; i += stride) indices.push(i);
  return indices;
}

export function renderSurfaceFigure(fieldsCsv: string, options: SurfaceFigureOptions = {}): string {
  const data = parseFields(fieldsCsv);
  if (data.times.length === 0) throw new Error("field file has no snapshots");
  const maxCells = options.maxCells ?? 140;
  const rows = strideIndices(data.times.length, maxCells);
  const cols = strideIndices(data.x.length, maxCells);

  const frame = DEFAULT_FRAME;
  const { width, height, margin } = frame;
  const svg = new SvgBuilder();
  const xScale = linearScale(0, data.x[data.x.length - 1] + data.x[0], margin.left, width - margin.right);
  const tEnd = data.times[data.times.length - 1];
  const yScale = linearScale(0, tEnd === 0 ? 1 : tEnd, height - margin.bottom, margin.top);

  let vmax = 0;
  for (const i of rows) for (const j of cols) vmax = Math.max(vmax, Math.abs(data.values[i][j]));

  for (let r = 0; r < rows.length; r += 1) {
    const i = rows[r];
    const tLow = data.times[i];
    const tHigh = r + 1 < rows.length ? data.times[rows[r + 1]] : tEnd + (tEnd - data.times[rows[Math.max(r - 1, 0)]]) / Math.max(rows.length - 1, 1);
    for (let c = 0; c < cols.length; c += 1) {
      const j = cols[c];
      const xLow = c === 0 ? 0 : (data.x[j] + data.x[cols[c - 1]]) / 2;
      const xHigh = c + 1 < cols.length ? (data.x[j] + data.x[cols[c + 1]]) / 2 : xScale.ticks().slice(-1)[0] ?? data.x[j];
      const px = xScale(xLow);
      const pw = Math.max(xScale(xHigh) - px, 0.5);
      const pyTop = yScale(tHigh);
      const ph = Math.max(yScale(tLow) - pyTop, 0.5);
      svg.rect(px, pyTop, pw, ph, {
        class: "cell",
        fill: divergingColor(data.values[i][j], vmax),
      });
    }
  }
  drawAxes(svg, frame, xScale, yScale, "x", "t", options.title ?? "z(x, t)");
  svg.text(width - margin.right - 6, margin.top - 6, `max |z| = ${vmax.toPrecision(3)}`, {
    class: "scale-note", "text-anchor": "end", fill: "#333333",
  });
  return svg.render(width, height);
}

export function main(argv: string[]): number {
  const files = argv.filter((a) => !a.startsWith("--"));
  if (files.length !== 2) {
    console.error("usage: surface <fields.csv> <out.svg> [--title=...]");
    return 2;
  }
  const titleArg = argv.find((a) => a.startsWith("--title="));
  const svg = renderSurfaceFigure(readFileSync(files[0], "utf8"), {
    title: titleArg ? titleArg.slice("--title=".length) : undefined,
  });
  writeFileSync(files[1], svg);
  console.log(`wrote ${files[1]}`);
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
