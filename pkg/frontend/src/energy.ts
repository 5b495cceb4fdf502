/** Energy-comparison figure: the four controller variants on one grid,
 * one labeled curve each, optionally on a log-scaled energy axis. */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseCompare } from "./csv.js";
import { DEFAULT_FRAME, drawAxes, linearScale, log10Scale, SvgBuilder } from "./svg.js";

export interface EnergyFigureOptions {
  logScale?: boolean;
  title?: string;
}

const CURVE_STYLE: Record<string, { color: string; dash?: string }> = {
  continuous: { color: "#1f6feb" },
  event_triggered: { color: "#111111", dash: "5 3" },
  fixed: { color: "#2da44e" },
  periodic: { color: "#cf222e", dash: "2 3" },
};

export function renderEnergyFigure(compareCsv: string, options: EnergyFigureOptions = {}): string {
  const data = parseCompare(compareCsv);
  const frame = DEFAULT_FRAME;
  const { width, height, margin } = frame;
  const svg = new SvgBuilder();

  const allValues = data.series.flatMap((s) => s.values);
  let yScale;
  let floor = 0;
  if (options.logScale) {
    const positive = allValues.filter((v) => v > 0);
    if (positive.length === 0) throw new Error("log scale needs at least one positive energy");
    floor = Math.min(...positive);
    const top = Math.max(...positive);
    yScale = log10Scale(floor, top <= floor ? floor * 10 : top, height - margin.bottom, margin.top);
  } else {
    yScale = linearScale(0, Math.max(...allValues, 1e-300), height - margin.bottom, margin.top);
  }
  const xScale = linearScale(data.t[0], data.t[data.t.length - 1], margin.left, width - margin.right);

  drawAxes(
    svg, frame, xScale, yScale, "t", options.logScale ? "E(t) (log)" : "E(t)",
    options.title ?? "Energy under the four controllers",
  );

  data.series.forEach((series, index) => {
    const style = CURVE_STYLE[series.label] ?? { color: "#555555" };
    const points: Array<[number, number]> = [];
    series.values.forEach((value, i) => {
      const v = options.logScale ? Math.max(value, floor) : value;
      if (options.logScale && value <= 0) return; // drop exact zeros on log axes
      points.push([xScale(data.t[i]), yScale(v)]);
    });
    const attrs: Record<string, string | number> = {
      class: "curve",
      "data-label": series.label,
      stroke: style.color,
      "stroke-width": 1.5,
    };
    if (style.dash) attrs["stroke-dasharray"] = style.dash;
    svg.polyline(points, attrs);
    svg.text(width - margin.right - 10, margin.top + 16 * (index + 1), series.label, {
      class: "legend",
      "data-label": series.label,
      "text-anchor": "end",
      fill: style.color,
    });
  });
  return svg.render(width, height);
}

export function main(argv: string[]): number {
  const files = argv.filter((a) => !a.startsWith("--"));
  if (files.length !== 2) {
    console.error("usage: energy <compare.csv> <out.svg> [--log]");
    return 2;
  }
  const [input, output] = files;
  const svg = renderEnergyFigure(readFileSync(input, "utf8"), {
    logScale: argv.includes("--log"),
  });
  writeFileSync(output, svg);
  console.log(`wrote ${output}`);
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
