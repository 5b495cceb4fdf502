/** Control-magnitude figure: the continuous controller's L2 norm as a
 * smooth curve overlaid with the event-triggered controller's held norm,
 * drawn piecewise constant with one visible jump per update. */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseEvents, parseTrace } from "./csv.js";
import { DEFAULT_FRAME, drawAxes, linearScale, SvgBuilder } from "./svg.js";

export interface ControlNormFigureOptions {
  title?: string;
}

export function renderControlNormFigure(
  continuousTraceCsv: string,
  eventTraceCsv: string,
  eventsCsv: string,
  options: ControlNormFigureOptions = {},
): string {
  const continuous = parseTrace(continuousTraceCsv);
  const sampled = parseTrace(eventTraceCsv);
  const events = parseEvents(eventsCsv);

  const frame = DEFAULT_FRAME;
  const { width, height, margin } = frame;
  const svg = new SvgBuilder();

  const top = Math.max(...continuous.controlNorm, ...sampled.controlNorm, 1e-300);
  const tEnd = Math.max(continuous.t[continuous.t.length - 1], sampled.t[sampled.t.length - 1]);
  const xScale = linearScale(0, tEnd, margin.left, width - margin.right);
  const yScale = linearScale(0, top, height - margin.bottom, margin.top);
  drawAxes(svg, frame, xScale, yScale, "t", "|f(t)|", options.title ?? "Controller magnitude");

  svg.polyline(
    continuous.t.map((t, i) => [xScale(t), yScale(continuous.controlNorm[i])] as [number, number]),
    { class: "curve", "data-label": "continuous", stroke: "#1f6feb", "stroke-width": 1.5 },
  );

  // Held-norm staircase: one vertical jump per update (the first one jumps
  // up from zero when the control switches on), one horizontal hold segment
  // from each update to the next.
  const holdValue = (eventTime: number): number => {
    let index = sampled.t.findIndex((t) => t >= eventTime - 1e-12);
    if (index < 0) index = sampled.t.length - 1;
    return sampled.controlNorm[index];
  };
  let previous = 0;
  for (let k = 0; k < events.t.length; k += 1) {
    const t0 = events.t[k];
    const t1 = k + 1 < events.t.length ? events.t[k + 1] : tEnd;
    const value = holdValue(t0);
    svg.line(xScale(t0), yScale(previous), xScale(t0), yScale(value), {
      class: "jump",
      "data-update": k,
      stroke: "#111111",
      "stroke-width": 1.2,
    });
    svg.line(xScale(t0), yScale(value), xScale(t1), yScale(value), {
      class: "hold-segment",
      stroke: "#111111",
      "stroke-width": 1.5,
    });
    previous = value;
  }
  svg.text(width - margin.right - 10, margin.top + 16, "continuous", {
    class: "legend", "text-anchor": "end", fill: "#1f6feb",
  });
  svg.text(width - margin.right - 10, margin.top + 32, "event_triggered (held)", {
    class: "legend", "text-anchor": "end", fill: "#111111",
  });
  return svg.render(width, height);
}

export function main(argv: string[]): number {
  const files = argv.filter((a) => !a.startsWith("--"));
  if (files.length !== 4) {
    console.error("usage: controlnorm <continuous_trace.csv> <event_trace.csv> <events.csv> <out.svg>");
    return 2;
  }
  const [contPath, etPath, eventsPath, output] = files;
  const svg = renderControlNormFigure(
    readFileSync(contPath, "utf8"),
    readFileSync(etPath, "utf8"),
    readFileSync(eventsPath, "utf8"),
  );
  writeFileSync(output, svg);
  console.log(`wrote ${output}`);
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
