/** Parsers for the versioned etdwave CSV schemas.
 *
 * Every file starts with a `# schema=<name>` line; further `# key=value`
 * lines carry metadata. A wrong or missing schema line is a hard error so
 * figure scripts never misread a file silently.
 */

export const TRACE_SCHEMA = "etdwave-trace-v1";
export const EVENTS_SCHEMA = "etdwave-events-v1";
export const FIELDS_SCHEMA = "etdwave-fields-v1";
export const COMPARE_SCHEMA = "etdwave-compare-v1";

export interface TraceData {
  meta: Record<string, string>;
  t: number[];
  E: number[];
  V: number[];
  errSq: number[];
  threshold: number[];
  controlNorm: number[];
  event: boolean[];
}

export interface EventsData {
  k: number[];
  t: number[];
  dwell: number[];
}

export interface CompareData {
  nUp: number;
  tau: number;
  t: number[];
  series: { label: string; values: number[] }[];
}

export interface FieldsData {
  x: number[];
  times: number[];
  /** values[i][j] = position field at times[i], x[j] */
  values: number[][];
}

interface Header {
  meta: Record<string, string>;
  body: string[];
}

function readHeader(text: string, schema: string): Header {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0 || lines[0].trim() !== `# schema=${schema}`) {
    const found = lines.length ? lines[0].trim() : "(empty file)";
    throw new Error(`schema mismatch: expected "# schema=${schema}", found "${found}"`);
  }
  const meta: Record<string, string> = {};
  let i = 1;
  while (i < lines.length && lines[i].startsWith("#")) {
    const body = lines[i].slice(1).trim();
    const eq = body.indexOf("=");
    if (eq > 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
    i += 1;
  }
  return { meta, body: lines.slice(i) };
}

function toNumber(token: string, where: string): number {
  const value = Number(token);
  if (token.trim() === "" || Number.isNaN(value) && token.trim() !== "nan") {
    throw new Error(`unparsable number "${token}" in ${where}`);
  }
  return token.trim() === "nan" ? NaN : value;
}

export function parseTrace(text: string): TraceData {
  const { meta, body } = readHeader(text, TRACE_SCHEMA);
  const expected = "t,E,V,err_sq,threshold,control_norm,event";
  if (body.length === 0 || body[0] !== expected) {
    throw new Error(`trace column header mismatch: expected "${expected}"`);
  }
  const out: TraceData = { meta, t: [], E: [], V: [], errSq: [], threshold: [], controlNorm: [], event: [] };
  for (const line of body.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== 7) throw new Error(`trace row has ${parts.length} fields, expected 7`);
    out.t.push(toNumber(parts[0], "trace"));
    out.E.push(toNumber(parts[1], "trace"));
    out.V.push(toNumber(parts[2], "trace"));
    out.errSq.push(toNumber(parts[3], "trace"));
    out.threshold.push(toNumber(parts[4], "trace"));
    out.controlNorm.push(toNumber(parts[5], "trace"));
    out.event.push(parts[6].trim() === "1");
  }
  return out;
}

export function parseEvents(text: string): EventsData {
  const { body } = readHeader(text, EVENTS_SCHEMA);
  const expected = "k,t_k,dwell,error_norm_sq_at_trigger,energy_at_trigger";
  if (body.length === 0 || body[0] !== expected) {
    throw new Error(`event column header mismatch: expected "${expected}"`);
  }
  const out: EventsData = { k: [], t: [], dwell: [] };
  for (const line of body.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== 5) throw new Error(`event row has ${parts.length} fields, expected 5`);
    out.k.push(toNumber(parts[0], "events"));
    out.t.push(toNumber(parts[1], "events"));
    out.dwell.push(toNumber(parts[2], "events"));
  }
  return out;
}

export function parseCompare(text: string): CompareData {
  const { meta, body } = readHeader(text, COMPARE_SCHEMA);
  if (body.length === 0 || !body[0].startsWith("t,")) {
    throw new Error("compare column header missing");
  }
  const labels = body[0].split(",").slice(1).map((name) => name.replace(/^E_/, ""));
  const series = labels.map((label) => ({ label, values: [] as number[] }));
  const t: number[] = [];
  for (const line of body.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== labels.length + 1) {
      throw new Error(`compare row has ${parts.length} fields, expected ${labels.length + 1}`);
    }
    t.push(toNumber(parts[0], "compare"));
    parts.slice(1).forEach((token, j) => series[j].values.push(toNumber(token, "compare")));
  }
  return { nUp: Number(meta["n_up"] ?? NaN), tau: Number(meta["tau"] ?? NaN), t, series };
}

export function parseFields(text: string): FieldsData {
  const { body } = readHeader(text, FIELDS_SCHEMA);
  if (body.length === 0) throw new Error("field file has no coordinate row");
  const x = body[0].split(",").map((v) => toNumber(v, "fields"));
  const times: number[] = [];
  const values: number[][] = [];
  for (const line of body.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== x.length + 1) {
      throw new Error(`field row has ${parts.length} entries, expected ${x.length + 1}`);
    }
    times.push(toNumber(parts[0], "fields"));
    values.push(parts.slice(1).map((v) => toNumber(v, "fields")));
  }
  return { x, times, values };
}
