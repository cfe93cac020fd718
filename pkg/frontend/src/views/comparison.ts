/** Reference-vs-target comparison: four breakdown charts plus the
 * per-segment speed table. Every number shown is the API's own value
 * stringified; absent values render as an em dash, never 0.
 */

import { h, type ElementNode } from "../html.js";
import type { BreakdownPoint, ComparePayload, CompareSide, SpeedPayload, SpeedRow } from "../types.js";
import { barFractions, percentWidth } from "./chartLayout.js";

export const MISSING = "—";

export function fmtMetric(value: number | null): string {
  return value === null ? MISSING : String(value);
}

const LEVELS = [
  ["annual", "Annual"],
  ["monthly", "Monthly"],
  ["day_of_week", "Day of week"],
  ["hourly", "Hour of day"],
] as const;

interface PairedPoint {
  key: string;
  reference: number | null;
  target: number | null;
}

/** Align the two sides on their union of keys, reference order first. */
export function pairSeries(
  reference: BreakdownPoint[],
  target: BreakdownPoint[],
): PairedPoint[] {
  const byKey = new Map<string, PairedPoint>();
  for (const p of reference) {
    byKey.set(p.key, { key: p.key, reference: p.value, target: null });
  }
  for (const p of target) {
    const existing = byKey.get(p.key);
    if (existing) {
      existing.target = p.value;
    } else {
      byKey.set(p.key, { key: p.key, reference: null, target: p.value });
    }
  }
  return [...byKey.values()];
}

function chart(level: string, title: string, pairs: PairedPoint[]): ElementNode {
  const refBars = barFractions(pairs.map((p) => p.reference));
  const tgtBars = barFractions(pairs.map((p) => p.target));
  const rows = pairs.map((p, i) =>
    h(
      "tr",
      { class: "chart-row" },
      h("th", { class: "chart-key" }, p.key),
      h(
        "td",
        { class: "chart-cell reference" },
        h("div", { class: "bar", style: `width:${percentWidth(refBars[i] ?? 0)}` }),
        h("span", { class: "chart-value" }, fmtMetric(p.reference)),
      ),
      h(
        "td",
        { class: "chart-cell target" },
        h("div", { class: "bar", style: `width:${percentWidth(tgtBars[i] ?? 0)}` }),
        h("span", { class: "chart-value" }, fmtMetric(p.target)),
      ),
    ),
  );
  return h(
    "section",
    { class: "breakdown-chart", "data-level": level },
    h("h3", {}, title),
    h("table", { class: "chart-table" }, rows),
  );
}

function overallLine(side: CompareSide, role: string): ElementNode {
  return h(
    "p",
    { class: `overall ${role}` },
    `${side.label} (${side.members.join(", ")}): `,
    h("strong", {}, fmtMetric(side.overall)),
  );
}

export function renderComparison(payload: ComparePayload | null): ElementNode {
  if (payload === null) {
    return h(
      "div",
      { class: "empty-state" },
      "Pick reference and target segments to compare.",
    );
  }
  const charts: ElementNode[] = [];
  for (const [level, title] of LEVELS) {
    const ref = payload.reference[level];
    const tgt = payload.target[level];
    if (ref === null || tgt === null) {
      charts.push(
        h(
          "section",
          { class: "breakdown-chart daily-floor", "data-level": level },
          h("h3", {}, title),
          h("p", { class: "note" }, "Not available: this source reports daily totals."),
        ),
      );
      continue;
    }
    charts.push(chart(level, title, pairSeries(ref, tgt)));
  }
  return h(
    "div",
    { class: "comparison-view", "data-build": payload.build_id },
    h("h2", {}, `${payload.metric} (${payload.vehicle_class})`),
    overallLine(payload.reference, "reference"),
    overallLine(payload.target, "target"),
    ...charts,
  );
}

const SPEED_COLUMNS: [string, (row: SpeedRow) => number | null][] = [
  ["Posted limit", (r) => r.speed_limit_mph],
  ["Mean speed", (r) => r.mean_speed_mph],
  ["% over limit", (r) => r.pct_over_limit],
  ["% over limit (uncongested)", (r) => r.pct_over_limit_uncongested],
  ["Min observed", (r) => r.min_speed_mph],
  ["Max observed", (r) => r.max_speed_mph],
];

export function renderSegmentTable(payload: SpeedPayload | null): ElementNode {
  if (payload === null || payload.segments.length === 0) {
    return h("div", { class: "empty-state" }, "No segments selected.");
  }
  const head = h(
    "tr",
    {},
    h("th", {}, "Segment"),
    SPEED_COLUMNS.map(([name]) => h("th", {}, name)),
  );
  const body = payload.segments.map((row) =>
    h(
      "tr",
      { class: "segment-row", "data-segment": row.segment_id },
      h("th", {}, row.segment_id),
      SPEED_COLUMNS.map(([, pick]) => h("td", {}, fmtMetric(pick(row)))),
    ),
  );
  return h(
    "table",
    { class: "segment-table", "data-build": payload.build_id },
    h("thead", {}, head),
    h("tbody", {}, body),
  );
}
