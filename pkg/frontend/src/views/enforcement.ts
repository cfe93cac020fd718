/** Inspection & citation view: FMCSA daily inspections or VWS station
 * passes, as stacked bars with a percent-of-total toggle plus the data
 * table. Numbers shown are API fields stringified; missing rates render
 * as an em dash.
 */

import { h, type ElementNode } from "../html.js";
import type { FmcsaPayload, VwsPayload } from "../types.js";
import type { ChartMode, SourceName } from "../state.js";
import { percentWidth, remainderPart, stackedFractions } from "./chartLayout.js";
import { fmtMetric } from "./comparison.js";

function stackedBar(parts: { name: string; count: number }[], maxTotal: number, mode: ChartMode): ElementNode {
  const widths = stackedFractions(parts.map((p) => p.count), maxTotal, mode);
  return h(
    "div",
    { class: "stacked-bar" },
    parts.map((part, i) =>
      h("div", {
        class: `bar-part part-${part.name.toLowerCase()}`,
        style: `width:${percentWidth(widths[i] ?? 0)}`,
        title: `${part.name}: ${part.count}`,
      }),
    ),
  );
}

export function renderFmcsa(payload: FmcsaPayload | null, mode: ChartMode): ElementNode {
  if (payload === null || payload.series.length === 0) {
    return h("div", { class: "empty-state" }, "No inspection data in range.");
  }
  const maxTotal = Math.max(...payload.series.map((p) => p.inspections));
  const rows = payload.series.map((point) =>
    h(
      "tr",
      { class: "series-row" },
      h("th", {}, point.date),
      h("td", {}, String(point.inspections)),
      h("td", {}, String(point.oos)),
      h("td", {}, fmtMetric(point.pct_oos)),
      h(
        "td",
        { class: "bar-cell" },
        stackedBar(
          [
            { name: "OOS", count: point.oos },
            { name: "Clear", count: remainderPart(point.inspections, [point.oos]) },
          ],
          maxTotal,
          mode,
        ),
      ),
    ),
  );
  return h(
    "div",
    { class: "enforcement-view fmcsa", "data-build": payload.build_id, "data-chart-mode": mode },
    h("p", { class: "note" }, "Fixed inspection stations are shown on the map for reference only."),
    h(
      "table",
      { class: "series-table" },
      h("thead", {}, h("tr", {}, ["Date", "Inspections", "Out of service", "% OOS", ""].map((c) => h("th", {}, c)))),
      h("tbody", {}, rows),
    ),
  );
}

export function renderVws(payload: VwsPayload | null, mode: ChartMode): ElementNode {
  if (payload === null || payload.series.length === 0) {
    return h("div", { class: "empty-state" }, "No station passes in range.");
  }
  const maxTotal = Math.max(...payload.series.map((p) => p.total));
  const rows = payload.series.map((point) =>
    h(
      "tr",
      { class: "series-row" },
      h("th", {}, point.bucket),
      h("td", {}, String(point.total)),
      h("td", {}, String(point.flagged)),
      h("td", {}, fmtMetric(point.pct_flagged)),
      h(
        "td",
        { class: "bar-cell" },
        stackedBar(
          Object.entries(point.by_category).map(([name, count]) => ({ name, count })),
          maxTotal,
          mode,
        ),
      ),
    ),
  );
  return h(
    "div",
    { class: "enforcement-view vws", "data-build": payload.build_id, "data-chart-mode": mode },
    h(
      "table",
      { class: "series-table" },
      h("thead", {}, h("tr", {}, ["Bucket", "Passes", "Flagged", "% flagged", ""].map((c) => h("th", {}, c)))),
      h("tbody", {}, rows),
    ),
  );
}

export function renderEnforcement(
  source: SourceName,
  fmcsa: FmcsaPayload | null,
  vws: VwsPayload | null,
  mode: ChartMode,
): ElementNode {
  return source === "fmcsa" ? renderFmcsa(fmcsa, mode) : renderVws(vws, mode);
}
