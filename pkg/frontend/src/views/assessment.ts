/** Before/during/after assessment table.
 *
 * Cells come straight from the server's CSV serialization, so the table
 * shows exactly what a downloaded report would: this layer does no
 * number formatting of its own. Empty CSV cells render as "NA"; the
 * halo column becomes a tri-state badge.
 */

import { h, type ElementNode } from "../html.js";
import type { AssessmentPayload, HaloValue } from "../types.js";

export const NA = "NA";

const HALO_CLASS: Record<HaloValue, string> = {
  Present: "halo-present",
  Absent: "halo-absent",
  Indeterminate: "halo-indeterminate",
};

export interface AssessmentTable {
  header: string[];
  rows: { cells: string[]; halo: HaloValue }[];
}

/** Parse the server CSV. Fields are metric names, scope labels, and
 * formatted numbers; none can contain a comma, so a plain split is the
 * whole grammar. */
export function parseAssessmentCsv(csv: string): AssessmentTable {
  const lines = csv.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) return { header: [], rows: [] };
  const header = lines[0]!.split(",");
  const rows = lines.slice(1).map((line) => {
    const fields = line.split(",");
    const halo = fields[fields.length - 1] as HaloValue;
    return { cells: fields.slice(0, -1), halo };
  });
  return { header, rows };
}

export function displayCell(raw: string): string {
  return raw === "" ? NA : raw;
}

/** One-line digest of a row: the metric followed by its six value and
 * percent-change cells ("inspections: 56, 68, NA, 21.4, NA, NA"). Used
 * for row tooltips and the copy-row affordance. */
export function rowSummary(cells: string[]): string {
  const metric = cells[0] ?? "";
  const values = cells.slice(2).map(displayCell);
  return `${metric}: ${values.join(", ")}`;
}

export function renderAssessment(payload: AssessmentPayload | null): ElementNode {
  if (payload === null || payload.rows.length === 0) {
    return h("div", { class: "empty-state" }, "No assessment rows. Pick periods and metrics.");
  }
  const table = parseAssessmentCsv(payload.csv);
  const head = h(
    "tr",
    {},
    table.header.map((name) => h("th", {}, name)),
  );
  const body = table.rows.map((row) =>
    h(
      "tr",
      { class: "assessment-row", title: rowSummary(row.cells) },
      [
        ...row.cells.map((cell) => h("td", {}, displayCell(cell))),
        h("td", {}, h("span", { class: `badge ${HALO_CLASS[row.halo]}` }, row.halo)),
      ],
    ),
  );
  return h(
    "div",
    { class: "assessment-view", "data-build": payload.build_id },
    h("table", { class: "assessment-table" }, h("thead", {}, head), h("tbody", {}, body)),
  );
}
