/** Detour routes around an enforcement site: ranked list plus map
 * highlight wiring. Rows keep the server's order (busiest first); the
 * view adds no sorting and no arithmetic.
 */

import { h, type ElementNode } from "../html.js";
import type { SegmentHighlighter } from "../map.js";
import type { DetourPayload, DetourRoute } from "../types.js";
import { fmtMetric } from "./comparison.js";

export const STATIC_NOTICE =
  "Static analysis: detour routes are computed over the full trajectory history and do not respond to temporal filters.";

/** The exact segments a selected route lights up on the map. */
export function highlightForRoute(route: DetourRoute): string[] {
  return [...route.segment_ids];
}

export function applyRouteSelection(
  payload: DetourPayload,
  routeIndex: number | null,
  map: SegmentHighlighter,
): void {
  const route = routeIndex === null ? undefined : payload.routes[routeIndex];
  if (route === undefined) {
    map.clear();
    return;
  }
  map.highlight(highlightForRoute(route));
}

export function renderDetours(
  payload: DetourPayload | null,
  selectedRoute: number | null = null,
): ElementNode {
  if (payload === null) {
    return h("div", { class: "empty-state" }, "Pick an enforcement site.");
  }
  const counts = payload.trip_counts;
  const header = h(
    "div",
    { class: "detour-summary" },
    h("h2", {}, `${payload.site_id} (${payload.site_kind})`),
    h(
      "p",
      {},
      `Through trips: ${counts.through}, mainline: ${counts.mainline}, detour: ${counts.detour}.`,
    ),
    h("p", { class: "note static-notice" }, STATIC_NOTICE),
  );
  if (payload.routes.length === 0) {
    return h(
      "div",
      { class: "detour-view", "data-build": payload.build_id },
      header,
      h("div", { class: "empty-state" }, "No detours detected."),
    );
  }
  const head = h(
    "tr",
    {},
    ["#", "Route", "Trips", "Avg travel time (min)", "Length (mi)", "Crashes"].map((name) =>
      h("th", {}, name),
    ),
  );
  const body = payload.routes.map((route, i) =>
    h(
      "tr",
      {
        class: i === selectedRoute ? "route-row selected" : "route-row",
        "data-route-index": String(i),
      },
      h("td", {}, String(i + 1)),
      h("td", { class: "route-key" }, route.route_key),
      h("td", {}, String(route.trip_count)),
      h("td", {}, fmtMetric(route.avg_travel_time_min)),
      h("td", {}, String(route.total_length_miles)),
      h("td", {}, String(route.crash_count)),
    ),
  );
  return h(
    "div",
    { class: "detour-view", "data-build": payload.build_id },
    header,
    h("table", { class: "route-table" }, h("thead", {}, head), h("tbody", {}, body)),
  );
}
