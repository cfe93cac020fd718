import { describe, expect, it } from "vitest";
import { byClass, byTag, findAll, textOf } from "../src/html.js";
import { buildMapSvg, type SegmentHighlighter } from "../src/map.js";
import type { DetourPayload, SegmentInfo } from "../src/types.js";
import {
  STATIC_NOTICE,
  applyRouteSelection,
  highlightForRoute,
  renderDetours,
} from "../src/views/detours.js";

class RecordingHighlighter implements SegmentHighlighter {
  calls: string[][] = [];
  cleared = 0;

  highlight(segmentIds: string[]): void {
    this.calls.push([...segmentIds]);
  }

  clear(): void {
    this.cleared += 1;
  }

  last(): string[] | undefined {
    return this.calls[this.calls.length - 1];
  }
}

const PAYLOAD: DetourPayload = {
  build_id: "39c1b2a4f8d0e6c7",
  site_id: "site-1",
  site_kind: "inspection",
  mainline_segment_ids: ["seg-4", "seg-5", "seg-6"],
  trip_counts: { through: 600, mainline: 480, detour: 120 },
  routes: [
    {
      route_key: "seg-3>alt-1>alt-2>seg-7",
      segment_ids: ["alt-1", "alt-2"],
      trip_count: 84,
      avg_travel_time_min: 14.2,
      total_length_miles: 6.5,
      crash_count: 3,
    },
    {
      route_key: "seg-3>alt-9>seg-7",
      segment_ids: ["alt-9"],
      trip_count: 36,
      avg_travel_time_min: null,
      total_length_miles: 4.1,
      crash_count: 0,
    },
  ],
};

describe("route selection", () => {
  it("highlights exactly the selected route's segments", () => {
    const map = new RecordingHighlighter();
    applyRouteSelection(PAYLOAD, 0, map);
    expect(map.last()).toEqual(["alt-1", "alt-2"]);
    expect(map.cleared).toBe(0);
  });

  it("replaces the highlight when the selection moves", () => {
    const map = new RecordingHighlighter();
    applyRouteSelection(PAYLOAD, 0, map);
    applyRouteSelection(PAYLOAD, 1, map);
    expect(map.calls).toEqual([
      ["alt-1", "alt-2"],
      ["alt-9"],
    ]);
  });

  it("clears on deselection and on out-of-range indexes", () => {
    const map = new RecordingHighlighter();
    applyRouteSelection(PAYLOAD, null, map);
    applyRouteSelection(PAYLOAD, 7, map);
    expect(map.cleared).toBe(2);
    expect(map.calls).toEqual([]);
  });

  it("copies the id list instead of aliasing the payload", () => {
    const ids = highlightForRoute(PAYLOAD.routes[0]!);
    ids.push("tampered");
    expect(PAYLOAD.routes[0]!.segment_ids).toEqual(["alt-1", "alt-2"]);
  });
});

describe("detour table", () => {
  it("renders rows in payload order with stringified values", () => {
    const tree = renderDetours(PAYLOAD);
    const rows = byClass(tree, "route-row");
    expect(rows).toHaveLength(2);
    expect(byTag(rows[0]!, "td").map(textOf)).toEqual([
      "1",
      "seg-3>alt-1>alt-2>seg-7",
      "84",
      "14.2",
      "6.5",
      "3",
    ]);
    expect(byTag(rows[1]!, "td").map(textOf)).toEqual([
      "2",
      "seg-3>alt-9>seg-7",
      "36",
      "—",
      "4.1",
      "0",
    ]);
    expect(rows[0]!.attrs["data-route-index"]).toBe("0");
    expect(rows[1]!.attrs["data-route-index"]).toBe("1");
  });

  it("marks only the selected row", () => {
    const tree = renderDetours(PAYLOAD, 1);
    const rows = byClass(tree, "route-row");
    expect((rows[0]!.attrs["class"] ?? "").includes("selected")).toBe(false);
    expect((rows[1]!.attrs["class"] ?? "").includes("selected")).toBe(true);
  });

  it("summarizes trip counts and carries the static-analysis notice", () => {
    const tree = renderDetours(PAYLOAD);
    const text = textOf(tree);
    expect(text).toContain("Through trips: 600, mainline: 480, detour: 120.");
    expect(text).toContain(STATIC_NOTICE);
  });

  it("states when no detours were detected", () => {
    const empty: DetourPayload = { ...PAYLOAD, routes: [] };
    const tree = renderDetours(empty);
    expect(textOf(tree)).toContain("No detours detected.");
    expect(byClass(tree, "route-table")).toHaveLength(0);
  });

  it("prompts for a site without a payload", () => {
    expect(textOf(renderDetours(null))).toContain("Pick an enforcement site.");
  });
});

describe("map highlight rendering", () => {
  function segment(id: string, lat0: number): SegmentInfo {
    return {
      segment_id: id,
      route_name: "I-81",
      direction: "N",
      county: "Washington",
      road_class: "interstate",
      length_miles: 1.0,
      speed_limit_mph: 60,
      geometry: [
        [lat0, -77.72],
        [lat0 + 0.0145, -77.72],
      ],
      successors: [],
    };
  }

  it("marks exactly the highlighted segments", () => {
    const segments = [segment("seg-1", 39.5), segment("alt-1", 39.52), segment("alt-2", 39.54)];
    const svg = buildMapSvg(segments, new Set(["alt-1", "alt-2"]));
    const lit = findAll(svg, (el) => el.attrs["class"] === "seg highlight").map(
      (el) => el.attrs["data-segment"],
    );
    const dim = findAll(svg, (el) => el.attrs["class"] === "seg").map(
      (el) => el.attrs["data-segment"],
    );
    expect(lit.sort()).toEqual(["alt-1", "alt-2"]);
    expect(dim).toEqual(["seg-1"]);
  });
});
