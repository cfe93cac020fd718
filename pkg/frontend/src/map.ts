/** Corridor map: segment polylines as inline SVG.
 *
 * The map draws from /segments geometry and exposes a highlight
 * interface the detour view drives. Coordinate projection happens here,
 * on geometry only; metric values never pass through this module.
 */

import { h, type ElementNode } from "./html.js";
import type { SegmentInfo } from "./types.js";

export interface SegmentHighlighter {
  highlight(segmentIds: string[]): void;
  clear(): void;
}

interface Projection {
  x(lon: number): number;
  y(lat: number): number;
}

const WIDTH = 400;
const HEIGHT = 600;
const PAD = 16;

function projectionFor(segments: SegmentInfo[]): Projection {
  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const seg of segments) {
    for (const [lat, lon] of seg.geometry) {
      if (lat < minLat) minLat = lat;
      if (lat > maxLat) maxLat = lat;
      if (lon < minLon) minLon = lon;
      if (lon > maxLon) maxLon = lon;
    }
  }
  const latSpan = maxLat - minLat || 1;
  const lonSpan = maxLon - minLon || 1;
  return {
    x: (lon) => PAD + ((lon - minLon) / lonSpan) * (WIDTH - 2 * PAD),
    // SVG y grows downward; north stays up.
    y: (lat) => HEIGHT - PAD - ((lat - minLat) / latSpan) * (HEIGHT - 2 * PAD),
  };
}

export function buildMapSvg(
  segments: SegmentInfo[],
  highlighted: ReadonlySet<string>,
): ElementNode {
  const proj = projectionFor(segments);
  const paths = segments.map((seg) => {
    const d = seg.geometry
      .map(([lat, lon], i) => `${i === 0 ? "M" : "L"}${proj.x(lon).toFixed(1)} ${proj.y(lat).toFixed(1)}`)
      .join(" ");
    const lit = highlighted.has(seg.segment_id);
    return h("path", {
      d,
      class: lit ? "seg highlight" : "seg",
      "data-segment": seg.segment_id,
    });
  });
  return h(
    "svg",
    {
      class: "corridor-map",
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      role: "img",
      "aria-label": "corridor segments",
    },
    paths,
  );
}

/** Highlighter that re-renders the SVG into a host element. */
export class SvgMap implements SegmentHighlighter {
  private highlightedIds = new Set<string>();

  constructor(
    private readonly host: { innerHTML: string },
    private segments: SegmentInfo[],
    private readonly toHtml: (node: ElementNode) => string,
  ) {
    this.draw();
  }

  setSegments(segments: SegmentInfo[]): void {
    this.segments = segments;
    this.draw();
  }

  highlight(segmentIds: string[]): void {
    this.highlightedIds = new Set(segmentIds);
    this.draw();
  }

  clear(): void {
    this.highlightedIds = new Set();
    this.draw();
  }

  highlighted(): ReadonlySet<string> {
    return this.highlightedIds;
  }

  private draw(): void {
    this.host.innerHTML = this.toHtml(buildMapSvg(this.segments, this.highlightedIds));
  }
}
