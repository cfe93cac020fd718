/** Lossless ViewState <-> query string mapping for shareable links.
 *
 * Defaults are omitted, so the default state encodes to the empty
 * string. Values stay literal (commas, colons, dashes) because every
 * token the state can hold is already URL-safe; decoding still accepts
 * percent-escaped forms via URLSearchParams.
 */

import {
  CHART_MODES,
  SOURCES,
  VEHICLE_CLASSES,
  VIEWS,
  WEIGHT_BINS,
  defaultState,
  isValidIdList,
  isValidPeriod,
  type ChartMode,
  type PeriodRange,
  type SourceName,
  type VehicleClassName,
  type ViewName,
  type ViewState,
  type WeightBinName,
} from "./state.js";

function periodToken(p: PeriodRange): string {
  return `${p.start}:${p.end}`;
}

function parsePeriod(token: string): PeriodRange | null {
  const parts = token.split(":");
  if (parts.length !== 2) return null;
  const period = { start: parts[0]!, end: parts[1]! };
  return isValidPeriod(period) ? period : null;
}

export function encodeViewState(state: ViewState): string {
  const d = defaultState();
  const pairs: [string, string][] = [];
  if (state.view !== d.view) pairs.push(["view", state.view]);
  for (const key of ["years", "months", "weeks", "dows", "hours"] as const) {
    const value = state[key];
    if (value !== null) pairs.push([key, value]);
  }
  if (state.reference.length) pairs.push(["ref", state.reference.join(",")]);
  if (state.target.length) pairs.push(["tgt", state.target.join(",")]);
  if (state.source !== d.source) pairs.push(["source", state.source]);
  if (state.vehicleClass !== d.vehicleClass) pairs.push(["class", state.vehicleClass]);
  if (state.weightBin !== null) pairs.push(["weight", state.weightBin]);
  if (state.chartMode !== d.chartMode) pairs.push(["chart", state.chartMode]);
  if (state.before !== null) pairs.push(["before", periodToken(state.before)]);
  if (state.during !== null) pairs.push(["during", periodToken(state.during)]);
  if (state.after !== null) pairs.push(["after", periodToken(state.after)]);
  if (state.site !== null) pairs.push(["site", state.site]);
  if (state.route !== null) pairs.push(["route", String(state.route)]);
  if (state.segments.length) pairs.push(["segs", state.segments.join(",")]);
  return pairs.map(([k, v]) => `${k}=${v}`).join("&");
}

function pickToken<T extends string>(raw: string | null, allowed: readonly T[]): T | null {
  return raw !== null && (allowed as readonly string[]).includes(raw) ? (raw as T) : null;
}

function idList(raw: string | null): string[] {
  if (raw === null || raw === "") return [];
  const ids = raw.split(",");
  return isValidIdList(ids) ? ids : [];
}

/** Unknown keys and malformed values fall back to defaults; a link can
 * never put the dashboard into a state it refuses to query from. */
export function decodeViewState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultState();

  state.view = pickToken<ViewName>(params.get("view"), VIEWS) ?? state.view;
  for (const key of ["years", "months", "weeks", "dows", "hours"] as const) {
    const raw = params.get(key);
    if (raw !== null && /^[A-Za-z0-9]+([,-][A-Za-z0-9]+)*$/.test(raw)) {
      state[key] = raw;
    }
  }
  state.reference = idList(params.get("ref"));
  state.target = idList(params.get("tgt"));
  state.source = pickToken<SourceName>(params.get("source"), SOURCES) ?? state.source;
  state.vehicleClass =
    pickToken<VehicleClassName>(params.get("class"), VEHICLE_CLASSES) ?? state.vehicleClass;
  state.weightBin = pickToken<WeightBinName>(params.get("weight"), WEIGHT_BINS);
  state.chartMode = pickToken<ChartMode>(params.get("chart"), CHART_MODES) ?? state.chartMode;
  for (const key of ["before", "during", "after"] as const) {
    const raw = params.get(key);
    if (raw !== null) state[key] = parsePeriod(raw);
  }
  const site = params.get("site");
  state.site = site !== null && /^[A-Za-z0-9_-]+$/.test(site) ? site : null;
  const route = params.get("route");
  if (route !== null && /^\d+$/.test(route)) state.route = Number(route);
  state.segments = idList(params.get("segs"));
  return state;
}
