/** Dashboard state. Everything lives in the URL; see urlstate.ts. */

export const VIEWS = ["speed_crash", "inspection_citation", "detouring", "assessment"] as const;
export type ViewName = (typeof VIEWS)[number];

export const SOURCES = ["fmcsa", "vws"] as const;
export type SourceName = (typeof SOURCES)[number];

export const VEHICLE_CLASSES = ["All", "CMV"] as const;
export type VehicleClassName = (typeof VEHICLE_CLASSES)[number];

export const WEIGHT_BINS = ["lt26k", "26k_80k", "gt80k"] as const;
export type WeightBinName = (typeof WEIGHT_BINS)[number];

export const CHART_MODES = ["stacked", "percent"] as const;
export type ChartMode = (typeof CHART_MODES)[number];

/** Inclusive ISO date range for one assessment period. */
export interface PeriodRange {
  start: string;
  end: string;
}

export interface ViewState {
  view: ViewName;
  /** Temporal filter strings in the API's own grammar ("6-14", "Tue,Wed"). */
  years: string | null;
  months: string | null;
  weeks: string | null;
  dows: string | null;
  hours: string | null;
  /** Reference/Target selections for comparison views. */
  reference: string[];
  target: string[];
  source: SourceName;
  vehicleClass: VehicleClassName;
  weightBin: WeightBinName | null;
  chartMode: ChartMode;
  /** Assessment period pickers. */
  before: PeriodRange | null;
  during: PeriodRange | null;
  after: PeriodRange | null;
  /** Detour view site and selected route row. */
  site: string | null;
  route: number | null;
  /** Map-selected segment ids. */
  segments: string[];
}

export function defaultState(): ViewState {
  return {
    view: "speed_crash",
    years: null,
    months: null,
    weeks: null,
    dows: null,
    hours: null,
    reference: [],
    target: [],
    source: "fmcsa",
    vehicleClass: "All",
    weightBin: null,
    chartMode: "stacked",
    before: null,
    during: null,
    after: null,
    site: null,
    route: null,
    segments: [],
  };
}

const ISO_DATE = /^\d{4}-\d{2}-\d{2}$/;
// Commas and colons are the URL list/range separators, so ids must not
// contain them; the API's ids are alphanumeric with dashes.
const ID_TOKEN = /^[A-Za-z0-9_-]+$/;
// Filter strings reuse the API grammar: "2023,2024", "6-14", "Tue,Wed".
const FILTER_TOKEN = /^[A-Za-z0-9]+([,-][A-Za-z0-9]+)*$/;

export function isValidPeriod(p: PeriodRange): boolean {
  return ISO_DATE.test(p.start) && ISO_DATE.test(p.end) && p.start <= p.end;
}

export function isValidIdList(ids: string[]): boolean {
  return ids.every((id) => ID_TOKEN.test(id));
}

/** A state the dashboard may encode and issue queries from. */
export function isValidState(s: ViewState): boolean {
  if (!VIEWS.includes(s.view)) return false;
  if (!SOURCES.includes(s.source)) return false;
  if (!VEHICLE_CLASSES.includes(s.vehicleClass)) return false;
  if (s.weightBin !== null && !WEIGHT_BINS.includes(s.weightBin)) return false;
  if (!CHART_MODES.includes(s.chartMode)) return false;
  for (const f of [s.years, s.months, s.weeks, s.dows, s.hours]) {
    if (f !== null && !FILTER_TOKEN.test(f)) return false;
  }
  for (const ids of [s.reference, s.target, s.segments]) {
    if (!isValidIdList(ids)) return false;
  }
  for (const p of [s.before, s.during, s.after]) {
    if (p !== null && !isValidPeriod(p)) return false;
  }
  if (s.site !== null && !ID_TOKEN.test(s.site)) return false;
  if (s.route !== null && (!Number.isInteger(s.route) || s.route < 0)) return false;
  return true;
}

/** Selections must be non-empty before a comparison query goes out. */
export function canCompare(s: ViewState): boolean {
  return s.reference.length > 0 && s.target.length > 0;
}
