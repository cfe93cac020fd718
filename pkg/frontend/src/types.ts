/** Payload shapes for /api/v1. Fields mirror the server exactly. */

export interface ErrorBody {
  error: { code: string; message: string; kind?: string; missing?: string[] };
}

export interface SegmentInfo {
  segment_id: string;
  route_name: string;
  direction: string;
  county: string;
  road_class: string;
  length_miles: number;
  speed_limit_mph: number | null;
  geometry: [number, number][];
  successors: string[];
}

export interface SegmentsPayload {
  build_id: string;
  total: number;
  segments: SegmentInfo[];
}

export interface SpeedRow {
  segment_id: string;
  speed_limit_mph: number | null;
  vehicle_class: string;
  hours_observed: number;
  epochs_observed: number;
  mean_speed_mph: number | null;
  harmonic_speed_mph: number | null;
  min_speed_mph: number | null;
  max_speed_mph: number | null;
  pct_over_limit: number | null;
  pct_over_limit_uncongested: number | null;
  reference_speed_mph: number | null;
}

export interface SpeedPayload {
  build_id: string;
  segments: SpeedRow[];
}

export interface BreakdownPoint {
  key: string;
  value: number | null;
}

export interface CompareSide {
  label: string;
  members: string[];
  overall: number | null;
  annual: BreakdownPoint[];
  monthly: BreakdownPoint[];
  day_of_week: BreakdownPoint[];
  hourly: BreakdownPoint[] | null;
}

export interface ComparePayload {
  build_id: string;
  metric: string;
  vehicle_class: string;
  reference: CompareSide;
  target: CompareSide;
}

export type HaloValue = "Present" | "Absent" | "Indeterminate";

export interface AssessmentRow {
  metric: string;
  scope: string;
  before: number | null;
  during: number | null;
  after: number | null;
  pc_before_during: number | null;
  pc_during_after: number | null;
  pc_before_after: number | null;
  pp_before_during: number | null;
  pp_during_after: number | null;
  pp_before_after: number | null;
  halo: HaloValue;
}

export interface AssessmentPayload {
  build_id: string;
  rows: AssessmentRow[];
  csv: string;
}

export interface DetourRoute {
  route_key: string;
  segment_ids: string[];
  trip_count: number;
  avg_travel_time_min: number | null;
  total_length_miles: number;
  crash_count: number;
}

export interface DetourPayload {
  build_id: string;
  site_id: string;
  site_kind: string;
  mainline_segment_ids: string[];
  trip_counts: { through: number; mainline: number; detour: number };
  routes: DetourRoute[];
}

export interface FmcsaPoint {
  date: string;
  inspections: number;
  oos: number;
  pct_oos: number | null;
}

export interface FmcsaPayload {
  build_id: string;
  series: FmcsaPoint[];
}

export interface VwsPoint {
  bucket: string;
  date: string;
  hour: number | null;
  total: number;
  flagged: number;
  by_category: Record<string, number>;
  pct_flagged: number | null;
}

export interface VwsPayload {
  build_id: string;
  series: VwsPoint[];
}

export interface CrashHotspot {
  segment_id: string;
  crash_count: number;
  fatal_count: number;
  cmv_crash_count: number;
  rank: number;
}

export interface CrashPayload {
  build_id: string;
  summary: Record<string, unknown>;
  hotspots: CrashHotspot[];
}

export interface MetaPayload {
  build_id: string;
  built_at: string;
  sites: string[];
  report: Record<string, unknown>;
}
