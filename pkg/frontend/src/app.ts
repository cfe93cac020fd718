/** Browser entry point: owns the URL, the fetch cycle, and event wiring.
 *
 * Everything below is glue. Rendering lives in views/, query-string
 * mapping in urlstate.ts, and request sequencing in api.ts, all of which
 * are tested headlessly; this file just connects them to the DOM.
 */

import { ApiClient, ApiError } from "./api.js";
import { h, toHtml, type ElementNode } from "./html.js";
import { SvgMap } from "./map.js";
import {
  CHART_MODES,
  SOURCES,
  VEHICLE_CLASSES,
  VIEWS,
  canCompare,
  type ViewName,
  type ViewState,
} from "./state.js";
import type {
  AssessmentPayload,
  ComparePayload,
  DetourPayload,
  FmcsaPayload,
  MetaPayload,
  SegmentsPayload,
  SpeedPayload,
  VwsPayload,
} from "./types.js";
import { decodeViewState, encodeViewState } from "./urlstate.js";
import { renderAssessment } from "./views/assessment.js";
import { renderComparison, renderSegmentTable } from "./views/comparison.js";
import { applyRouteSelection, renderDetours } from "./views/detours.js";
import { renderEnforcement } from "./views/enforcement.js";

const VIEW_LABELS: Record<ViewName, string> = {
  speed_crash: "Speeds & crashes",
  inspection_citation: "Inspections & citations",
  detouring: "Detouring",
  assessment: "Assessment",
};

interface SpeedView {
  build_id: string;
  compare: ComparePayload | null;
  speed: SpeedPayload;
}

interface EnforcementView {
  build_id: string;
  fmcsa: FmcsaPayload | null;
  vws: VwsPayload | null;
}

function temporalParams(state: ViewState, withHours: boolean): URLSearchParams {
  const params = new URLSearchParams();
  if (state.years !== null) params.set("years", state.years);
  if (state.months !== null) params.set("months", state.months);
  if (state.weeks !== null) params.set("weeks", state.weeks);
  if (state.dows !== null) params.set("dows", state.dows);
  if (withHours && state.hours !== null) params.set("hours", state.hours);
  return params;
}

function assessmentSpec(state: ViewState, site: string): Record<string, unknown> {
  const spec: Record<string, unknown> = {
    before: state.before,
    during: state.during,
    metrics: ["inspections", "citations", "citations_per_inspection"].flatMap((metric) => [
      { metric, scope: { kind: "site", members: [site] } },
      { metric, scope: { kind: "statewide" } },
    ]),
  };
  if (state.after !== null) spec["after"] = state.after;
  if (state.dows !== null) spec["dows"] = state.dows;
  if (state.hours !== null) spec["hours"] = state.hours;
  return spec;
}

class Dashboard {
  private state: ViewState;
  private lastDetours: DetourPayload | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly meta: MetaPayload,
    private readonly map: SvgMap,
    private readonly nav: HTMLElement,
    private readonly controls: HTMLElement,
    private readonly viewHost: HTMLElement,
  ) {
    this.state = decodeViewState(location.search);
  }

  start(): void {
    this.nav.addEventListener("click", (ev) => this.onNavClick(ev));
    this.controls.addEventListener("change", (ev) => this.onControlChange(ev));
    this.viewHost.addEventListener("click", (ev) => this.onViewClick(ev));
    window.addEventListener("popstate", () => {
      this.state = decodeViewState(location.search);
      this.renderChrome();
      void this.refresh();
    });
    this.renderChrome();
    void this.refresh();
  }

  private pushUrl(): void {
    const encoded = encodeViewState(this.state);
    history.pushState(null, "", encoded === "" ? location.pathname : `?${encoded}`);
  }

  private update(mutate: (s: ViewState) => void): void {
    mutate(this.state);
    this.pushUrl();
    this.renderChrome();
    void this.refresh();
  }

  // ------------------------------------------------------------ chrome

  private renderChrome(): void {
    this.nav.innerHTML = toHtml(
      h(
        "ul",
        { class: "tabs" },
        VIEWS.map((view) =>
          h(
            "li",
            {},
            h(
              "button",
              {
                class: view === this.state.view ? "tab active" : "tab",
                "data-view": view,
              },
              VIEW_LABELS[view],
            ),
          ),
        ),
      ),
    );
    this.controls.innerHTML = toHtml(this.buildControls());
  }

  private select(bind: string, options: readonly string[], current: string, labels?: Record<string, string>): ElementNode {
    return h(
      "select",
      { "data-bind": bind },
      options.map((opt) =>
        h(
          "option",
          current === opt ? { value: opt, selected: "selected" } : { value: opt },
          labels?.[opt] ?? opt,
        ),
      ),
    );
  }

  private textInput(bind: string, value: string | null, placeholder: string): ElementNode {
    return h("input", {
      type: "text",
      "data-bind": bind,
      value: value ?? "",
      placeholder,
    });
  }

  private labeled(text: string, control: ElementNode): ElementNode {
    return h("label", { class: "control" }, h("span", {}, text), control);
  }

  private buildControls(): ElementNode {
    const s = this.state;
    const siteOptions = ["", ...this.meta.sites];
    const common = [
      this.labeled("Hours", this.textInput("hours", s.hours, "6-14")),
      this.labeled("Days", this.textInput("dows", s.dows, "Tue,Wed")),
    ];
    switch (s.view) {
      case "speed_crash":
        return h(
          "div",
          { class: "controls-row" },
          this.labeled("Vehicle class", this.select("class", VEHICLE_CLASSES, s.vehicleClass)),
          this.labeled("Reference", this.textInput("ref", s.reference.join(","), "seg-1,seg-2")),
          this.labeled("Target", this.textInput("tgt", s.target.join(","), "seg-3")),
          common,
        );
      case "inspection_citation":
        return h(
          "div",
          { class: "controls-row" },
          this.labeled("Source", this.select("source", SOURCES, s.source, { fmcsa: "FMCSA", vws: "VWS" })),
          this.labeled("Chart", this.select("chart", CHART_MODES, s.chartMode)),
          s.source === "vws"
            ? this.labeled("Stations", this.textInput("ref", s.reference.join(","), "vws-north"))
            : [],
          common,
        );
      case "detouring":
        return h(
          "div",
          { class: "controls-row" },
          this.labeled("Site", this.select("site", siteOptions, s.site ?? "")),
        );
      case "assessment":
        return h(
          "div",
          { class: "controls-row" },
          this.labeled("Site", this.select("site", siteOptions, s.site ?? "")),
          this.labeled("Before", this.textInput("before", this.periodText(s.before), "2024-06-04:2024-06-07")),
          this.labeled("During", this.textInput("during", this.periodText(s.during), "2024-06-11:2024-06-14")),
          this.labeled("After", this.textInput("after", this.periodText(s.after), "2024-06-18:2024-06-21")),
          common,
        );
    }
  }

  private periodText(p: { start: string; end: string } | null): string | null {
    return p === null ? null : `${p.start}:${p.end}`;
  }

  // ------------------------------------------------------------ events

  private onNavClick(ev: Event): void {
    const button = (ev.target as Element).closest("button[data-view]");
    if (!button) return;
    const view = button.getAttribute("data-view") as ViewName;
    if (view === this.state.view) return;
    this.update((s) => {
      s.view = view;
    });
  }

  private onControlChange(ev: Event): void {
    const el = ev.target as HTMLInputElement | HTMLSelectElement;
    const bind = el.getAttribute("data-bind");
    if (bind === null) return;
    const value = el.value.trim();
    this.update((s) => {
      switch (bind) {
        case "class":
          s.vehicleClass = value as ViewState["vehicleClass"];
          break;
        case "source":
          s.source = value as ViewState["source"];
          break;
        case "chart":
          s.chartMode = value as ViewState["chartMode"];
          break;
        case "site":
          s.site = value === "" ? null : value;
          s.route = null;
          break;
        case "ref":
          s.reference = value === "" ? [] : value.split(",");
          break;
        case "tgt":
          s.target = value === "" ? [] : value.split(",");
          break;
        case "hours":
          s.hours = value === "" ? null : value;
          break;
        case "dows":
          s.dows = value === "" ? null : value;
          break;
        case "before":
        case "during":
        case "after": {
          const parts = value.split(":");
          s[bind] =
            parts.length === 2 && parts[0] && parts[1]
              ? { start: parts[0], end: parts[1] }
              : null;
          break;
        }
      }
    });
  }

  private onViewClick(ev: Event): void {
    const row = (ev.target as Element).closest("tr.route-row");
    if (!row || this.state.view !== "detouring") return;
    const index = Number(row.getAttribute("data-route-index"));
    if (!Number.isInteger(index)) return;
    // Clicking the selected row again deselects it.
    this.update((s) => {
      s.route = s.route === index ? null : index;
    });
  }

  // ----------------------------------------------------------- fetching

  private async refresh(): Promise<void> {
    try {
      switch (this.state.view) {
        case "speed_crash":
          return await this.refreshSpeed();
        case "inspection_citation":
          return await this.refreshEnforcement();
        case "detouring":
          return await this.refreshDetours();
        case "assessment":
          return await this.refreshAssessment();
      }
    } catch (err) {
      if (err instanceof ApiError) {
        this.show(h("div", { class: "empty-state error" }, `${err.code}: ${err.message}`));
        return;
      }
      throw err;
    }
  }

  private show(...nodes: ElementNode[]): void {
    this.viewHost.innerHTML = nodes.map(toHtml).join("");
  }

  private async refreshSpeed(): Promise<void> {
    const s = this.state;
    const body = await this.client.forView<SpeedView>("speed_crash", async (client, init) => {
      const params = temporalParams(s, true);
      if (s.segments.length) params.set("segments", s.segments.join(","));
      params.set("vehicle_class", s.vehicleClass);
      const speed = await client.json<SpeedPayload>(`/metrics/speed?${params}`, init);
      let compare: ComparePayload | null = null;
      if (canCompare(s)) {
        compare = await client.post<ComparePayload>(
          "/compare",
          {
            metric: "mean_speed",
            vehicle_class: s.vehicleClass,
            reference: { label: "Reference", members: s.reference },
            target: { label: "Target", members: s.target },
            filters: {
              years: s.years,
              months: s.months,
              weeks: s.weeks,
              dows: s.dows,
              hours: s.hours,
            },
          },
          init,
        );
      }
      // A build swap between the two requests leaves the pair unusable;
      // blank the id so the staleness check discards it.
      const mixed = compare !== null && compare.build_id !== speed.build_id;
      return { build_id: mixed ? "" : speed.build_id, compare, speed };
    });
    if (body === null) return;
    this.show(renderComparison(body.compare), renderSegmentTable(body.speed));
    this.map.highlight(s.segments);
  }

  private async refreshEnforcement(): Promise<void> {
    const s = this.state;
    if (s.source === "vws" && s.reference.length === 0) {
      this.show(h("div", { class: "empty-state" }, "Enter station ids to view passes."));
      return;
    }
    const body = await this.client.forView<EnforcementView>(
      "inspection_citation",
      async (client, init) => {
        if (s.source === "fmcsa") {
          // Daily source: only the day-of-week filter applies.
          const params = new URLSearchParams();
          if (s.dows !== null) params.set("dows", s.dows);
          const qs = params.toString();
          const fmcsa = await client.json<FmcsaPayload>(
            `/metrics/fmcsa${qs === "" ? "" : `?${qs}`}`,
            init,
          );
          return { build_id: fmcsa.build_id, fmcsa, vws: null };
        }
        const params = new URLSearchParams();
        params.set("stations", s.reference.join(","));
        if (s.dows !== null) params.set("dows", s.dows);
        if (s.hours !== null) params.set("hours", s.hours);
        if (s.weightBin !== null) params.set("weight_bin", s.weightBin);
        const vws = await client.json<VwsPayload>(`/metrics/vws?${params}`, init);
        return { build_id: vws.build_id, fmcsa: null, vws };
      },
    );
    if (body === null) return;
    this.show(renderEnforcement(s.source, body.fmcsa, body.vws, s.chartMode));
  }

  private async refreshDetours(): Promise<void> {
    const s = this.state;
    if (s.site === null) {
      this.lastDetours = null;
      this.show(renderDetours(null));
      this.map.clear();
      return;
    }
    const body = await this.client.forView<DetourPayload>("detouring", (client, init) =>
      client.json<DetourPayload>(`/detours/${s.site}`, init),
    );
    if (body === null) return;
    this.lastDetours = body;
    this.show(renderDetours(body, s.route));
    applyRouteSelection(body, s.route, this.map);
  }

  private async refreshAssessment(): Promise<void> {
    const s = this.state;
    if (s.site === null || s.before === null || s.during === null) {
      this.show(renderAssessment(null));
      return;
    }
    const site = s.site;
    const body = await this.client.forView<AssessmentPayload>("assessment", (client, init) =>
      client.post<AssessmentPayload>("/assessment", assessmentSpec(s, site), init),
    );
    if (body === null) return;
    this.show(renderAssessment(body));
  }
}

async function main(): Promise<void> {
  const client = new ApiClient("/api/v1");
  const nav = document.getElementById("nav")!;
  const controls = document.getElementById("controls")!;
  const viewHost = document.getElementById("view")!;
  const mapHost = document.getElementById("map")!;

  const [meta, segments] = await Promise.all([
    client.json<MetaPayload>("/meta"),
    client.json<SegmentsPayload>("/segments"),
  ]);
  const map = new SvgMap(mapHost, segments.segments, toHtml);

  new Dashboard(client, meta, map, nav, controls, viewHost).start();
}

main().catch((err) => {
  const host = document.getElementById("view");
  if (host) {
    host.innerHTML = toHtml(
      h("div", { class: "empty-state error" }, `Could not reach the service: ${String(err)}`),
    );
  }
});
