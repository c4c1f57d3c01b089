// Pure projection from a remote state document to what a panel draws.
// Rendering is a function of the latest snapshot and nothing else, so
// replaying a recorded stream of documents reproduces the same models.

import type { StateDocument, WidgetState } from "./types.js";

export interface WidgetView {
  id: string;
  kind: WidgetState["kind"];
  label: string;
  detail: string;
  sliderFraction?: number;
  checked?: boolean;
  activeTab?: number;
  tabs?: string[];
}

export interface PanelView {
  resolutionLabel: string;
  clockMs: number;
  appliedCount: number;
  widgets: WidgetView[];
}

function widgetLabel(id: string, state: WidgetState): string {
  switch (state.kind) {
    case "button":
      return `${id} (clicks: ${state.click_count})`;
    case "text_field":
      return `${id}: "${state.content}"${state.focused ? " [focused]" : ""}`;
    case "checkbox":
      return `${id}: ${state.checked ? "on" : "off"}`;
    case "slider":
      return `${id}: ${state.value}`;
    case "tab_bar":
      return `${id}: ${state.tabs[state.active_tab] ?? "?"}`;
  }
}

function widgetDetail(state: WidgetState): string {
  switch (state.kind) {
    case "button":
      return String(state.click_count);
    case "text_field":
      return state.content;
    case "checkbox":
      return state.checked ? "checked" : "unchecked";
    case "slider":
      return `${state.value} of ${state.min}..${state.max}`;
    case "tab_bar":
      return state.tabs.join(" | ");
  }
}

export function toPanelView(doc: StateDocument): PanelView {
  const snap = doc.snapshot;
  const widgets: WidgetView[] = [];
  for (const [id, state] of Object.entries(snap.widgets)) {
    const view: WidgetView = {
      id,
      kind: state.kind,
      label: widgetLabel(id, state),
      detail: widgetDetail(state),
    };
    if (state.kind === "slider") {
      const span = state.max - state.min;
      view.sliderFraction = span > 0 ? (state.value - state.min) / span : 0;
    }
    if (state.kind === "checkbox") view.checked = state.checked;
    if (state.kind === "tab_bar") {
      view.activeTab = state.active_tab;
      view.tabs = [...state.tabs];
    }
    widgets.push(view);
  }
  return {
    resolutionLabel: `${snap.resolution.width}x${snap.resolution.height}`,
    clockMs: snap.clock_ms,
    appliedCount: doc.session.applied,
    widgets,
  };
}
