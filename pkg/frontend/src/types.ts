// Shapes of the documents served by the bridge and the remote state endpoints.

export interface Resolution {
  width: number;
  height: number;
}

export type WidgetState =
  | { kind: "button"; click_count: number }
  | { kind: "text_field"; content: string; focused: boolean }
  | { kind: "checkbox"; checked: boolean }
  | { kind: "slider"; value: number; min: number; max: number; knob_x: number }
  | { kind: "tab_bar"; active_tab: number; tabs: string[] };

export interface Snapshot {
  resolution: Resolution;
  clock_ms: number;
  pointer: { x: number; y: number };
  focus: string | null;
  event_count: number;
  widgets: Record<string, WidgetState>;
}

export interface SessionInfo {
  peers: { addr: string; session_id: string; last_applied: number }[];
  applied: number;
  stale: number;
  errors: number;
  last_seq: number;
  uptime_ms: number;
}

export interface StateDocument {
  snapshot: Snapshot;
  logical: unknown;
  session: SessionInfo;
}

export interface RawAction {
  interface_id: string;
  widget_id: string;
  action: "click" | "toggle" | "set_value" | "set_text" | "key";
  payload?: string;
}

export interface DispatchOutcome {
  interface_id: string;
  status: string;
  latency_ms: number | null;
  detail: string | null;
}

export interface DispatchResponse {
  dispatched: number;
  skipped: { interface_id: string; reason: string }[];
  results: DispatchOutcome[];
}
