import type { StateStream, StreamFactory, ActionPoster } from "../src/transport.js";
import type { DispatchResponse, RawAction, StateDocument } from "../src/types.js";

export function sampleDocument(overrides: Partial<{ hr: string; volume: number; applied: number }> = {}): StateDocument {
  const { hr = "", volume = 0, applied = 0 } = overrides;
  return {
    snapshot: {
      resolution: { width: 1920, height: 1080 },
      clock_ms: 200 * applied,
      pointer: { x: 0, y: 0 },
      focus: null,
      event_count: applied * 3,
      widgets: {
        main_tabs: { kind: "tab_bar", active_tab: 0, tabs: ["Vitals", "Alarms"] },
        hr_field: { kind: "text_field", content: hr, focused: false },
        alarm_enabled: { kind: "checkbox", checked: false },
        apply_btn: { kind: "button", click_count: applied },
        volume_slider: { kind: "slider", value: volume, min: 0, max: 100, knob_x: 200 },
      },
    },
    logical: {},
    session: {
      peers: [],
      applied,
      stale: 0,
      errors: 0,
      last_seq: applied,
      uptime_ms: 1000,
    },
  };
}

export interface OpenRecord {
  url: string;
  emit: (doc: unknown) => void;
  drop: () => void;
  closed: boolean;
}

export class RecordingStreamFactory implements StreamFactory {
  opens: OpenRecord[] = [];

  open(url: string, onDocument: (doc: unknown) => void, onDrop: () => void): StateStream {
    const record: OpenRecord = {
      url,
      emit: onDocument,
      drop: onDrop,
      closed: false,
    };
    this.opens.push(record);
    return {
      close: () => {
        record.closed = true;
      },
    };
  }
}

export class RecordingPoster implements ActionPoster {
  posts: RawAction[] = [];
  failing = false;
  response: DispatchResponse = {
    dispatched: 2,
    skipped: [],
    results: [
      { interface_id: "remote-a", status: "applied", latency_ms: 1.5, detail: null },
      { interface_id: "remote-b", status: "applied", latency_ms: 2.1, detail: null },
    ],
  };

  async post(action: RawAction): Promise<DispatchResponse> {
    if (this.failing) throw new Error("bridge unreachable");
    this.posts.push(action);
    return this.response;
  }
}
