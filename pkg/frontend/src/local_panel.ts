// The operator-facing form. Every interaction becomes exactly one raw
// action posted through the queue; per-endpoint ACK badges show the result.

import { ActionQueue } from "./action_queue.js";
import type { DispatchResponse, RawAction } from "./types.js";

const INTERFACE_ID = "local";

// mapped payloads only: the mapping is a finite pre-configured store
export const HR_PRESETS = ["64", "72", "80"];
export const NOTE_PRESETS = ["stable", "bp low"];
export const VOLUME_PRESETS = [0, 25, 30, 50, 55, 75, 100];

export function nearestPreset(value: number, presets: number[]): number {
  let best = presets[0];
  for (const p of presets) {
    if (Math.abs(p - value) < Math.abs(best - value)) best = p;
  }
  return best;
}

export function buildAction(
  widget: string,
  action: RawAction["action"],
  payload?: string,
): RawAction {
  const raw: RawAction = { interface_id: INTERFACE_ID, widget_id: widget, action };
  if (payload !== undefined) raw.payload = payload;
  return raw;
}

export class LocalPanel {
  readonly root: HTMLElement;
  private badges: HTMLElement;
  private banner: HTMLElement;
  private controls: (HTMLButtonElement | HTMLInputElement | HTMLSelectElement)[] = [];

  constructor(private queue: ActionQueue) {
    this.root = document.createElement("div");
    this.root.className = "local-panel";
    this.banner = document.createElement("div");
    this.banner.className = "banner hidden";
    this.root.appendChild(this.banner);
    this.badges = document.createElement("div");
    this.badges.className = "badges";
    this.buildForm();
    this.root.appendChild(this.badges);
  }

  setConnectionState(state: "online" | "offline" | "disabled", queued: number): void {
    if (state === "online") {
      this.banner.className = "banner hidden";
      this.banner.textContent = "";
    } else {
      this.banner.className = "banner visible";
      this.banner.textContent =
        state === "disabled"
          ? `bridge unreachable; queue full (${queued}) — controls disabled`
          : `bridge unreachable; ${queued} action(s) queued`;
    }
    const disable = state === "disabled";
    for (const c of this.controls) c.disabled = disable;
  }

  showResults(resp: DispatchResponse): void {
    this.badges.textContent = "";
    for (const r of resp.results) {
      const badge = document.createElement("span");
      badge.className = `ack ${r.status}`;
      const latency = r.latency_ms === null ? "" : ` ${r.latency_ms.toFixed(1)} ms`;
      badge.textContent = `${r.interface_id}: ${r.status}${latency}`;
      this.badges.appendChild(badge);
    }
    for (const s of resp.skipped) {
      const badge = document.createElement("span");
      badge.className = "ack skipped";
      badge.textContent = `${s.interface_id}: ${s.reason}`;
      this.badges.appendChild(badge);
    }
  }

  private submit(action: RawAction): void {
    void this.queue.submit(action);
  }

  private addButton(label: string, onClick: () => void): HTMLButtonElement {
    const btn = document.createElement("button");
    btn.textContent = label;
    btn.addEventListener("click", onClick);
    this.controls.push(btn);
    this.root.appendChild(btn);
    return btn;
  }

  private addSelect(id: string, options: string[]): HTMLSelectElement {
    const select = document.createElement("select");
    select.id = id;
    for (const o of options) {
      const opt = document.createElement("option");
      opt.value = o;
      opt.textContent = o;
      select.appendChild(opt);
    }
    this.controls.push(select);
    this.root.appendChild(select);
    return select;
  }

  private buildForm(): void {
    const hr = this.addSelect("hr-select", HR_PRESETS);
    this.addButton("set heart rate", () =>
      this.submit(buildAction("hr_field", "set_value", hr.value)),
    );

    const note = this.addSelect("note-select", NOTE_PRESETS);
    this.addButton("set note", () =>
      this.submit(buildAction("note_field", "set_text", note.value)),
    );

    const alarm = document.createElement("input");
    alarm.type = "checkbox";
    alarm.id = "alarm-box";
    alarm.addEventListener("change", () => this.submit(buildAction("alarm_enabled", "toggle")));
    this.controls.push(alarm);
    this.root.appendChild(alarm);

    const slider = document.createElement("input");
    slider.type = "range";
    slider.id = "volume-slider";
    slider.min = "0";
    slider.max = "100";
    slider.addEventListener("change", () => {
      const snapped = nearestPreset(Number(slider.value), VOLUME_PRESETS);
      slider.value = String(snapped);
      this.submit(buildAction("volume_slider", "set_value", String(snapped)));
    });
    this.controls.push(slider);
    this.root.appendChild(slider);

    this.addButton("apply", () => this.submit(buildAction("apply_btn", "click")));
    this.addButton("silence", () => this.submit(buildAction("silence_btn", "click")));
    this.addButton("alarms tab", () =>
      this.submit(buildAction("main_tabs", "set_value", "Alarms")),
    );
    this.addButton("vitals tab", () =>
      this.submit(buildAction("main_tabs", "set_value", "Vitals")),
    );
    this.addButton("o2 alert", () => this.submit(buildAction("o2_alert", "toggle")));
  }
}
