// Read-only visualization of one remote screen: subscribes to the state
// stream, renders the latest snapshot, resubscribes with backoff on drops.
// Nothing in here issues a write: the only transport capability it holds
// is the stream factory.

import { toPanelView, type PanelView } from "./render_model.js";
import type { StateStream, StreamFactory } from "./transport.js";
import type { StateDocument } from "./types.js";

export interface RemotePanelOptions {
  resubscribeDelayMs?: number;
  schedule?: (fn: () => void, ms: number) => void;
}

export class RemotePanelController {
  stale = true;
  lastView: PanelView | null = null;
  documentsSeen = 0;

  private stream: StateStream | null = null;
  private closed = false;
  private readonly delayMs: number;
  private readonly schedule: (fn: () => void, ms: number) => void;

  constructor(
    private url: string,
    private factory: StreamFactory,
    private onRender: (view: PanelView, stale: boolean) => void,
    options: RemotePanelOptions = {},
  ) {
    this.delayMs = options.resubscribeDelayMs ?? 1000;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  subscribe(): void {
    if (this.closed) return;
    this.stream = this.factory.open(
      this.url,
      (doc) => this.handleDocument(doc as StateDocument),
      () => this.handleDrop(),
    );
  }

  private handleDocument(doc: StateDocument): void {
    this.documentsSeen += 1;
    this.stale = false;
    this.lastView = toPanelView(doc);
    this.onRender(this.lastView, false);
  }

  private handleDrop(): void {
    this.stale = true;
    if (this.lastView) this.onRender(this.lastView, true);
    if (!this.closed) this.schedule(() => this.subscribe(), this.delayMs);
  }

  close(): void {
    this.closed = true;
    this.stream?.close();
  }
}

export function renderPanel(root: HTMLElement, view: PanelView, stale: boolean): void {
  root.textContent = "";
  const header = document.createElement("div");
  header.className = "panel-header";
  const title = document.createElement("span");
  title.textContent = `${view.resolutionLabel} · ${view.appliedCount} applied · clock ${view.clockMs} ms`;
  header.appendChild(title);
  const badge = document.createElement("span");
  badge.className = stale ? "badge stale" : "badge live";
  badge.textContent = stale ? "STALE" : "LIVE";
  header.appendChild(badge);
  root.appendChild(header);

  for (const w of view.widgets) {
    const row = document.createElement("div");
    row.className = `widget ${w.kind}`;
    row.dataset.widgetId = w.id;

    if (w.kind === "slider" && w.sliderFraction !== undefined) {
      const bar = document.createElement("div");
      bar.className = "slider-track";
      const fill = document.createElement("div");
      fill.className = "slider-fill";
      fill.style.width = `${Math.round(w.sliderFraction * 100)}%`;
      bar.appendChild(fill);
      row.appendChild(bar);
    }
    if (w.kind === "tab_bar" && w.tabs) {
      const tabs = document.createElement("span");
      tabs.className = "tabs";
      w.tabs.forEach((t, i) => {
        const tab = document.createElement("span");
        tab.className = i === w.activeTab ? "tab active" : "tab";
        tab.textContent = t;
        tabs.appendChild(tab);
      });
      row.appendChild(tabs);
    }
    const label = document.createElement("span");
    label.className = "label";
    label.textContent = w.label;
    row.appendChild(label);
    root.appendChild(row);
  }
}
