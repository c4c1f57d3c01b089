// The only two network capabilities the demo uses, behind interfaces so
// tests can inject recorders and the read-only property stays checkable.

import type { DispatchResponse, RawAction } from "./types.js";

export interface ActionPoster {
  post(action: RawAction): Promise<DispatchResponse>;
}

export interface StateStream {
  close(): void;
}

export interface StreamFactory {
  // onDocument fires per received state document; onDrop once when the
  // stream dies (the subscriber decides whether to reconnect)
  open(url: string, onDocument: (doc: unknown) => void, onDrop: () => void): StateStream;
}

export class HttpActionPoster implements ActionPoster {
  constructor(private baseUrl: string) {}

  async post(action: RawAction): Promise<DispatchResponse> {
    const resp = await fetch(`${this.baseUrl}/action`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(action),
    });
    if (!resp.ok) throw new Error(`bridge replied ${resp.status}`);
    return (await resp.json()) as DispatchResponse;
  }
}

export class WebSocketStreamFactory implements StreamFactory {
  open(url: string, onDocument: (doc: unknown) => void, onDrop: () => void): StateStream {
    const ws = new WebSocket(url);
    let dropped = false;
    const drop = () => {
      if (!dropped) {
        dropped = true;
        onDrop();
      }
    };
    ws.onmessage = (ev) => {
      try {
        onDocument(JSON.parse(ev.data));
      } catch {
        // a malformed frame is treated as a dead stream
        ws.close();
      }
    };
    ws.onclose = drop;
    ws.onerror = drop;
    return { close: () => ws.close() };
  }
}
