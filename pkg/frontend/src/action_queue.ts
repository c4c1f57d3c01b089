// Client-side resilience for the local panel: when the bridge is
// unreachable, actions queue up (bounded) and flush in order once a post
// succeeds again; past the cap the panel disables itself.

import type { ActionPoster } from "./transport.js";
import type { DispatchResponse, RawAction } from "./types.js";

export const QUEUE_CAP = 50;

export type QueueState = "online" | "offline" | "disabled";

export interface QueueEvents {
  onState?: (state: QueueState, queued: number) => void;
  onResult?: (action: RawAction, resp: DispatchResponse) => void;
}

export class ActionQueue {
  events: QueueEvents;

  private pending: RawAction[] = [];
  private state: QueueState = "online";

  constructor(private poster: ActionPoster, events: QueueEvents = {}) {
    this.events = events;
  }

  get queuedCount(): number {
    return this.pending.length;
  }

  get currentState(): QueueState {
    return this.state;
  }

  private setState(state: QueueState): void {
    this.state = state;
    this.events.onState?.(state, this.pending.length);
  }

  async submit(action: RawAction): Promise<boolean> {
    if (this.state === "disabled") return false;
    if (this.state === "offline") {
      this.enqueue(action);
      return false;
    }
    try {
      const resp = await this.poster.post(action);
      this.events.onResult?.(action, resp);
      return true;
    } catch {
      this.enqueue(action);
      return false;
    }
  }

  private enqueue(action: RawAction): void {
    if (this.pending.length >= QUEUE_CAP) {
      this.setState("disabled");
      return;
    }
    this.pending.push(action);
    this.setState(this.pending.length >= QUEUE_CAP ? "disabled" : "offline");
  }

  // try to drain; called on a timer or manual retry
  async flush(): Promise<void> {
    while (this.pending.length > 0) {
      const action = this.pending[0];
      let resp: DispatchResponse;
      try {
        resp = await this.poster.post(action);
      } catch {
        return; // still unreachable; keep order, try again later
      }
      this.pending.shift();
      this.events.onResult?.(action, resp);
    }
    this.setState("online");
  }
}
