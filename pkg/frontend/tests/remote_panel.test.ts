import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { PanelView } from "../src/render_model.js";
import { RemotePanelController, renderPanel } from "../src/remote_panel.js";
import { RecordingStreamFactory, sampleDocument } from "./helpers.js";

function makeController(factory: RecordingStreamFactory) {
  const renders: { view: PanelView; stale: boolean }[] = [];
  const scheduled: (() => void)[] = [];
  const controller = new RemotePanelController(
    "ws://remote-a/state/stream",
    factory,
    (view, stale) => renders.push({ view, stale }),
    { schedule: (fn) => scheduled.push(fn) },
  );
  return { controller, renders, scheduled };
}

describe("remote panel", () => {
  let fetchSpy: ReturnType<typeof vi.fn>;

  beforeEach(() => {
    // network-trace assertion support: any HTTP request would be recorded
    fetchSpy = vi.fn(() => {
      throw new Error("remote panel must never issue HTTP requests");
    });
    vi.stubGlobal("fetch", fetchSpy);
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("renders every pushed snapshot", () => {
    const factory = new RecordingStreamFactory();
    const { controller, renders } = makeController(factory);
    controller.subscribe();
    factory.opens[0].emit(sampleDocument({ applied: 0 }));
    factory.opens[0].emit(sampleDocument({ hr: "72", applied: 1 }));
    expect(renders).toHaveLength(2);
    expect(renders[1].stale).toBe(false);
    expect(renders[1].view.appliedCount).toBe(1);
    expect(controller.documentsSeen).toBe(2);
  });

  it("is verifiably read-only: the network trace holds only stream opens", () => {
    const factory = new RecordingStreamFactory();
    const { controller, scheduled } = makeController(factory);
    controller.subscribe();
    factory.opens[0].emit(sampleDocument({ applied: 1 }));
    factory.opens[0].drop();
    scheduled.forEach((fn) => fn()); // resubscribe happens
    factory.opens[1].emit(sampleDocument({ applied: 2 }));

    // the entire observable network activity of a full subscribe / push /
    // drop / resubscribe cycle:
    expect(factory.opens.map((o) => o.url)).toEqual([
      "ws://remote-a/state/stream",
      "ws://remote-a/state/stream",
    ]);
    expect(fetchSpy).not.toHaveBeenCalled();
  });

  it("marks the panel stale on drop and auto-resubscribes", () => {
    const factory = new RecordingStreamFactory();
    const { controller, renders, scheduled } = makeController(factory);
    controller.subscribe();
    factory.opens[0].emit(sampleDocument({ hr: "72", applied: 1 }));
    factory.opens[0].drop();

    expect(controller.stale).toBe(true);
    // last known state is re-rendered with the stale badge
    const last = renders.at(-1)!;
    expect(last.stale).toBe(true);
    expect(last.view.appliedCount).toBe(1);

    expect(scheduled).toHaveLength(1);
    scheduled[0]();
    expect(factory.opens).toHaveLength(2);
    factory.opens[1].emit(sampleDocument({ hr: "72", applied: 2 }));
    expect(controller.stale).toBe(false);
  });

  it("a dead remote leaves other panels untouched", () => {
    const factory = new RecordingStreamFactory();
    const a = makeController(factory);
    const b = makeController(factory);
    a.controller.subscribe();
    b.controller.subscribe();
    factory.opens[0].emit(sampleDocument({ applied: 1 }));
    factory.opens[1].emit(sampleDocument({ applied: 1 }));

    factory.opens[0].drop(); // remote A dies
    expect(a.controller.stale).toBe(true);
    expect(b.controller.stale).toBe(false);

    factory.opens[1].emit(sampleDocument({ applied: 2 }));
    expect(b.renders.at(-1)!.view.appliedCount).toBe(2);
    expect(b.controller.stale).toBe(false);
  });

  it("stops resubscribing once closed", () => {
    const factory = new RecordingStreamFactory();
    const { controller, scheduled } = makeController(factory);
    controller.subscribe();
    controller.close();
    expect(factory.opens[0].closed).toBe(true);
    factory.opens[0].drop();
    scheduled.forEach((fn) => fn());
    expect(factory.opens).toHaveLength(1);
  });
});

describe("panel DOM rendering", () => {
  it("draws widgets and badges from the view", () => {
    const factory = new RecordingStreamFactory();
    const { controller, renders } = makeController(factory);
    controller.subscribe();
    factory.opens[0].emit(sampleDocument({ hr: "72", volume: 75, applied: 2 }));

    const root = document.createElement("div");
    renderPanel(root, renders.at(-1)!.view, false);
    expect(root.querySelector(".badge")!.textContent).toBe("LIVE");
    const slider = root.querySelector<HTMLElement>(".slider-fill")!;
    expect(slider.style.width).toBe("75%");
    expect(root.textContent).toContain('hr_field: "72"');

    renderPanel(root, renders.at(-1)!.view, true);
    expect(root.querySelector(".badge")!.textContent).toBe("STALE");
  });
});
