// Entry point: one local panel wired to the bridge, one read-only panel per
// remote state endpoint. URLs are overridable via query parameters, e.g.
//   ?bridge=http://127.0.0.1:7080&remotes=ws://127.0.0.1:7101/state/stream,ws://127.0.0.1:7102/state/stream

import { ActionQueue } from "./action_queue.js";
import { LocalPanel } from "./local_panel.js";
import { RemotePanelController, renderPanel } from "./remote_panel.js";
import { HttpActionPoster, WebSocketStreamFactory } from "./transport.js";

const params = new URLSearchParams(window.location.search);
const bridgeUrl = params.get("bridge") ?? "http://127.0.0.1:7080";
const remoteUrls = (
  params.get("remotes") ??
  "ws://127.0.0.1:7101/state/stream,ws://127.0.0.1:7102/state/stream"
).split(",");

const queue = new ActionQueue(new HttpActionPoster(bridgeUrl));
const panel = new LocalPanel(queue);
queue.events = {
  onState: (state, queued) => panel.setConnectionState(state, queued),
  onResult: (_action, resp) => panel.showResults(resp),
};
document.getElementById("local")!.appendChild(panel.root);
setInterval(() => void queue.flush(), 2000);

const factory = new WebSocketStreamFactory();
const remotesRoot = document.getElementById("remotes")!;
for (const url of remoteUrls) {
  const host = document.createElement("div");
  host.className = "remote-panel";
  remotesRoot.appendChild(host);
  const controller = new RemotePanelController(url, factory, (view, stale) =>
    renderPanel(host, view, stale),
  );
  controller.subscribe();
}
