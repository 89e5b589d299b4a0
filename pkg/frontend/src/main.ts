import { Connection } from "./connection.js";
import { Controls } from "./controls.js";
import { EventKind } from "./protocol.js";
import { render } from "./render.js";
import { Store } from "./store.js";

const store = new Store();
const board = document.getElementById("app")!;
const panel = document.getElementById("panel")!;

const proto = location.protocol === "https:" ? "wss" : "ws";
const connection = new Connection({
  url: `${proto}://${location.host}/ws`,
  hello: {
    type: "hello",
    client_id: `ui-${Math.random().toString(36).slice(2, 8)}`,
  },
  onMessage: (message) => store.applyServer(message),
  onStatus: (up) => store.setConnected(up),
});

const controls = new Controls(panel, store, (kind: EventKind, payload) => {
  if (!connection.send({ type: "event", kind, payload })) {
    store.notice("offline: edit not sent");
  }
});

store.subscribe(() => {
  render(board, store);
  controls.sync();
});

connection.start();
render(board, store);
controls.sync();
