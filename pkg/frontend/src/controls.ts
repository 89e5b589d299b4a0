/**
 * Control panel: importance sliders, permission / access toggles, device
 * on-off switches, pins, objective weights. Every edit is applied
 * optimistically to the store and emitted as an event message; slider
 * drags are throttled per slider. Unchanged toggles send nothing.
 */
import { EventKind, VECTOR_KEYS } from "./protocol.js";
import { Store } from "./store.js";
import { SLIDER_INTERVAL_MS, throttled } from "./throttle.js";

export type SendFn = (kind: EventKind, payload: Record<string, unknown>) => void;

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function pinLabel(forced: number | null): string {
  return forced === null ? "auto" : forced === 1 ? "on" : "off";
}

export class Controls {
  private signature = "";
  private sliderSenders = new Map<string, (value: number) => void>();

  constructor(
    private readonly root: HTMLElement,
    private readonly store: Store,
    private readonly send: SendFn,
  ) {
    root.addEventListener("input", (ev) => this.onInput(ev));
    root.addEventListener("change", (ev) => this.onChange(ev));
    root.addEventListener("click", (ev) => this.onClick(ev));
  }

  /** Bring the panel in line with the store; rebuilds only on shape changes. */
  sync(): void {
    const inst = this.store.instance;
    if (!inst) {
      this.signature = "";
      this.root.innerHTML = `<div class="placeholder">waiting for scenario\u2026</div>`;
      return;
    }
    const sig = JSON.stringify([
      inst.users.map((u) => u.id),
      inst.devices.map((d) => d.id),
      inst.elements.map((e) => e.id),
    ]);
    if (sig !== this.signature) {
      this.signature = sig;
      this.rebuild();
    }
    this.refreshValues();
  }

  private rebuild(): void {
    const inst = this.store.instance!;
    const deviceRows = inst.devices.map((dev) => {
      const chars = VECTOR_KEYS.map((k) =>
        `<label class="char-label">${k}<input type="number" class="char" ` +
        `data-device="${esc(dev.id)}" data-dim="${k}" min="0" max="1" step="0.1">` +
        `</label>`).join("");
      return `<div class="dev-row" data-device="${esc(dev.id)}">` +
        `<button class="toggle" data-device="${esc(dev.id)}"></button>${chars}</div>`;
    }).join("");

    const userBlocks = inst.users.map((user) => {
      const access = inst.devices.map((dev) =>
        `<label class="access-label">${esc(dev.id)}<input type="checkbox" ` +
        `class="access" data-user="${esc(user.id)}" data-device="${esc(dev.id)}">` +
        `</label>`).join("");
      return `<div class="user-block" data-user="${esc(user.id)}">` +
        `<h3>${esc(user.id)}</h3><div class="access-row">${access}</div></div>`;
    }).join("");

    const elementBlocks = inst.elements.map((el) => {
      const perUser = inst.users.map((user) =>
        `<div class="imp-row" data-user="${esc(user.id)}">` +
        `<span class="who">${esc(user.id)}</span>` +
        `<input type="range" class="importance" min="0" max="100" step="1" ` +
        `data-element="${esc(el.id)}" data-user="${esc(user.id)}">` +
        `<label class="perm-label">may see<input type="checkbox" class="permission" ` +
        `data-element="${esc(el.id)}" data-user="${esc(user.id)}"></label></div>`).join("");
      const pins = inst.devices.map((dev) =>
        `<button class="pin" data-element="${esc(el.id)}" ` +
        `data-device="${esc(dev.id)}"></button>`).join("");
      return `<div class="element-block" data-element="${esc(el.id)}">` +
        `<h3>${esc(el.id)}</h3>${perUser}<div class="pin-row">${pins}</div></div>`;
    }).join("");

    this.root.innerHTML =
      `<section class="sec-devices"><h2>devices</h2>${deviceRows}</section>` +
      `<section class="sec-weights"><h2>weights</h2>` +
      `<label>quality<input type="number" id="w-quality" min="0" max="1" step="0.05"></label>` +
      `<label>completeness<input type="number" id="w-completeness" min="0" max="1" step="0.05"></label>` +
      `</section>` +
      `<section class="sec-users"><h2>users</h2>${userBlocks}</section>` +
      `<section class="sec-elements"><h2>elements</h2>${elementBlocks}</section>`;
  }

  private refreshValues(): void {
    const inst = this.store.instance!;
    const active = this.root.ownerDocument.activeElement;

    for (const btn of this.root.querySelectorAll<HTMLButtonElement>("button.toggle")) {
      const id = btn.dataset.device!;
      const on = this.store.effectiveEnabled(id);
      btn.textContent = `${id}: ${on ? "on" : "off"}`;
      btn.classList.toggle("on", on);
    }
    for (const input of this.root.querySelectorAll<HTMLInputElement>("input.char")) {
      if (input === active) continue;
      const dev = inst.devices.find((d) => d.id === input.dataset.device);
      if (dev) input.value = String(dev.characteristics[input.dataset.dim as
        keyof typeof dev.characteristics]);
    }
    for (const input of this.root.querySelectorAll<HTMLInputElement>("input.access")) {
      input.checked =
        this.store.effectiveAccess(input.dataset.user!, input.dataset.device!) === 1;
    }
    for (const input of
         this.root.querySelectorAll<HTMLInputElement>("input.importance")) {
      if (input === active) continue;
      const v = this.store.effectiveImportance(input.dataset.element!,
                                               input.dataset.user!);
      input.value = String(Math.round(v * 100));
    }
    for (const input of
         this.root.querySelectorAll<HTMLInputElement>("input.permission")) {
      input.checked =
        this.store.effectivePermission(input.dataset.element!,
                                       input.dataset.user!) === 1;
    }
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>("button.pin")) {
      const forced = this.store.effectivePin(btn.dataset.element!, btn.dataset.device!);
      btn.textContent = `${btn.dataset.device}: ${pinLabel(forced)}`;
      btn.classList.toggle("pinned", forced !== null);
    }
    const wq = this.root.querySelector<HTMLInputElement>("#w-quality");
    const wc = this.root.querySelector<HTMLInputElement>("#w-completeness");
    if (wq && wq !== active) wq.value = String(inst.weights.quality);
    if (wc && wc !== active) wc.value = String(inst.weights.completeness);
  }

  // -- outgoing edits ----------------------------------------------------------

  private onInput(ev: Event): void {
    const target = ev.target as HTMLElement;
    if (!(target instanceof HTMLInputElement)) return;
    if (!target.classList.contains("importance")) return;
    const element = target.dataset.element!;
    const user = target.dataset.user!;
    const value = Number(target.value) / 100;
    this.store.markPending(Store.key("importance", element, user), value);
    this.sliderSender(element, user)(value);
  }

  private sliderSender(element: string, user: string): (value: number) => void {
    const key = Store.key("importance", element, user);
    let sender = this.sliderSenders.get(key);
    if (!sender) {
      sender = throttled((value: number) =>
        this.send("set_importance", { element, user, value }), SLIDER_INTERVAL_MS);
      this.sliderSenders.set(key, sender);
    }
    return sender;
  }

  private onChange(ev: Event): void {
    const target = ev.target as HTMLElement;
    if (!(target instanceof HTMLInputElement)) return;

    if (target.classList.contains("permission")) {
      const element = target.dataset.element!;
      const user = target.dataset.user!;
      const next = target.checked ? 1 : 0;
      if (next === this.store.effectivePermission(element, user)) return;
      this.store.markPending(Store.key("permission", element, user), next);
      this.send("set_permission", { element, user, value: next });
      return;
    }
    if (target.classList.contains("access")) {
      const user = target.dataset.user!;
      const device = target.dataset.device!;
      const next = target.checked ? 1 : 0;
      if (next === this.store.effectiveAccess(user, device)) return;
      this.store.markPending(Store.key("access", user, device), next);
      this.send("set_access", { user, device, value: next });
      return;
    }
    if (target.classList.contains("char")) {
      const dev = this.store.instance?.devices.find(
        (d) => d.id === target.dataset.device);
      if (!dev) return;
      const characteristics: Record<string, number> = {};
      for (const input of this.root.querySelectorAll<HTMLInputElement>("input.char")) {
        if (input.dataset.device !== dev.id) continue;
        characteristics[input.dataset.dim!] = Number(input.value);
      }
      this.send("device_join", { id: dev.id, characteristics });
      return;
    }
    if (target.id === "w-quality" || target.id === "w-completeness") {
      const wq = this.root.querySelector<HTMLInputElement>("#w-quality");
      const wc = this.root.querySelector<HTMLInputElement>("#w-completeness");
      if (!wq || !wc) return;
      const weights = { quality: Number(wq.value), completeness: Number(wc.value) };
      this.store.markPending(Store.key("weights"), weights);
      this.send("set_weights", weights);
    }
  }

  private onClick(ev: Event): void {
    const target = ev.target as HTMLElement;
    if (!(target instanceof HTMLButtonElement)) return;

    if (target.classList.contains("toggle")) {
      const id = target.dataset.device!;
      const next = !this.store.effectiveEnabled(id);
      this.store.markPending(Store.key("device", id), next);
      this.send(next ? "device_join" : "device_leave", { id });
      this.refreshValues();
      return;
    }
    if (target.classList.contains("pin")) {
      const element = target.dataset.element!;
      const device = target.dataset.device!;
      const current = this.store.effectivePin(element, device);
      // cycle auto -> on -> off -> auto
      const next = current === null ? 1 : current === 1 ? 0 : null;
      this.store.markPending(Store.key("pin", element, device), next);
      this.send("set_pin", { element, device, forced: next });
      this.refreshValues();
    }
  }
}
