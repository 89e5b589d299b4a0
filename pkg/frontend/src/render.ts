/**
 * DOM rendering: one card per simulated device, elements drawn as labeled
 * rectangles occupying a slice of the card proportional to their assigned
 * share of the screen. Rendering is total: missing data draws placeholders.
 */
import { Store } from "./store.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Rough device family from its id, only used to pick a card accent. */
export function kindOf(id: string): string {
  const n = id.toLowerCase();
  if (n.includes("watch")) return "watch";
  if (n.includes("phone")) return "phone";
  if (n.includes("tablet") || n.includes("pad")) return "tablet";
  if (n.includes("tv") || n.includes("wall") || n.includes("screen")) return "tv";
  if (n.includes("laptop") || n.includes("desktop")) return "laptop";
  return "device";
}

function pct(x: number): string {
  return `${Math.round(x * 100)}%`;
}

export function render(root: HTMLElement, store: Store): void {
  const view = store.view();
  const inst = view.instance;
  if (!inst) {
    root.innerHTML = `<div class="placeholder">connecting\u2026</div>`;
    return;
  }

  const sol = view.solution;
  const badges = inst.users
    .map((u, i) => {
      const r = sol?.users.indexOf(u.id) ?? -1;
      const ru = r >= 0 ? sol!.per_user_completeness[r] : null;
      const cls = ru !== null && ru < 1 ? "badge low" : "badge";
      const label = ru !== null ? pct(ru) : "\u2013";
      const away = u.present ? "" : " away";
      return `<span class="${cls}${away}" data-user="${esc(u.id)}">${esc(u.id)} ${label}</span>`;
    })
    .join("");

  const status = [
    `<span class="conn ${view.connected ? "up" : "down"}">` +
      `${view.connected ? "connected" : "offline"}</span>`,
    `<span class="seq">scenario #${view.seq}</span>`,
    sol ? `<span class="objective">objective ${sol.objective.toFixed(3)}</span>` : "",
    view.reoptimizing ? `<span class="reoptimizing">re-optimizing\u2026</span>` : "",
    view.pendingCount ? `<span class="pending">${view.pendingCount} pending</span>` : "",
    `<span class="badges">${badges}</span>`,
  ].filter(Boolean).join("");

  const cards = store.deviceCards().map((card) => {
    const dims = card.device ? `${card.device.width}\u00d7${card.device.height}` : "?";
    const placed = card.placed.map((p) =>
      `<div class="placed" data-element="${esc(p.id)}" style="flex-grow:${
        Math.max(p.share, 0.04).toFixed(4)}">` +
      `<span class="el-name">${esc(p.id)}</span>` +
      `<span class="el-share">${pct(p.share)}</span></div>`,
    ).join("");
    const body = card.enabled
      ? (placed || `<div class="empty">empty</div>`)
      : `<div class="empty">off</div>`;
    const watchers = card.watchers.length
      ? `watched by ${card.watchers.map(esc).join(", ")}`
      : "nobody watching";
    return `<div class="card ${kindOf(card.id)}${card.enabled ? "" : " disabled"}"` +
      ` data-device="${esc(card.id)}">` +
      `<header><span class="dev-name">${esc(card.id)}</span>` +
      `<span class="dev-dims">${dims}</span></header>` +
      `<div class="screen">${body}</div>` +
      `<footer class="watchers">${watchers}</footer></div>`;
  }).join("");

  const warnings = view.warnings.length
    ? `<div class="warnings">${view.warnings.map((w) => esc(w)).join("<br>")}</div>`
    : "";
  const notices = view.notices.length
    ? `<div class="notices">${view.notices.map((n) =>
        `<div class="notice">${esc(n)}</div>`).join("")}</div>`
    : "";

  root.innerHTML =
    `<div class="statusbar">${status}</div>${warnings}` +
    `<div class="board">${cards}</div>${notices}`;
}
