// DOM rendering. Full re-render per state change; the lists involved
// are tens of nodes, so diffing would be complexity without payoff.

import type { Chip, ItemCard } from "./api.js";
import { canSubmit, rankDelta, type ViewState } from "./state.js";

export type Handlers = {
  onStart: (userId: string) => void;
  onToggle: (keyphrase: number, serverOn: boolean) => void;
  onSubmit: () => void;
  onReset: () => void;
};

const ASPECT_PALETTE = 8;

/** Stable small hash so an aspect keeps its color across renders. */
export function aspectColorClass(aspect: string): string {
  let h = 0;
  for (let i = 0; i < aspect.length; i++) {
    h = (h * 31 + aspect.charCodeAt(i)) >>> 0;
  }
  return `aspect-${h % ASPECT_PALETTE}`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function deltaArrow(delta: number | null): HTMLElement {
  if (delta === null || delta === 0) {
    const span = el("span", "delta held", delta === 0 ? "·" : "");
    return span;
  }
  const up = delta > 0;
  const span = el(
    "span",
    up ? "delta up" : "delta down",
    `${up ? "↑" : "↓"}${Math.abs(delta)}`,
  );
  return span;
}

function chipNode(chip: Chip, state: ViewState, handlers: Handlers): HTMLElement {
  const pending = state.pending.get(chip.index);
  const effectiveOn = pending !== undefined ? pending === "add" : chip.on;
  const classes = ["chip", effectiveOn ? "on" : "off", aspectColorClass(chip.aspect)];
  if (pending !== undefined) classes.push("pending");
  const node = el("button", classes.join(" "), chip.phrase);
  node.type = "button";
  node.dataset.kp = String(chip.index);
  node.dataset.serverOn = chip.on ? "1" : "0";
  node.addEventListener("click", () => handlers.onToggle(chip.index, chip.on));
  return node;
}

function chipGroups(item: ItemCard, state: ViewState, handlers: Handlers): HTMLElement {
  const byAspect = new Map<string, Chip[]>();
  for (const chip of item.keyphrases) {
    const group = byAspect.get(chip.aspect);
    if (group) group.push(chip);
    else byAspect.set(chip.aspect, [chip]);
  }
  const wrap = el("div", "chip-groups");
  for (const [aspect, chips] of byAspect) {
    const group = el("div", `chip-group ${aspectColorClass(aspect)}`);
    group.appendChild(el("span", "aspect-label", aspect));
    for (const chip of chips) group.appendChild(chipNode(chip, state, handlers));
    wrap.appendChild(group);
  }
  return wrap;
}

function cardNode(
  item: ItemCard,
  position: number,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const card = el("article", "card");
  const head = el("header", "card-head");
  head.appendChild(el("span", "rank", String(position + 1)));
  head.appendChild(deltaArrow(rankDelta(state, item.item_id, position)));
  head.appendChild(el("span", "item-id", item.item_id));
  head.appendChild(el("span", "score", item.score.toFixed(3)));
  if (item.iterations !== undefined) {
    const badge = el(
      "span",
      item.converged ? "iters converged" : "iters stopped",
      `${item.iterations} it`,
    );
    badge.title = item.converged ? "critique converged" : "iteration cap reached";
    head.appendChild(badge);
  }
  card.appendChild(head);
  card.appendChild(chipGroups(item, state, handlers));
  return card;
}

function controls(state: ViewState, handlers: Handlers): HTMLElement {
  const bar = el("div", "controls");

  const input = el("input");
  input.id = "user-input";
  input.placeholder = "user id";
  if (state.session) input.value = state.session.user_id;
  bar.appendChild(input);

  const start = el("button", "", "start");
  start.id = "start-btn";
  start.type = "button";
  start.disabled = state.inFlight;
  start.addEventListener("click", () => handlers.onStart(input.value.trim()));
  bar.appendChild(start);

  const submit = el("button", "", "submit critique");
  submit.id = "submit-btn";
  submit.type = "button";
  submit.disabled = !canSubmit(state);
  submit.addEventListener("click", () => handlers.onSubmit());
  bar.appendChild(submit);

  const reset = el("button", "", "reset");
  reset.id = "reset-btn";
  reset.type = "button";
  reset.disabled = state.session === null || state.inFlight;
  reset.addEventListener("click", () => handlers.onReset());
  bar.appendChild(reset);

  return bar;
}

function timeline(state: ViewState): HTMLElement {
  const session = state.session;
  const wrap = el("section", "timeline-wrap");
  wrap.appendChild(el("h2", "", "critique timeline"));
  const list = el("ol", "timeline");
  list.id = "timeline";
  if (session) {
    const catalog = new Map<number, string>();
    const first = session.items[0];
    if (first) {
      for (const chip of first.keyphrases) catalog.set(chip.index, chip.phrase);
    }
    for (const event of session.history) {
      const phrase = catalog.get(event.keyphrase_index) ?? `#${event.keyphrase_index}`;
      const li = el("li", `event ${event.action}`);
      li.appendChild(el("span", "action", event.action));
      li.appendChild(el("span", "phrase", phrase));
      list.appendChild(li);
    }
  }
  wrap.appendChild(list);
  return wrap;
}

function convergenceLine(state: ViewState): HTMLElement {
  const node = el("p", "convergence");
  node.id = "convergence";
  const summary = state.session?.convergence ?? null;
  if (summary) {
    node.textContent =
      `${summary.converged}/${summary.total} converged, ` +
      `max ${summary.max_iterations} it, mean ${summary.mean_iterations.toFixed(1)} it`;
  }
  return node;
}

export function render(root: HTMLElement, state: ViewState, handlers: Handlers): void {
  root.textContent = "";

  if (state.banner) {
    const banner = el("div", "banner", state.banner);
    banner.id = "banner";
    root.appendChild(banner);
  }

  root.appendChild(controls(state, handlers));

  if (state.notice) {
    const notice = el("p", "notice", state.notice);
    notice.id = "notice";
    root.appendChild(notice);
  }

  const session = state.session;
  if (!session) {
    root.appendChild(el("p", "empty", "start a session to see recommendations"));
    return;
  }

  const meta = el("p", "session-meta");
  meta.id = "session-meta";
  meta.textContent = `user ${session.user_id}, session ${session.session_id.slice(0, 8)}`;
  root.appendChild(meta);
  root.appendChild(convergenceLine(state));

  const just = el("blockquote", "justification", session.justification);
  just.id = "justification";
  root.appendChild(just);

  const list = el("section", "cards");
  list.id = "cards";
  session.items.forEach((item, position) => {
    list.appendChild(cardNode(item, position, state, handlers));
  });
  root.appendChild(list);

  root.appendChild(timeline(state));
}
