// View state and its pure transitions. The server payload is the only
// source of truth for rankings, chips, and history; local state adds
// the pending-edit overlay, rank deltas against the previous response,
// and transient banner/notice text.

import type { SessionPayload } from "./api.js";

export type PendingAction = "add" | "remove";

export type ViewState = {
  session: SessionPayload | null;
  /** item_id order of the response before the latest critique */
  previousOrder: string[] | null;
  /** keyphrase index -> requested action, cleared on submit or reset */
  pending: Map<number, PendingAction>;
  inFlight: boolean;
  banner: string | null;
  notice: string | null;
};

export function initialState(): ViewState {
  return {
    session: null,
    previousOrder: null,
    pending: new Map(),
    inFlight: false,
    banner: null,
    notice: null,
  };
}

export function itemOrder(payload: SessionPayload): string[] {
  return payload.items.map((item) => item.item_id);
}

/** Install a fresh server payload, dropping any pending overlay. */
export function applySession(
  state: ViewState,
  payload: SessionPayload,
  opts: { keepPrevious?: boolean } = {},
): void {
  state.previousOrder =
    opts.keepPrevious && state.session ? itemOrder(state.session) : null;
  state.session = payload;
  state.pending = new Map();
  state.banner = null;
  state.notice = null;
}

/**
 * Toggle a chip's pending edit. The requested action is the opposite of
 * the chip's server-side state; toggling a second time withdraws the
 * pending edit instead of stacking another one.
 */
export function toggleChip(state: ViewState, keyphrase: number, serverOn: boolean): void {
  if (state.pending.has(keyphrase)) {
    state.pending.delete(keyphrase);
  } else {
    state.pending.set(keyphrase, serverOn ? "remove" : "add");
  }
  state.notice = null;
}

export function pendingEdits(state: ViewState): { keyphrase: number; action: PendingAction }[] {
  return [...state.pending.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([keyphrase, action]) => ({ keyphrase, action }));
}

export function canSubmit(state: ViewState): boolean {
  return state.session !== null && state.pending.size > 0 && !state.inFlight;
}

/**
 * Rank movement per item_id relative to the previous response:
 * positive = moved up, negative = moved down, 0 = held, null = new
 * to the list or no previous ranking to compare with.
 */
export function rankDelta(state: ViewState, itemId: string, position: number): number | null {
  if (state.previousOrder === null) return null;
  const before = state.previousOrder.indexOf(itemId);
  if (before < 0) return null;
  return before - position;
}
