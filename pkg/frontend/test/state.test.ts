import { describe, expect, it } from "vitest";

import type { SessionPayload } from "../src/api.js";
import { aspectColorClass } from "../src/render.js";
import {
  applySession,
  canSubmit,
  initialState,
  pendingEdits,
  rankDelta,
  toggleChip,
} from "../src/state.js";

function payload(ids: string[]): SessionPayload {
  return {
    session_id: "s-1",
    user_id: "u0001",
    items: ids.map((id, pos) => ({
      item_id: id,
      score: 5 - pos,
      keyphrases: [],
    })),
    justification: "",
    history: [],
    convergence: null,
  };
}

describe("pending edits", () => {
  it("derives the action from the server state and withdraws on re-toggle", () => {
    const state = initialState();
    toggleChip(state, 3, true);
    expect(pendingEdits(state)).toEqual([{ keyphrase: 3, action: "remove" }]);
    toggleChip(state, 1, false);
    expect(pendingEdits(state)).toEqual([
      { keyphrase: 1, action: "add" },
      { keyphrase: 3, action: "remove" },
    ]);
    toggleChip(state, 3, true);
    expect(pendingEdits(state)).toEqual([{ keyphrase: 1, action: "add" }]);
  });

  it("gates submit on session, edits, and in-flight state", () => {
    const state = initialState();
    expect(canSubmit(state)).toBe(false);
    applySession(state, payload(["a"]));
    expect(canSubmit(state)).toBe(false);
    toggleChip(state, 0, true);
    expect(canSubmit(state)).toBe(true);
    state.inFlight = true;
    expect(canSubmit(state)).toBe(false);
  });

  it("clears pending edits when a response lands", () => {
    const state = initialState();
    applySession(state, payload(["a", "b"]));
    toggleChip(state, 0, true);
    applySession(state, payload(["b", "a"]), { keepPrevious: true });
    expect(state.pending.size).toBe(0);
    expect(state.previousOrder).toEqual(["a", "b"]);
  });
});

describe("rank deltas", () => {
  it("compares against the previous response only", () => {
    const state = initialState();
    applySession(state, payload(["a", "b", "c"]));
    expect(rankDelta(state, "a", 0)).toBeNull();

    applySession(state, payload(["b", "a", "c"]), { keepPrevious: true });
    expect(rankDelta(state, "b", 0)).toBe(1);
    expect(rankDelta(state, "a", 1)).toBe(-1);
    expect(rankDelta(state, "c", 2)).toBe(0);
    expect(rankDelta(state, "new", 3)).toBeNull();
  });
});

describe("aspect colors", () => {
  it("is deterministic and stays in the palette", () => {
    expect(aspectColorClass("food")).toBe(aspectColorClass("food"));
    for (const aspect of ["food", "service", "sleep", "location", "value"]) {
      expect(aspectColorClass(aspect)).toMatch(/^aspect-[0-7]$/);
    }
  });
});
