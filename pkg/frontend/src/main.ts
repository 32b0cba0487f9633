// Application wiring: one controller owning the state, the client, and
// the render loop. Every state change round-trips through the service;
// the controller only mirrors responses.

import { ApiError, XrecClient } from "./api.js";
import {
  applySession,
  canSubmit,
  initialState,
  pendingEdits,
  toggleChip,
  type ViewState,
} from "./state.js";
import { render, type Handlers } from "./render.js";

const STORAGE_KEY = "xrec-session-id";

export type App = {
  state: ViewState;
  /** resolves once no request is in flight and the view is current */
  idle: () => Promise<void>;
};

type StorageLike = Pick<Storage, "getItem" | "setItem" | "removeItem">;

export function initApp(
  root: HTMLElement,
  client: XrecClient,
  storage: StorageLike,
): App {
  const state = initialState();
  let current: Promise<void> = Promise.resolve();

  const draw = () => render(root, state, handlers);

  /**
   * Run one service round trip. The inFlight flag is both the submit
   * guard and the single-request gate: a second call while one is
   * pending is dropped rather than queued.
   */
  const track = (work: () => Promise<void>): void => {
    if (state.inFlight) return;
    state.inFlight = true;
    draw();
    current = (async () => {
      try {
        await work();
      } catch (err) {
        if (err instanceof ApiError) {
          if (err.code === "redundant-edit") {
            // the service rejected the whole critique; drop the pending
            // overlay so the chips fall back to the server state
            state.pending = new Map();
            state.notice = `rejected: ${err.message}`;
          } else {
            state.banner = `${err.code}: ${err.message}`;
          }
        } else {
          state.banner = String(err);
        }
      } finally {
        state.inFlight = false;
        draw();
      }
    })();
  };

  const handlers: Handlers = {
    onStart(userId: string) {
      if (!userId) return;
      track(async () => {
        const payload = await client.createSession(userId);
        applySession(state, payload);
        storage.setItem(STORAGE_KEY, payload.session_id);
      });
    },

    onToggle(keyphrase: number, serverOn: boolean) {
      if (state.inFlight || !state.session) return;
      toggleChip(state, keyphrase, serverOn);
      draw();
    },

    onSubmit() {
      const session = state.session;
      if (!session || !canSubmit(state)) return;
      const edits = pendingEdits(state);
      track(async () => {
        const payload = await client.submitCritique(session.session_id, edits);
        applySession(state, payload, { keepPrevious: true });
      });
    },

    onReset() {
      const session = state.session;
      if (!session) return;
      track(async () => {
        const payload = await client.resetSession(session.session_id);
        applySession(state, payload);
      });
    },
  };

  // rehydrate a stored session so a page refresh lands where it left off
  const stored = storage.getItem(STORAGE_KEY);
  if (stored) {
    track(async () => {
      try {
        const payload = await client.getSession(stored);
        applySession(state, payload);
      } catch (err) {
        storage.removeItem(STORAGE_KEY);
        if (!(err instanceof ApiError && err.status === 404)) throw err;
      }
    });
  }

  draw();

  return {
    state,
    idle: async () => {
      // a tracked task can start another draw cycle; loop until settled
      let before;
      do {
        before = current;
        await before;
      } while (current !== before);
    },
  };
}

function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) return;
  initApp(root, new XrecClient(""), window.sessionStorage);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bootstrap);
}
