// Typed client for the xrec session service. Thin by design: the UI
// never ranks or edits anything locally, it only mirrors what this
// API returns.

export type Chip = {
  index: number;
  phrase: string;
  aspect: string;
  on: boolean;
};

export type ItemCard = {
  item_id: string;
  score: number;
  keyphrases: Chip[];
  converged?: boolean;
  iterations?: number;
};

export type HistoryEvent = {
  keyphrase_index: number;
  action: "add" | "remove";
  timestamp: number;
};

export type Convergence = {
  converged: number;
  total: number;
  max_iterations: number;
  mean_iterations: number;
} | null;

export type SessionPayload = {
  session_id: string;
  user_id: string;
  items: ItemCard[];
  justification: string;
  history: HistoryEvent[];
  convergence: Convergence;
};

export type Edit = {
  keyphrase: number;
  action: "add" | "remove";
};

export type KeyphraseEntry = {
  index: number;
  phrase: string;
  aspect: string;
};

export type HealthPayload = {
  status: string;
  users: number;
  items: number;
  keyphrases: number;
  sessions: number;
};

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let code = "internal";
    let message = `${response.status} ${response.statusText}`;
    try {
      const body = await response.json();
      if (body && typeof body.code === "string") code = body.code;
      if (body && typeof body.message === "string") message = body.message;
      else if (body && body.detail) message = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body, keep the status line
    }
    throw new ApiError(code, message, response.status);
  }
  return (await response.json()) as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

export class XrecClient {
  baseUrl: string;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  health(): Promise<HealthPayload> {
    return request(`${this.baseUrl}/health`);
  }

  keyphrases(): Promise<{ keyphrases: KeyphraseEntry[] }> {
    return request(`${this.baseUrl}/keyphrases`);
  }

  createSession(userId: string, nCandidates?: number): Promise<SessionPayload> {
    const body: Record<string, unknown> = { user_id: userId };
    if (nCandidates !== undefined) body.n_candidates = nCandidates;
    return request(`${this.baseUrl}/sessions`, post(body));
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return request(`${this.baseUrl}/sessions/${sessionId}`);
  }

  submitCritique(sessionId: string, edits: Edit[]): Promise<SessionPayload> {
    return request(`${this.baseUrl}/sessions/${sessionId}/critique`, post({ edits }));
  }

  resetSession(sessionId: string): Promise<SessionPayload> {
    return request(`${this.baseUrl}/sessions/${sessionId}/reset`, post({}));
  }
}
