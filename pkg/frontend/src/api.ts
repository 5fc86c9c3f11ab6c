// Typed client for the convrec session HTTP API.
// The fetch function is injected so tests can run against a recorded mock.

export interface SystemMessage {
  act: string;
  text: string;
  recommendations: string[];
}

export interface ProfilePayload {
  demand: Record<string, string>;
  browsing_history: string[];
}

export interface SuggestionsPayload {
  ask: string | null;
  recommend: string | null;
  chat: string | null;
}

export interface DebugPayload {
  candidates: { act: string; text: string; recommendations: string[] }[] | null;
  planner_rationale: string | null;
  parse_fallback_used: boolean;
  profile: ProfilePayload;
  suggestions: (SuggestionsPayload & { created_at_turn?: number }) | null;
  experiences: { text: string; created_at_turn?: number } | null;
  why_failed: string | null;
}

export interface Exchange {
  session_id: string;
  user_utterance: string;
  system: SystemMessage;
  terminal: boolean;
  outcome: string | null;
  debug?: DebugPayload;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Exchange> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, err instanceof Error ? err.message : "network failure");
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, body.detail ?? response.statusText);
    }
    return body as Exchange;
  }

  createSession(mode: string, openingUtterance: string): Promise<Exchange> {
    return this.request("/sessions?debug=1", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        mode: "interactive",
        opening_utterance: openingUtterance,
        config: { system_mode: mode },
      }),
    });
  }

  sendMessage(sessionId: string, utterance: string): Promise<Exchange> {
    return this.request(`/sessions/${sessionId}/messages?debug=1`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ utterance }),
    });
  }
}
