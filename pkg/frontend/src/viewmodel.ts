// Pure thread state. The UI renders exactly what the server sent: act badges,
// profile rows, and reflection notes all come from response payloads, never
// from client-side inference.

import type { DebugPayload, Exchange } from "./api";

export type Mode = "macrs" | "single_agent";

export interface ThreadMessage {
  speaker: "user" | "system";
  text: string;
  act?: string; // badge, system messages only
  recommendations?: string[];
  terminal?: boolean;
}

export interface Banner {
  kind: "error" | "outcome";
  text: string;
  retryable: boolean;
}

export interface ThreadViewModel {
  sessionId: string | null;
  mode: Mode;
  messages: ThreadMessage[];
  profileDemand: [string, string][];
  profileHistory: string[];
  whyFailed: string | null;
  suggestions: { ask: string | null; recommend: string | null; chat: string | null } | null;
  banner: Banner | null;
  inputEnabled: boolean;
  busy: boolean;
}

export function initialViewModel(mode: Mode = "macrs"): ThreadViewModel {
  return {
    sessionId: null,
    mode,
    messages: [],
    profileDemand: [],
    profileHistory: [],
    whyFailed: null,
    suggestions: null,
    banner: null,
    inputEnabled: true,
    busy: false,
  };
}

export function canSend(vm: ThreadViewModel, draft: string): boolean {
  return vm.inputEnabled && !vm.busy && draft.trim().length > 0;
}

function applyDebug(vm: ThreadViewModel, debug: DebugPayload | undefined): void {
  if (!debug) return;
  vm.profileDemand = Object.entries(debug.profile.demand);
  vm.profileHistory = [...debug.profile.browsing_history];
  vm.whyFailed = debug.why_failed;
  vm.suggestions = debug.suggestions
    ? { ask: debug.suggestions.ask, recommend: debug.suggestions.recommend, chat: debug.suggestions.chat }
    : null;
}

export function applyExchange(vm: ThreadViewModel, userText: string, exchange: Exchange): ThreadViewModel {
  const next = structuredClone(vm);
  next.sessionId = exchange.session_id;
  next.busy = false;
  next.banner = null;
  next.messages.push({ speaker: "user", text: userText });
  next.messages.push({
    speaker: "system",
    text: exchange.system.text,
    act: exchange.system.act,
    recommendations: [...exchange.system.recommendations],
    terminal: exchange.terminal,
  });
  applyDebug(next, exchange.debug);
  if (exchange.terminal) {
    next.inputEnabled = false;
    next.banner = {
      kind: "outcome",
      text: exchange.outcome === "success" ? "Recommendation accepted — session complete." : "Session ended with a fallback list.",
      retryable: false,
    };
  }
  return next;
}

export function applyFailure(vm: ThreadViewModel, status: number, detail: string): ThreadViewModel {
  // the thread itself is left untouched; only a banner appears
  const next = structuredClone(vm);
  next.busy = false;
  if (status === 409) {
    next.inputEnabled = false;
    next.banner = { kind: "outcome", text: detail, retryable: false };
  } else {
    next.banner = { kind: "error", text: detail || "service unreachable", retryable: true };
  }
  return next;
}

export function markBusy(vm: ThreadViewModel): ThreadViewModel {
  return { ...structuredClone(vm), busy: true };
}
