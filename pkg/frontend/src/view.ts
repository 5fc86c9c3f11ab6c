// DOM rendering for the thread view model. Stateless: each render replaces
// the dynamic regions from scratch.

import type { ThreadViewModel } from "./viewmodel";
import { canSend } from "./viewmodel";

export function renderApp(root: HTMLElement): void {
  root.innerHTML = `
    <div class="layout">
      <main class="thread-pane">
        <form id="session-controls">
          <select id="mode-select" aria-label="system mode">
            <option value="macrs">multi-agent</option>
            <option value="single_agent">single agent</option>
          </select>
          <button id="new-session" type="button">New session</button>
        </form>
        <div id="banner" hidden></div>
        <ol id="thread" aria-live="polite"></ol>
        <form id="composer">
          <input id="draft" type="text" autocomplete="off" placeholder="Say something..." />
          <button id="send" type="submit" disabled>Send</button>
        </form>
      </main>
      <aside class="side-panel">
        <section id="profile-panel">
          <h3>User profile</h3>
          <dl id="profile-demand"></dl>
          <h4>Browsing history</h4>
          <ul id="profile-history"></ul>
        </section>
        <section id="reflection-panel">
          <h3>Reflection</h3>
          <p id="why-failed"></p>
          <ul id="suggestions"></ul>
        </section>
      </aside>
    </div>`;
}

function text(parent: Element, selector: string, value: string): void {
  const el = parent.querySelector(selector);
  if (el) el.textContent = value;
}

export function renderState(root: HTMLElement, vm: ThreadViewModel, draft: string): void {
  const thread = root.querySelector<HTMLOListElement>("#thread")!;
  thread.innerHTML = "";
  for (const message of vm.messages) {
    const li = document.createElement("li");
    li.className = `message ${message.speaker}`;
    if (message.speaker === "system" && message.act) {
      const badge = document.createElement("span");
      badge.className = `act-badge act-${message.act}`;
      badge.textContent = message.act;
      li.appendChild(badge);
    }
    const body = document.createElement("span");
    body.className = "message-text";
    body.textContent = message.text;
    li.appendChild(body);
    if (message.recommendations && message.recommendations.length > 0) {
      const card = document.createElement("ul");
      card.className = "item-card";
      for (const title of message.recommendations) {
        const item = document.createElement("li");
        item.textContent = title;
        card.appendChild(item);
      }
      li.appendChild(card);
    }
    thread.appendChild(li);
  }

  const banner = root.querySelector<HTMLDivElement>("#banner")!;
  if (vm.banner) {
    banner.hidden = false;
    banner.className = `banner banner-${vm.banner.kind}`;
    banner.textContent = vm.banner.text + (vm.banner.retryable ? " — retry when ready." : "");
  } else {
    banner.hidden = true;
    banner.textContent = "";
  }

  const demand = root.querySelector<HTMLDListElement>("#profile-demand")!;
  demand.innerHTML = "";
  if (vm.profileDemand.length === 0) {
    demand.innerHTML = "<dd>(none)</dd>";
  }
  for (const [key, value] of vm.profileDemand) {
    const dt = document.createElement("dt");
    dt.textContent = key;
    const dd = document.createElement("dd");
    dd.textContent = value;
    demand.append(dt, dd);
  }
  const history = root.querySelector<HTMLUListElement>("#profile-history")!;
  history.innerHTML = vm.profileHistory.length ? "" : "<li>(none)</li>";
  for (const title of vm.profileHistory) {
    const li = document.createElement("li");
    li.textContent = title;
    history.appendChild(li);
  }

  const reflection = root.querySelector<HTMLElement>("#reflection-panel")!;
  text(reflection, "#why-failed", vm.whyFailed ?? "(none)");
  const suggestions = reflection.querySelector<HTMLUListElement>("#suggestions")!;
  suggestions.innerHTML = "";
  const slots = vm.suggestions ?? { ask: null, recommend: null, chat: null };
  for (const [slot, value] of Object.entries(slots)) {
    if (value) {
      const li = document.createElement("li");
      li.textContent = `${slot}: ${value}`;
      suggestions.appendChild(li);
    }
  }
  if (!suggestions.childElementCount) {
    suggestions.innerHTML = "<li>(none)</li>";
  }

  const input = root.querySelector<HTMLInputElement>("#draft")!;
  const send = root.querySelector<HTMLButtonElement>("#send")!;
  input.disabled = !vm.inputEnabled || vm.busy;
  send.disabled = !canSend(vm, draft);
}
