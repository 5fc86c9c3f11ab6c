// Controller: wires the service client, the view model, and the DOM.

import { ApiError, ServiceClient } from "./api";
import { renderApp, renderState } from "./view";
import {
  applyExchange,
  applyFailure,
  canSend,
  initialViewModel,
  markBusy,
  type Mode,
  type ThreadViewModel,
} from "./viewmodel";

export class ChatApp {
  vm: ThreadViewModel;

  constructor(
    private root: HTMLElement,
    private client: ServiceClient,
  ) {
    this.vm = initialViewModel();
    renderApp(root);
    this.bind();
    this.render();
  }

  private bind(): void {
    const modeSelect = this.root.querySelector<HTMLSelectElement>("#mode-select")!;
    modeSelect.addEventListener("change", () => {
      this.vm.mode = modeSelect.value as Mode;
    });
    this.root.querySelector<HTMLButtonElement>("#new-session")!.addEventListener("click", () => {
      void this.startFromComposer();
    });
    const composer = this.root.querySelector<HTMLFormElement>("#composer")!;
    composer.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitDraft();
    });
    this.root.querySelector<HTMLInputElement>("#draft")!.addEventListener("input", () => this.render());
  }

  private draft(): string {
    return this.root.querySelector<HTMLInputElement>("#draft")!.value;
  }

  private clearDraft(): void {
    this.root.querySelector<HTMLInputElement>("#draft")!.value = "";
  }

  private render(): void {
    renderState(this.root, this.vm, this.draft());
  }

  private async startFromComposer(): Promise<void> {
    const opening = this.draft().trim();
    if (!opening) return;
    await this.startSession(this.vm.mode, opening);
  }

  private async submitDraft(): Promise<void> {
    const utterance = this.draft().trim();
    if (!canSend(this.vm, utterance)) return;
    if (this.vm.sessionId === null) {
      await this.startSession(this.vm.mode, utterance);
    } else {
      await this.sendMessage(utterance);
    }
  }

  async startSession(mode: Mode, opening: string): Promise<void> {
    this.vm = { ...initialViewModel(mode), busy: true };
    this.render();
    try {
      const exchange = await this.client.createSession(mode, opening);
      this.vm = applyExchange({ ...this.vm, busy: false }, opening, exchange);
      this.clearDraft();
    } catch (err) {
      // a failed create leaves no thread behind
      this.vm = applyFailure(initialViewModel(mode), err instanceof ApiError ? err.status : 0, String(err instanceof ApiError ? err.detail : err));
    }
    this.render();
  }

  async sendMessage(utterance: string): Promise<void> {
    const sessionId = this.vm.sessionId;
    if (sessionId === null) return;
    this.vm = markBusy(this.vm);
    this.render();
    try {
      const exchange = await this.client.sendMessage(sessionId, utterance);
      this.vm = applyExchange(this.vm, utterance, exchange);
      this.clearDraft();
    } catch (err) {
      this.vm = applyFailure(this.vm, err instanceof ApiError ? err.status : 0, String(err instanceof ApiError ? err.detail : err));
    }
    this.render();
  }
}
