/** Debounced prediction state machine.
 *
 * Committed form changes arrive via submit(); a short debounce window
 * coalesces bursts, a new submission aborts any request still in
 * flight, and responses arriving out of turn are dropped, so at most
 * one request is live and the rendered state never regresses. The
 * last good document is kept (marked stale) through errors and
 * outages so the clinician keeps context.
 */

import { Api, ApiError, Features, PredictionDoc } from "./api.js";
import { fieldFor } from "./format.js";

export type PredictPhase = "idle" | "pending" | "ready" | "invalid" | "unreachable";

export interface FieldError {
  column: string | null;
  message: string;
}

export interface PredictState {
  phase: PredictPhase;
  doc: PredictionDoc | null;
  stale: boolean;
  fieldError: FieldError | null;
}

export interface PredictorOptions {
  debounceMs?: number;
}

export class PredictController {
  state: PredictState = { phase: "idle", doc: null, stale: false, fieldError: null };

  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  private seq = 0;
  private readonly debounceMs: number;

  constructor(
    private readonly api: Api,
    private readonly columns: string[],
    private readonly onChange: (state: PredictState) => void,
    options: PredictorOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 250;
  }

  /** Queue a prediction for the given committed form values. */
  submit(features: Features): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.run(features);
    }, this.debounceMs);
  }

  private set(state: PredictState): void {
    this.state = state;
    this.onChange(state);
  }

  private async run(features: Features): Promise<void> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const ticket = ++this.seq;
    this.set({ ...this.state, phase: "pending", stale: this.state.doc !== null });
    try {
      const doc = await this.api.predict(features, controller.signal);
      if (ticket !== this.seq) return;
      this.set({ phase: "ready", doc, stale: false, fieldError: null });
    } catch (err) {
      if (ticket !== this.seq) return;
      if ((err as Error).name === "AbortError") return;
      if (err instanceof ApiError && (err.status === 422 || err.status === 400)) {
        this.set({
          ...this.state,
          phase: "invalid",
          stale: this.state.doc !== null,
          fieldError: { column: fieldFor(err.detail, this.columns), message: err.detail },
        });
        return;
      }
      this.set({ ...this.state, phase: "unreachable", stale: this.state.doc !== null });
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }
}
