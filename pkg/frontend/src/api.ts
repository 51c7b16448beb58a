/** Typed client for the scoring service. All knowledge of the wire
 * format lives here; the rest of the app consumes these shapes. */

export interface ColumnDoc {
  name: string;
  kind: "continuous" | "nominal" | "ordinal";
  ordered_levels: string[] | null;
  plausible_range: [number, number] | null;
}

export interface ModelDoc {
  kind: string;
  format_version: number;
  fingerprint: string;
  response_name: string;
  class_labels: string[];
  positive_label: string | null;
  params: Record<string, unknown>;
  training: Record<string, unknown> | null;
  columns: ColumnDoc[];
}

export interface ExplanationStep {
  predictor: string | null;
  group: string[] | null;
  class_counts: Record<string, number>;
}

export interface PredictionDoc {
  disposition: string;
  probabilities: Record<string, number> | null;
  scores: Record<string, number> | null;
  explanation: ExplanationStep[] | null;
  recommendation: string;
}

export interface SimulationDoc {
  days_saved: number;
  percent: number;
  dollars: number;
}

export type FeatureValue = string | number | null;
export type Features = Record<string, FeatureValue>;

export const RECOMMEND_START = "initiate_prior_authorization";

/** Non-2xx response decoded from the service's {error, detail} shape. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  model(): Promise<ModelDoc> {
    return this.request("GET", "/api/v1/model");
  }

  predict(features: Features, signal?: AbortSignal): Promise<PredictionDoc> {
    return this.request("POST", "/api/v1/predict", { features }, signal);
  }

  simulate(
    pacServiceDays: number,
    authorizationDays: number,
    ownership: string,
  ): Promise<SimulationDoc> {
    return this.request("POST", "/api/v1/simulate", {
      pac_service_days: pacServiceDays,
      authorization_days: authorizationDays,
      ownership,
    });
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const init: RequestInit = { method, signal };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let code = `http_${res.status}`;
      let detail = res.statusText || "request failed";
      try {
        const doc = await res.json();
        if (doc && typeof doc.error === "string") code = doc.error;
        if (doc && typeof doc.detail === "string") detail = doc.detail;
      } catch {
        // non-JSON error body; keep the status-derived message
      }
      throw new ApiError(res.status, code, detail);
    }
    return res.json() as Promise<T>;
  }
}
