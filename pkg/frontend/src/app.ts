/** Page wiring: fetch the model document, grow the form from it, and
 * keep the result panes in sync with the prediction state machine. */

import { Api, ApiError, ModelDoc, PredictionDoc, RECOMMEND_START } from "./api.js";
import {
  UNREACHABLE_MESSAGE,
  dollars,
  explanationLines,
  simulationLine,
  valueRows,
} from "./format.js";
import { Field, buildField, readFeatures } from "./form.js";
import { PredictController, PredictState } from "./predictor.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function apiBase(): string {
  return new URLSearchParams(window.location.search).get("api") ?? "";
}

function renderRows(table: HTMLElement, rows: Array<[string, string]>): void {
  table.textContent = "";
  for (const [label, value] of rows) {
    const tr = document.createElement("tr");
    const th = document.createElement("th");
    th.textContent = label;
    const td = document.createElement("td");
    td.textContent = value;
    tr.append(th, td);
    table.appendChild(tr);
  }
}

function renderPrediction(doc: PredictionDoc, model: ModelDoc): void {
  byId("disposition").textContent = doc.disposition;
  byId("authorization-banner").hidden = doc.recommendation !== RECOMMEND_START;

  const probabilities = byId("probabilities");
  renderRows(probabilities, valueRows(doc.probabilities));
  byId("probabilities-empty").hidden = doc.probabilities !== null;
  renderRows(byId("scores"), valueRows(doc.scores));

  const explanation = byId("explanation");
  explanation.textContent = "";
  for (const line of explanationLines(doc.explanation)) {
    const li = document.createElement("li");
    li.textContent = line;
    explanation.appendChild(li);
  }
  byId("explanation-empty").hidden = doc.explanation !== null;
  byId("positive-label").textContent = model.positive_label ?? "";
}

function renderState(state: PredictState, model: ModelDoc, fields: Field[]): void {
  byId("results").classList.toggle("stale", state.stale);
  byId("offline-banner").hidden = state.phase !== "unreachable";
  byId("offline-banner").textContent = UNREACHABLE_MESSAGE;

  for (const field of fields) field.setError(null);
  const formError = byId("form-error");
  formError.hidden = true;
  if (state.fieldError) {
    const target = fields.find((f) => f.column.name === state.fieldError!.column);
    if (target) {
      target.setError(state.fieldError.message);
    } else {
      formError.hidden = false;
      formError.textContent = state.fieldError.message;
    }
  }
  if (state.doc) renderPrediction(state.doc, model);
}

function wireSimulation(api: Api): void {
  const pac = byId<HTMLInputElement>("sim-pac-days");
  const auth = byId<HTMLInputElement>("sim-auth-days");
  const ownership = byId<HTMLSelectElement>("sim-ownership");
  const result = byId("sim-result");
  const error = byId("sim-error");

  const run = async () => {
    error.hidden = true;
    try {
      const doc = await api.simulate(Number(pac.value), Number(auth.value), ownership.value);
      result.textContent = simulationLine(doc);
      result.classList.remove("stale");
      byId("sim-note").textContent =
        `${dollars(doc.dollars)} saved per stay at the selected ownership rate`;
    } catch (err) {
      result.classList.add("stale");
      error.hidden = false;
      error.textContent = err instanceof ApiError ? err.detail : UNREACHABLE_MESSAGE;
    }
  };
  for (const input of [pac, auth, ownership]) input.addEventListener("change", run);
  void run();
}

async function boot(): Promise<void> {
  const api = new Api(apiBase());
  const offline = byId("offline-banner");
  let model: ModelDoc;
  try {
    model = await api.model();
  } catch {
    offline.hidden = false;
    offline.textContent = UNREACHABLE_MESSAGE;
    return;
  }

  byId("model-kind").textContent = model.kind;
  byId("response-name").textContent = model.response_name;

  const holder = byId("features");
  const fields: Field[] = [];
  const controller = new PredictController(
    api,
    model.columns.map((c) => c.name),
    (state) => renderState(state, model, fields),
  );
  const commit = () => controller.submit(readFeatures(fields));
  for (const column of model.columns) {
    const field = buildField(column, commit);
    fields.push(field);
    holder.appendChild(field.root);
  }

  wireSimulation(api);
  controller.submit({}); // blank form: surface the model prior
}

void boot();
