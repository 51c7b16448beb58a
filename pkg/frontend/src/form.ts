/** Form fields generated from the model's column metadata. Every input
 * is optional: blank means unknown, and unknown routes through the
 * model's missing handling rather than blocking the request. */

import type { ColumnDoc, FeatureValue } from "./api.js";

export interface Field {
  column: ColumnDoc;
  root: HTMLElement;
  read(): FeatureValue;
  setError(message: string | null): void;
}

function labelText(column: ColumnDoc): string {
  const pretty = column.name.replace(/_/g, " ");
  if (column.plausible_range) {
    const [lo, hi] = column.plausible_range;
    return `${pretty} (${lo}–${hi})`;
  }
  return pretty;
}

export function buildField(column: ColumnDoc, onCommit: () => void): Field {
  const root = document.createElement("div");
  root.className = "field";

  const label = document.createElement("label");
  label.textContent = labelText(column);
  label.htmlFor = `f-${column.name}`;
  root.appendChild(label);

  let input: HTMLInputElement | HTMLSelectElement;
  if (column.ordered_levels && column.ordered_levels.length) {
    const select = document.createElement("select");
    select.appendChild(new Option("(unknown)", ""));
    for (const level of column.ordered_levels) {
      select.appendChild(new Option(level, level));
    }
    input = select;
  } else if (column.kind === "continuous") {
    const number = document.createElement("input");
    number.type = "number";
    number.step = "any";
    if (column.plausible_range) {
      number.min = String(column.plausible_range[0]);
      number.max = String(column.plausible_range[1]);
    }
    input = number;
  } else {
    const text = document.createElement("input");
    text.type = "text";
    text.placeholder = "(unknown)";
    input = text;
  }
  input.id = `f-${column.name}`;
  input.addEventListener("change", onCommit);
  root.appendChild(input);

  const error = document.createElement("small");
  error.className = "field-error";
  error.hidden = true;
  root.appendChild(error);

  return {
    column,
    root,
    read(): FeatureValue {
      const raw = input.value.trim();
      if (raw === "") return null;
      return column.kind === "continuous" ? Number(raw) : raw;
    },
    setError(message: string | null): void {
      error.hidden = message === null;
      error.textContent = message ?? "";
      root.classList.toggle("invalid", message !== null);
    },
  };
}

/** Committed values of all fields; blanks are omitted entirely. */
export function readFeatures(fields: Field[]): Record<string, FeatureValue> {
  const features: Record<string, FeatureValue> = {};
  for (const field of fields) {
    const value = field.read();
    if (value !== null) features[field.column.name] = value;
  }
  return features;
}
