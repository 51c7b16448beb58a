/** Pure presentation helpers. Model outputs pass through untouched:
 * numbers render via String(), which reproduces the wire text exactly
 * (both sides print the shortest round-trip decimal), so nothing is
 * rounded or renormalized on the way to the screen. */

import type { ExplanationStep, PredictionDoc, SimulationDoc } from "./api.js";

export function wire(value: number): string {
  return String(value);
}

/** [label, rendered value] pairs in the order the service sent them. */
export function valueRows(values: Record<string, number> | null): Array<[string, string]> {
  if (!values) return [];
  return Object.entries(values).map(([label, v]) => [label, wire(v)]);
}

export function dollars(amount: number): string {
  const negative = amount < 0;
  const magnitude = Math.abs(amount);
  const cents = Math.round(magnitude * 100) % 100;
  let text = cents === 0 ? String(Math.round(magnitude)) : magnitude.toFixed(2);
  text = text.replace(/\B(?=(\d{3})+(?!\d))/g, ",");
  return (negative ? "-" : "") + text;
}

export function simulationLine(doc: SimulationDoc): string {
  return `${wire(doc.days_saved)} days (${doc.percent.toFixed(2)}%) · $${dollars(doc.dollars)}`;
}

function countsText(counts: Record<string, number>): string {
  return Object.entries(counts)
    .map(([label, n]) => `${label}: ${wire(n)}`)
    .join(", ");
}

/** One line per traversal step; the terminal step carries no condition. */
export function explanationLines(steps: ExplanationStep[] | null): string[] {
  if (!steps) return [];
  return steps.map((step) => {
    const where = step.predictor === null
      ? "leaf"
      : step.group && step.group.length
        ? `${step.predictor}: ${step.group.join(", ")}`
        : step.predictor;
    return `${where}  [${countsText(step.class_counts)}]`;
  });
}

/** Column a validation message is about, by its quoted name. */
export function fieldFor(detail: string, columns: string[]): string | null {
  for (const name of columns) {
    if (detail.includes(`'${name}'`)) return name;
  }
  return null;
}

export function dispositionLine(doc: PredictionDoc): string {
  return doc.disposition;
}

export const UNREACHABLE_MESSAGE =
  "Scoring service unreachable. Showing the last computed results.";
