/**
 * Waterfall table beside the board: one row per piece, largest |phi| first,
 * running total from the 0.5 base to the full evaluation. Values are printed
 * verbatim from the document; the UI does no attribution arithmetic beyond
 * the running sum shown to the user.
 */

import { colorForPhi, maxAbsPhi } from "./color";
import type { ContributionEntry, ExplanationDocument } from "./types";

export const PHI_DECIMALS = 5;

export function formatPhi(phi: number): string {
  return (phi >= 0 ? "+" : "") + phi.toFixed(PHI_DECIMALS);
}

export function sortedRows(doc: ExplanationDocument): ContributionEntry[] {
  return [...doc.contributions].sort((a, b) => Math.abs(b.phi) - Math.abs(a.phi));
}

export function renderWaterfall(container: HTMLElement, doc: ExplanationDocument): void {
  container.textContent = "";
  const header = document.createElement("div");
  header.className = "waterfall-header";
  header.textContent =
    `P(White wins) ${doc.full_value.toFixed(PHI_DECIMALS)} ` +
    `(base ${doc.base_value.toFixed(PHI_DECIMALS)}, ${doc.method}, ` +
    `${doc.evaluations_used} evaluations)`;
  container.append(header);

  const maxAbs = maxAbsPhi(doc.contributions.map((c) => c.phi));
  let running = doc.base_value;
  for (const row of sortedRows(doc)) {
    running += row.phi;
    const el = document.createElement("div");
    el.className = "waterfall-row";
    el.dataset.square = row.square;

    const label = document.createElement("span");
    label.className = "waterfall-label";
    label.textContent = `${row.square} ${row.color} ${row.piece}`;

    const bar = document.createElement("span");
    bar.className = "waterfall-bar";
    const width = maxAbs > 0 ? (Math.abs(row.phi) / maxAbs) * 100 : 0;
    bar.style.width = `${width.toFixed(1)}%`;
    bar.style.background = colorForPhi(row.phi, maxAbs);

    const value = document.createElement("span");
    value.className = "waterfall-phi";
    value.textContent = formatPhi(row.phi);

    const total = document.createElement("span");
    total.className = "waterfall-total";
    total.textContent = `→ ${running.toFixed(PHI_DECIMALS)}`;

    el.append(label, bar, value, total);
    container.append(el);
  }
}
