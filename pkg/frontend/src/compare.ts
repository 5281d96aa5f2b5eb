/**
 * Engine comparison view: the same position explained by two evaluators,
 * side-by-side heatmaps plus the per-piece delta table (already sorted by
 * |delta| by the service; rendered verbatim). Clicking a row highlights the
 * piece's square on both boards.
 */

import type { BoardPanel } from "./board";
import { formatPhi } from "./waterfall";
import type { CompareResult } from "./types";

export function renderDeltaTable(
  container: HTMLElement,
  result: CompareResult,
  boards: BoardPanel[],
): void {
  container.textContent = "";
  const table = document.createElement("table");
  table.className = "delta-table";
  const head = document.createElement("tr");
  for (const title of ["piece", result.a.evaluator, result.b.evaluator, "delta"]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.append(th);
  }
  table.append(head);

  for (const row of result.deltas) {
    const tr = document.createElement("tr");
    tr.className = "delta-row";
    tr.dataset.square = row.square;
    const cells = [
      `${row.square} ${row.color} ${row.piece}`,
      formatPhi(row.phi_a),
      formatPhi(row.phi_b),
      formatPhi(row.delta),
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.append(td);
    }
    tr.addEventListener("click", () => {
      for (const board of boards) board.highlight(row.square);
      for (const other of container.querySelectorAll(".delta-row")) {
        other.classList.toggle("selected", other === tr);
      }
    });
    table.append(tr);
  }
  container.append(table);
}
