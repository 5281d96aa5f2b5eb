/**
 * Application wiring: the explore panel (editor + explain + waterfall) and
 * the compare panel (two evaluators on the same board). One explain job may
 * be in flight per panel; results for a board the user has since edited are
 * dropped rather than misapplied.
 */

import { ApiClient } from "./api";
import { BoardPanel, Tool } from "./board";
import { renderDeltaTable } from "./compare";
import { KINGS_ONLY_FEN, PIECE_GLYPHS } from "./fen";
import { renderWaterfall } from "./waterfall";
import type { JobSnapshot } from "./types";

const START_STUDY = "8/2k5/2q5/8/4R3/4RK2/8/8 w - - 0 1";

const PALETTE: { label: string; tool: Tool }[] = [
  { label: "↦", tool: { kind: "move" } },
  { label: "⊗", tool: { kind: "erase" } },
  ...["K", "Q", "R", "B", "N", "P", "k", "q", "r", "b", "n", "p"].map((piece) => ({
    label: PIECE_GLYPHS[piece] ?? piece,
    tool: { kind: "place", piece } as Tool,
  })),
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class App {
  readonly api: ApiClient;
  board!: BoardPanel;
  compareBoards: BoardPanel[] = [];
  private explainRunning = false;

  constructor(readonly root: HTMLElement, apiBase = "") {
    this.api = new ApiClient(apiBase);
  }

  async mount(): Promise<void> {
    const engines = (await this.api.listEngines()).engines.map((engine) => engine.id);
    this.root.textContent = "";
    this.root.append(this.buildExplorePanel(engines), this.buildComparePanel(engines));
  }

  private buildExplorePanel(engines: string[]): HTMLElement {
    const panel = el("section", "panel explore-panel");
    panel.append(el("h2", undefined, "explore"));

    const boardHost = el("div", "board-host");
    const fenInput = el("input", "fen-input");
    fenInput.value = START_STUDY;
    const sideButton = el("button", "side-toggle", "side to move: w");
    const palette = el("div", "palette");
    const explainButton = el("button", "explain-button", "explain");
    const evaluatorSelect = el("select", "evaluator-select");
    for (const id of engines) {
      const option = el("option", undefined, id);
      option.value = id;
      evaluatorSelect.append(option);
    }
    const progress = el("progress", "explain-progress") as HTMLProgressElement;
    progress.max = 1;
    progress.value = 0;
    const status = el("div", "explain-status");
    const waterfall = el("div", "waterfall");

    panel.append(boardHost, fenInput, sideButton, palette, evaluatorSelect, explainButton, progress, status, waterfall);

    this.board = new BoardPanel(boardHost, START_STUDY);
    this.board.onChange((fen) => {
      fenInput.value = fen;
      sideButton.textContent = `side to move: ${this.board.state.sideToMove}`;
      status.textContent = this.board.problems().join("; ");
    });
    fenInput.addEventListener("change", () => this.board.setFen(fenInput.value));
    sideButton.addEventListener("click", () => this.board.toggleSide());

    for (const { label, tool } of PALETTE) {
      const button = el("button", "palette-button", label);
      button.addEventListener("click", () => {
        this.board.setTool(tool);
        for (const other of palette.querySelectorAll(".palette-button")) {
          other.classList.toggle("selected", other === button);
        }
      });
      palette.append(button);
    }

    explainButton.addEventListener("click", () => {
      void this.runExplain(evaluatorSelect.value, progress, status, waterfall);
    });
    return panel;
  }

  /** POST /explain, poll with a progress bar, then overlay + waterfall. */
  async runExplain(
    evaluator: string,
    progress: HTMLProgressElement,
    status: HTMLElement,
    waterfall: HTMLElement,
  ): Promise<void> {
    if (this.explainRunning) return;
    const problems = this.board.problems();
    if (problems.length) {
      status.textContent = problems.join("; ");
      return;
    }
    const fen = this.board.fen();
    this.explainRunning = true;
    status.textContent = "running…";
    try {
      const doc = await this.api.explain(
        { fen, evaluator_id: evaluator },
        (snapshot: JobSnapshot) => {
          const { done, total } = snapshot.progress;
          if (total) {
            progress.max = total;
            progress.value = done;
          }
        },
      );
      const applied = this.board.setOverlay(doc);
      if (applied) {
        renderWaterfall(waterfall, doc);
        status.textContent = `${doc.method}: ${doc.evaluations_used} evaluations`;
      } else {
        status.textContent = "board changed while explaining; result discarded";
      }
    } catch (error) {
      status.textContent = `explain failed: ${(error as Error).message}`;
    } finally {
      this.explainRunning = false;
    }
  }

  private buildComparePanel(engines: string[]): HTMLElement {
    const panel = el("section", "panel compare-panel");
    panel.append(el("h2", undefined, "compare engines"));

    const selects = [el("select", "compare-a"), el("select", "compare-b")];
    for (const select of selects) {
      for (const id of engines) {
        const option = el("option", undefined, id);
        option.value = id;
        select.append(option);
      }
      panel.append(select);
    }
    const runButton = el("button", "compare-button", "compare");
    const status = el("div", "compare-status");
    const boardsHost = el("div", "compare-boards");
    const hostA = el("div", "board-host");
    const hostB = el("div", "board-host");
    boardsHost.append(hostA, hostB);
    const tableHost = el("div", "delta-host");
    panel.append(runButton, status, boardsHost, tableHost);

    this.compareBoards = [
      new BoardPanel(hostA, KINGS_ONLY_FEN),
      new BoardPanel(hostB, KINGS_ONLY_FEN),
    ];

    runButton.addEventListener("click", () => {
      void this.runCompare(
        (selects[0] as HTMLSelectElement).value,
        (selects[1] as HTMLSelectElement).value,
        status,
        tableHost,
      );
    });
    return panel;
  }

  /** Compare the explore board's position under two evaluators. */
  async runCompare(
    evaluatorA: string,
    evaluatorB: string,
    status: HTMLElement,
    tableHost: HTMLElement,
  ): Promise<void> {
    const fen = this.board.fen();
    status.textContent = "running…";
    try {
      const result = await this.api.compare({
        fen,
        evaluator_a: evaluatorA,
        evaluator_b: evaluatorB,
      });
      for (const [panelBoard, doc] of [
        [this.compareBoards[0], result.a],
        [this.compareBoards[1], result.b],
      ] as const) {
        panelBoard?.setFen(doc.fen);
        panelBoard?.setOverlay(doc);
      }
      renderDeltaTable(tableHost, result, this.compareBoards);
      status.textContent = `${result.deltas.length} pieces compared`;
    } catch (error) {
      status.textContent = `compare failed: ${(error as Error).message}`;
    }
  }
}

export function start(): void {
  const root = document.getElementById("app");
  if (root) void new App(root).mount();
}
