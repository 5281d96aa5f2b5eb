/**
 * Editable chessboard panel with an attribution overlay.
 *
 * The overlay is bound to the FEN it was computed for: any edit marks it
 * stale (grayed out) until the position is re-explained, so a heatmap can
 * never be misread as describing a changed board. Editing supports click to
 * place/remove via the palette and mousedown/mouseup dragging between
 * squares.
 */

import { colorForPhi, maxAbsPhi } from "./color";
import {
  BoardState,
  EditResult,
  PIECE_GLYPHS,
  movePiece,
  parseFen,
  pieceColor,
  placePiece,
  removePiece,
  sanitizeCastling,
  squareName,
  toFen,
  toggleSideToMove,
  validationProblems,
} from "./fen";
import type { ExplanationDocument } from "./types";

export type BoardChangeListener = (fen: string) => void;

/** Palette selection: a piece symbol to stamp, the eraser, or plain moves. */
export type Tool = { kind: "move" } | { kind: "erase" } | { kind: "place"; piece: string };

export class BoardPanel {
  state: BoardState;
  overlay: ExplanationDocument | null = null;
  overlayStale = false;
  tool: Tool = { kind: "move" };
  private dragFrom: string | null = null;
  private listeners: BoardChangeListener[] = [];
  private readonly squares = new Map<string, HTMLElement>();
  private readonly messageEl: HTMLElement;
  private readonly boardEl: HTMLElement;

  constructor(readonly root: HTMLElement, fen: string) {
    this.state = parseFen(fen);
    this.boardEl = document.createElement("div");
    this.boardEl.className = "board";
    this.messageEl = document.createElement("div");
    this.messageEl.className = "board-message";
    this.root.append(this.boardEl, this.messageEl);
    this.buildGrid();
    this.render();
  }

  onChange(listener: BoardChangeListener): void {
    this.listeners.push(listener);
  }

  fen(): string {
    return toFen(this.state);
  }

  /** Replace the whole position, e.g. from the FEN text field. */
  setFen(fen: string): void {
    try {
      this.state = parseFen(fen);
    } catch (error) {
      this.showMessage((error as Error).message);
      return;
    }
    this.markEdited();
    this.render();
  }

  /** Attach a fresh explanation; tints only apply if it matches the board. */
  setOverlay(doc: ExplanationDocument): boolean {
    if (doc.fen.split(" ")[0] !== this.fen().split(" ")[0]) {
      return false; // the board moved on while the job ran
    }
    this.overlay = doc;
    this.overlayStale = false;
    this.render();
    return true;
  }

  clearOverlay(): void {
    this.overlay = null;
    this.overlayStale = false;
    this.render();
  }

  setTool(tool: Tool): void {
    this.tool = tool;
  }

  toggleSide(): void {
    this.state = toggleSideToMove(this.state);
    this.markEdited();
    this.render();
  }

  problems(): string[] {
    return validationProblems(this.state);
  }

  private buildGrid(): void {
    for (let rank = 7; rank >= 0; rank--) {
      for (let file = 0; file < 8; file++) {
        const index = rank * 8 + file;
        const name = squareName(index);
        const el = document.createElement("div");
        el.className = `square ${(file + rank) % 2 ? "light" : "dark"}`;
        el.dataset.square = name;
        el.addEventListener("mousedown", () => this.onMouseDown(name));
        el.addEventListener("mouseup", () => this.onMouseUp(name));
        this.squares.set(name, el);
        this.boardEl.append(el);
      }
    }
  }

  private onMouseDown(square: string): void {
    if (this.tool.kind === "move") {
      this.dragFrom = this.state.board[squareIndexOf(square)] ? square : null;
    }
  }

  private onMouseUp(square: string): void {
    if (this.tool.kind === "place") {
      this.applyEdit(placePiece(this.state, square, this.tool.piece));
      return;
    }
    if (this.tool.kind === "erase") {
      this.applyEdit(removePiece(this.state, square));
      return;
    }
    if (this.dragFrom != null) {
      const from = this.dragFrom;
      this.dragFrom = null;
      if (from !== square) {
        this.applyEdit(movePiece(this.state, from, square));
      }
    }
  }

  private applyEdit(result: EditResult): void {
    if (result.error) {
      this.showMessage(result.error);
      return;
    }
    if (result.state === this.state) return; // no-op edit
    this.state = sanitizeCastling(result.state);
    this.markEdited();
    this.render();
  }

  private markEdited(): void {
    this.showMessage("");
    if (this.overlay) this.overlayStale = true;
    for (const listener of this.listeners) listener(this.fen());
  }

  private showMessage(text: string): void {
    this.messageEl.textContent = text;
  }

  highlight(square: string | null): void {
    for (const [name, el] of this.squares) {
      el.classList.toggle("highlight", name === square);
    }
  }

  render(): void {
    const tints = new Map<string, string>();
    if (this.overlay) {
      const maxAbs = maxAbsPhi(this.overlay.contributions.map((c) => c.phi));
      for (const c of this.overlay.contributions) {
        tints.set(c.square, colorForPhi(c.phi, maxAbs));
      }
    }
    for (const [name, el] of this.squares) {
      const piece = this.state.board[squareIndexOf(name)];
      el.textContent = piece ? PIECE_GLYPHS[piece] ?? "" : "";
      el.classList.toggle("white-piece", piece != null && pieceColor(piece) === "w");
      const tint = tints.get(name);
      if (tint && !this.overlayStale) {
        el.style.boxShadow = `inset 0 0 0 100vmax ${tint}B3`; // B3 = 0.7 alpha
        el.classList.remove("stale-tint");
      } else if (tint) {
        el.style.boxShadow = "inset 0 0 0 100vmax #9E9E9EB3";
        el.classList.add("stale-tint");
      } else {
        el.style.boxShadow = "";
        el.classList.remove("stale-tint");
      }
    }
  }
}

function squareIndexOf(name: string): number {
  return (Number(name[1]) - 1) * 8 + "abcdefgh".indexOf(name[0] ?? "");
}
