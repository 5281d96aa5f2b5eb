/**
 * Client-side board model for the position editor.
 *
 * The editor needs to read and write FEN locally (placing, removing and
 * dragging pieces, toggling the side to move, editing castling/en-passant
 * fields) with inline validation of the structural rules: one king per side,
 * no pawns on back ranks, at most 16 pieces per color. All evaluation
 * numbers still come from the service; this module never scores anything.
 */

export type Color = "w" | "b";
export type Kind = "P" | "N" | "B" | "R" | "Q" | "K";

export interface BoardState {
  /** 64 squares, a1 = 0 .. h8 = 63; empty squares are null. */
  board: (string | null)[];
  sideToMove: Color;
  castling: string;
  enPassant: string | null;
  halfmove: number;
  fullmove: number;
}

export const FILES = "abcdefgh";
export const START_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
export const KINGS_ONLY_FEN = "8/2k5/8/8/8/5K2/8/8 w - - 0 1";

export const PIECE_GLYPHS: Record<string, string> = {
  K: "♔", Q: "♕", R: "♖", B: "♗", N: "♘", P: "♙",
  k: "♚", q: "♛", r: "♜", b: "♝", n: "♞", p: "♟",
};

export function squareIndex(name: string): number {
  const file = FILES.indexOf(name[0] ?? "");
  const rank = Number(name[1]) - 1;
  if (file < 0 || !(rank >= 0 && rank <= 7) || name.length !== 2) {
    throw new Error(`invalid square: ${name}`);
  }
  return rank * 8 + file;
}

export function squareName(index: number): string {
  return `${FILES[index % 8]}${Math.floor(index / 8) + 1}`;
}

export function pieceColor(symbol: string): Color {
  return symbol === symbol.toUpperCase() ? "w" : "b";
}

/** Parse a 4- or 6-field FEN record; throws with a readable message. */
export function parseFen(fen: string): BoardState {
  const fields = fen.trim().split(/\s+/);
  if (fields.length !== 4 && fields.length !== 6) {
    throw new Error(`expected 4 or 6 FEN fields, got ${fields.length}`);
  }
  const [placement, side, castling, enPassant] = fields as [string, string, string, string];
  const rows = placement.split("/");
  if (rows.length !== 8) throw new Error("piece placement must have 8 ranks");
  const board: (string | null)[] = new Array(64).fill(null);
  rows.forEach((row, i) => {
    const rank = 7 - i;
    let file = 0;
    for (const ch of row) {
      if (/[1-8]/.test(ch)) {
        file += Number(ch);
      } else if (/[pnbrqkPNBRQK]/.test(ch)) {
        if (file > 7) throw new Error(`rank ${rank + 1} overflows`);
        board[rank * 8 + file] = ch;
        file += 1;
      } else {
        throw new Error(`invalid piece character: ${ch}`);
      }
    }
    if (file !== 8) throw new Error(`rank ${rank + 1} does not sum to 8 files`);
  });
  if (side !== "w" && side !== "b") throw new Error(`side to move must be w or b`);
  if (castling !== "-" && !/^K?Q?k?q?$/.test(castling)) {
    throw new Error(`invalid castling field: ${castling}`);
  }
  if (enPassant !== "-") squareIndex(enPassant); // validates
  return {
    board,
    sideToMove: side,
    castling: castling === "-" ? "" : castling,
    enPassant: enPassant === "-" ? null : enPassant,
    halfmove: fields.length === 6 ? Number(fields[4]) : 0,
    fullmove: fields.length === 6 ? Number(fields[5]) : 1,
  };
}

export function toFen(state: BoardState): string {
  const rows: string[] = [];
  for (let rank = 7; rank >= 0; rank--) {
    let row = "";
    let empty = 0;
    for (let file = 0; file < 8; file++) {
      const piece = state.board[rank * 8 + file];
      if (piece == null) {
        empty += 1;
      } else {
        if (empty) row += String(empty);
        empty = 0;
        row += piece;
      }
    }
    if (empty) row += String(empty);
    rows.push(row);
  }
  const castling = state.castling || "-";
  const ep = state.enPassant ?? "-";
  return `${rows.join("/")} ${state.sideToMove} ${castling} ${ep} ${state.halfmove} ${state.fullmove}`;
}

/** Problems that make the board unexplainable; empty array means sound. */
export function validationProblems(state: BoardState): string[] {
  const problems: string[] = [];
  const counts = { w: 0, b: 0 };
  const kings = { w: 0, b: 0 };
  state.board.forEach((piece, index) => {
    if (piece == null) return;
    const color = pieceColor(piece);
    counts[color] += 1;
    if (piece.toUpperCase() === "K") kings[color] += 1;
    const rank = Math.floor(index / 8);
    if (piece.toUpperCase() === "P" && (rank === 0 || rank === 7)) {
      problems.push(`pawn on back rank at ${squareName(index)}`);
    }
  });
  for (const color of ["w", "b"] as const) {
    const who = color === "w" ? "White" : "Black";
    if (kings[color] !== 1) problems.push(`${who} must have exactly one king`);
    if (counts[color] > 16) problems.push(`${who} has more than 16 pieces`);
  }
  return problems;
}

export interface EditResult {
  state: BoardState;
  /** Inline validation message when the edit was refused; state unchanged then. */
  error: string | null;
}

function withBoard(state: BoardState, board: (string | null)[]): BoardState {
  return { ...state, board, enPassant: null };
}

/** Place (or replace) a piece; refuses second kings and back-rank pawns. */
export function placePiece(state: BoardState, square: string, piece: string): EditResult {
  const index = squareIndex(square);
  const rank = Math.floor(index / 8);
  if (piece.toUpperCase() === "P" && (rank === 0 || rank === 7)) {
    return { state, error: "pawns cannot stand on the back rank" };
  }
  if (piece.toUpperCase() === "K") {
    const existing = state.board.findIndex(
      (p, i) => p !== null && p.toUpperCase() === "K" && pieceColor(p) === pieceColor(piece) && i !== index,
    );
    if (existing >= 0) {
      return { state, error: `${pieceColor(piece) === "w" ? "White" : "Black"} already has a king` };
    }
  }
  const board = state.board.slice();
  board[index] = piece;
  return { state: withBoard(state, board), error: null };
}

/** Remove a piece; kings stay on the board. */
export function removePiece(state: BoardState, square: string): EditResult {
  const index = squareIndex(square);
  const piece = state.board[index];
  if (piece == null) return { state, error: null };
  if (piece.toUpperCase() === "K") {
    return { state, error: "kings cannot be removed" };
  }
  const board = state.board.slice();
  board[index] = null;
  return { state: withBoard(state, board), error: null };
}

/** Drag a piece between squares; dropping on the origin is a no-op. */
export function movePiece(state: BoardState, from: string, to: string): EditResult {
  const fromIndex = squareIndex(from);
  const toIndex = squareIndex(to);
  const piece = state.board[fromIndex];
  if (piece == null) return { state, error: null };
  if (fromIndex === toIndex) return { state, error: null };
  const toRank = Math.floor(toIndex / 8);
  if (piece.toUpperCase() === "P" && (toRank === 0 || toRank === 7)) {
    return { state, error: "pawns cannot stand on the back rank" };
  }
  const board = state.board.slice();
  board[fromIndex] = null;
  board[toIndex] = piece;
  return { state: withBoard(state, board), error: null };
}

export function toggleSideToMove(state: BoardState): BoardState {
  return { ...state, sideToMove: state.sideToMove === "w" ? "b" : "w", enPassant: null };
}

/** Keep only castling flags whose king and rook still sit on home squares. */
export function sanitizeCastling(state: BoardState): BoardState {
  const homes: Record<string, [number, string, number, string]> = {
    K: [4, "K", 7, "R"],
    Q: [4, "K", 0, "R"],
    k: [60, "k", 63, "r"],
    q: [60, "k", 56, "r"],
  };
  let flags = "";
  for (const flag of state.castling) {
    const home = homes[flag];
    if (!home) continue;
    const [kingSq, king, rookSq, rook] = home;
    if (state.board[kingSq] === king && state.board[rookSq] === rook) flags += flag;
  }
  return { ...state, castling: flags };
}
