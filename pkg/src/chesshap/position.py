"""Chess position model: FEN I/O, piece indexing, subset ablation, legality repair.

Squares use the a1=0 .. h8=63 convention (index = rank*8 + file). Positions are
immutable values; every operation returns a new position, so they are safe to
share across worker threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

WHITE = "w"
BLACK = "b"

PIECE_KINDS = "PNBRQK"
KIND_NAMES = {
    "P": "pawn",
    "N": "knight",
    "B": "bishop",
    "R": "rook",
    "Q": "queen",
    "K": "king",
}
NAME_KINDS = {name: kind for kind, name in KIND_NAMES.items()}
COLOR_NAMES = {WHITE: "white", BLACK: "black"}
NAME_COLORS = {"white": WHITE, "black": BLACK}

STARTING_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

_FEN_FIELDS = (
    "piece placement",
    "side to move",
    "castling availability",
    "en passant target",
    "halfmove clock",
    "fullmove number",
)

# castling flag -> (king home square, rook home square)
_CASTLING_HOMES = {
    "K": (4, 7),
    "Q": (4, 0),
    "k": (60, 63),
    "q": (60, 56),
}

_KNIGHT_STEPS = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
_KING_STEPS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_ROOK_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_BISHOP_DIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class PositionError(ValueError):
    """Base for position construction failures."""


class MalformedFen(PositionError):
    """FEN text does not follow the record syntax."""


class IllegalSetup(PositionError):
    """FEN parses but the resulting position breaks a structural invariant."""


def square_index(file: int, rank: int) -> int:
    """Square index from file (0-7, a-h) and rank (0-7, 1-8)."""
    return rank * 8 + file


def square_file(sq: int) -> int:
    return sq & 7


def square_rank(sq: int) -> int:
    return sq >> 3


def square_name(sq: int) -> str:
    """0 -> 'a1', 63 -> 'h8'."""
    return chr(ord("a") + square_file(sq)) + str(square_rank(sq) + 1)


def parse_square(name: str) -> int:
    """'e4' -> 28."""
    if len(name) != 2 or name[0] not in "abcdefgh" or name[1] not in "12345678":
        raise ValueError(f"invalid square name: {name!r}")
    return square_index(ord(name[0]) - ord("a"), int(name[1]) - 1)


def opposite(color: str) -> str:
    return BLACK if color == WHITE else WHITE


@dataclass(frozen=True)
class Piece:
    """One piece instance: kind (uppercase letter), color ('w'/'b'), square index."""

    kind: str
    color: str
    square: int

    @property
    def symbol(self) -> str:
        """FEN letter: uppercase for white, lowercase for black."""
        return self.kind if self.color == WHITE else self.kind.lower()

    @property
    def kind_name(self) -> str:
        return KIND_NAMES[self.kind]

    @property
    def color_name(self) -> str:
        return COLOR_NAMES[self.color]

    @property
    def square_name(self) -> str:
        return square_name(self.square)

    def label(self) -> str:
        """Short human label, e.g. 'white rook e4'."""
        return f"{self.color_name} {self.kind_name} {self.square_name}"


@dataclass(frozen=True)
class Position:
    """Full position: piece placements plus the metadata engines need.

    ``pieces`` is normalised to ascending square order on construction so that
    equal positions compare equal and piece indexing is reproducible.
    Structural invariants are *not* enforced here; see ``structural_problems``.
    """

    pieces: tuple[Piece, ...]
    side_to_move: str = WHITE
    castling: str = ""
    en_passant: Optional[int] = None
    halfmove_clock: int = 0
    fullmove_number: int = 1

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.pieces, key=lambda p: p.square))
        object.__setattr__(self, "pieces", ordered)
        canonical = "".join(c for c in "KQkq" if c in self.castling)
        object.__setattr__(self, "castling", canonical)

    def piece_at(self, sq: int) -> Optional[Piece]:
        for p in self.pieces:
            if p.square == sq:
                return p
        return None

    def king_square(self, color: str) -> Optional[int]:
        for p in self.pieces:
            if p.kind == "K" and p.color == color:
                return p.square
        return None

    def occupancy(self) -> dict[int, Piece]:
        return {p.square: p for p in self.pieces}


class LegalityStatus(enum.Enum):
    LEGAL = "legal"
    SIDE_NOT_TO_MOVE_IN_CHECK = "side_not_to_move_in_check"
    STRUCTURALLY_INVALID = "structurally_invalid"


class RepairStatus(enum.Enum):
    LEGAL_AS_IS = "legal_as_is"
    FLIPPED_SIDE_TO_MOVE = "flipped_side_to_move"
    UNRESOLVABLE = "unresolvable"


@dataclass(frozen=True)
class RepairOutcome:
    status: RepairStatus
    position: Position


def structural_problems(pos: Position) -> list[str]:
    """All structural invariant violations, empty when the position is sound."""
    problems: list[str] = []
    seen: dict[int, Piece] = {}
    counts = {WHITE: 0, BLACK: 0}
    kings = {WHITE: 0, BLACK: 0}
    for p in pos.pieces:
        if p.kind not in PIECE_KINDS or p.color not in (WHITE, BLACK):
            problems.append(f"invalid piece {p!r}")
            continue
        if not 0 <= p.square <= 63:
            problems.append(f"square out of range: {p.square}")
            continue
        if p.square in seen:
            problems.append(f"two pieces on {square_name(p.square)}")
        seen[p.square] = p
        counts[p.color] += 1
        if p.kind == "K":
            kings[p.color] += 1
        if p.kind == "P" and square_rank(p.square) in (0, 7):
            problems.append(f"pawn on back rank at {square_name(p.square)}")
    for color in (WHITE, BLACK):
        if kings[color] != 1:
            problems.append(f"{COLOR_NAMES[color]} must have exactly one king, found {kings[color]}")
        if counts[color] > 16:
            problems.append(f"more than 16 {COLOR_NAMES[color]} pieces ({counts[color]})")
    if pos.side_to_move not in (WHITE, BLACK):
        problems.append(f"invalid side to move {pos.side_to_move!r}")
    for flag in pos.castling:
        king_home, rook_home = _CASTLING_HOMES[flag]
        king = seen.get(king_home)
        rook = seen.get(rook_home)
        color = WHITE if flag.isupper() else BLACK
        if king is None or king.kind != "K" or king.color != color:
            problems.append(f"castling flag {flag} without king on {square_name(king_home)}")
        if rook is None or rook.kind != "R" or rook.color != color:
            problems.append(f"castling flag {flag} without rook on {square_name(rook_home)}")
    if pos.en_passant is not None:
        problems.extend(_en_passant_problems(pos, seen))
    if pos.halfmove_clock < 0:
        problems.append("negative halfmove clock")
    if pos.fullmove_number < 1:
        problems.append("fullmove number below 1")
    return problems


def _en_passant_problems(pos: Position, occ: dict[int, Piece]) -> list[str]:
    ep = pos.en_passant
    rank = square_rank(ep)
    name = square_name(ep)
    # The target sits behind the pawn that just double-pushed: rank 3 (idx 2)
    # after a white push with Black to move, rank 6 (idx 5) after a black push.
    if rank == 2:
        if pos.side_to_move != BLACK:
            return [f"en passant {name} requires Black to move"]
        pawn_sq, color = ep + 8, WHITE
    elif rank == 5:
        if pos.side_to_move != WHITE:
            return [f"en passant {name} requires White to move"]
        pawn_sq, color = ep - 8, BLACK
    else:
        return [f"en passant target {name} not on rank 3 or 6"]
    pawn = occ.get(pawn_sq)
    if pawn is None or pawn.kind != "P" or pawn.color != color:
        return [f"en passant {name} without a {COLOR_NAMES[color]} pawn on {square_name(pawn_sq)}"]
    return []


def parse_fen(text: str) -> Position:
    """Parse a 4- or 6-field FEN record into a validated Position.

    Raises MalformedFen for syntax errors (the message names the FEN field at
    fault) and IllegalSetup when the parsed position violates a structural
    invariant.
    """
    fields = text.split()
    if len(fields) == 4:
        fields = fields + ["0", "1"]
    if len(fields) != 6:
        raise MalformedFen(f"expected 4 or 6 FEN fields, got {len(fields)}")
    placement, stm, castling, ep, halfmove, fullmove = fields

    pieces = _parse_placement(placement)

    if stm not in (WHITE, BLACK):
        raise MalformedFen(f"side to move must be 'w' or 'b', got {stm!r}")

    if castling == "-":
        castling_flags = ""
    else:
        for c in castling:
            if c not in "KQkq":
                raise MalformedFen(f"castling availability has invalid flag {c!r}")
        if len(set(castling)) != len(castling):
            raise MalformedFen("castling availability repeats a flag")
        castling_flags = castling

    if ep == "-":
        ep_square: Optional[int] = None
    else:
        try:
            ep_square = parse_square(ep)
        except ValueError:
            raise MalformedFen(f"en passant target {ep!r} is not a square") from None

    try:
        halfmove_clock = int(halfmove)
        fullmove_number = int(fullmove)
    except ValueError:
        raise MalformedFen("halfmove clock and fullmove number must be integers") from None

    pos = Position(
        pieces=tuple(pieces),
        side_to_move=stm,
        castling=castling_flags,
        en_passant=ep_square,
        halfmove_clock=halfmove_clock,
        fullmove_number=fullmove_number,
    )
    problems = structural_problems(pos)
    if problems:
        raise IllegalSetup("; ".join(problems))
    return pos


def _parse_placement(placement: str) -> list[Piece]:
    ranks = placement.split("/")
    if len(ranks) != 8:
        raise MalformedFen(f"piece placement must have 8 ranks, got {len(ranks)}")
    pieces: list[Piece] = []
    for i, row in enumerate(ranks):
        rank = 7 - i  # FEN lists rank 8 first
        file = 0
        last_was_digit = False
        for ch in row:
            if ch.isdigit():
                if ch == "0" or ch == "9":
                    raise MalformedFen(f"piece placement has invalid run length {ch!r}")
                if last_was_digit:
                    raise MalformedFen("piece placement has adjacent digits")
                file += int(ch)
                last_was_digit = True
            else:
                last_was_digit = False
                kind = ch.upper()
                if kind not in PIECE_KINDS:
                    raise MalformedFen(f"piece placement has invalid piece {ch!r}")
                if file > 7:
                    raise MalformedFen(f"piece placement rank {rank + 1} overflows")
                color = WHITE if ch.isupper() else BLACK
                pieces.append(Piece(kind, color, square_index(file, rank)))
                file += 1
        if file != 8:
            raise MalformedFen(f"piece placement rank {rank + 1} does not sum to 8 files")
    return pieces


def to_fen(pos: Position) -> str:
    """Canonical 6-field FEN; parse_fen(to_fen(p)) == p."""
    occ = pos.occupancy()
    rows = []
    for rank in range(7, -1, -1):
        row = ""
        empty = 0
        for file in range(8):
            piece = occ.get(square_index(file, rank))
            if piece is None:
                empty += 1
            else:
                if empty:
                    row += str(empty)
                    empty = 0
                row += piece.symbol
        if empty:
            row += str(empty)
        rows.append(row)
    ep = "-" if pos.en_passant is None else square_name(pos.en_passant)
    castling = pos.castling or "-"
    return (
        f"{'/'.join(rows)} {pos.side_to_move} {castling} {ep} "
        f"{pos.halfmove_clock} {pos.fullmove_number}"
    )


def non_king_indexing(pos: Position) -> tuple[Piece, ...]:
    """The n non-king pieces in ascending square order.

    This ordering defines bit i of every subset mask for this position; it is
    deterministic, so equal positions always index their pieces identically.
    """
    return tuple(p for p in pos.pieces if p.kind != "K")


def full_mask(n: int) -> int:
    return (1 << n) - 1


def build_subset_position(pos: Position, subset: int) -> Position:
    """Perturbed position keeping both kings plus the subset's pieces.

    ``subset`` is a bitmask over non_king_indexing(pos). Metadata is copied
    from the original, then repaired: castling flags lose their meaning when
    the supporting rook was ablated, and the en passant target is dropped when
    the double-pushed pawn was.
    """
    indexing = non_king_indexing(pos)
    n = len(indexing)
    if not 0 <= subset <= full_mask(n):
        raise ValueError(f"subset mask {subset:#x} out of range for {n} pieces")
    kept = [p for p in pos.pieces if p.kind == "K"]
    kept.extend(p for i, p in enumerate(indexing) if subset >> i & 1)
    kept_squares = {p.square for p in kept}

    castling = ""
    for flag in pos.castling:
        _, rook_home = _CASTLING_HOMES[flag]
        rook = next((p for p in kept if p.square == rook_home), None)
        color = WHITE if flag.isupper() else BLACK
        if rook is not None and rook.kind == "R" and rook.color == color:
            castling += flag

    en_passant = pos.en_passant
    if en_passant is not None:
        pawn_sq = en_passant + 8 if square_rank(en_passant) == 2 else en_passant - 8
        if pawn_sq not in kept_squares:
            en_passant = None

    return Position(
        pieces=tuple(kept),
        side_to_move=pos.side_to_move,
        castling=castling,
        en_passant=en_passant,
        halfmove_clock=pos.halfmove_clock,
        fullmove_number=pos.fullmove_number,
    )


def is_attacked(pos: Position, target: int, by: str) -> bool:
    """Whether any piece of color ``by`` attacks ``target``.

    Scans outward from the target square, so cost is independent of piece
    count: pawn and knight origins, king adjacency, then blocked ray walks
    for the sliders.
    """
    occ = pos.occupancy()
    tf, tr = square_file(target), square_rank(target)

    # Pawns capture diagonally forward, so an attacking pawn sits one rank
    # behind the target from its own point of view.
    pawn_rank = tr - 1 if by == WHITE else tr + 1
    if 0 <= pawn_rank <= 7:
        for df in (-1, 1):
            f = tf + df
            if 0 <= f <= 7:
                p = occ.get(square_index(f, pawn_rank))
                if p is not None and p.kind == "P" and p.color == by:
                    return True

    for df, dr in _KNIGHT_STEPS:
        f, r = tf + df, tr + dr
        if 0 <= f <= 7 and 0 <= r <= 7:
            p = occ.get(square_index(f, r))
            if p is not None and p.kind == "N" and p.color == by:
                return True

    for df, dr in _KING_STEPS:
        f, r = tf + df, tr + dr
        if 0 <= f <= 7 and 0 <= r <= 7:
            p = occ.get(square_index(f, r))
            if p is not None and p.kind == "K" and p.color == by:
                return True

    for dirs, kinds in ((_ROOK_DIRS, ("R", "Q")), (_BISHOP_DIRS, ("B", "Q"))):
        for df, dr in dirs:
            f, r = tf + df, tr + dr
            while 0 <= f <= 7 and 0 <= r <= 7:
                p = occ.get(square_index(f, r))
                if p is not None:
                    if p.color == by and p.kind in kinds:
                        return True
                    break
                f += df
                r += dr
    return False


def legality_status(pos: Position) -> LegalityStatus:
    """Classify a position for engine consumption.

    A position is rejected when the king of the player *not* on move is
    attacked (an impossible state: the mover could capture the king).
    """
    if structural_problems(pos):
        return LegalityStatus.STRUCTURALLY_INVALID
    defender = opposite(pos.side_to_move)
    king_sq = pos.king_square(defender)
    if is_attacked(pos, king_sq, by=pos.side_to_move):
        return LegalityStatus.SIDE_NOT_TO_MOVE_IN_CHECK
    return LegalityStatus.LEGAL


def repair(pos: Position) -> RepairOutcome:
    """Restore legality of an ablated position by flipping the side to move.

    Flipping clears the en passant target (a tempo change invalidates it).
    Positions that stay illegal both ways, or that are structurally broken,
    are Unresolvable and left for the caller's fallback.
    """
    status = legality_status(pos)
    if status is LegalityStatus.LEGAL:
        return RepairOutcome(RepairStatus.LEGAL_AS_IS, pos)
    if status is LegalityStatus.STRUCTURALLY_INVALID:
        return RepairOutcome(RepairStatus.UNRESOLVABLE, pos)
    flipped = replace(pos, side_to_move=opposite(pos.side_to_move), en_passant=None)
    if legality_status(flipped) is LegalityStatus.LEGAL:
        return RepairOutcome(RepairStatus.FLIPPED_SIDE_TO_MOVE, flipped)
    return RepairOutcome(RepairStatus.UNRESOLVABLE, pos)
