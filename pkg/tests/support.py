"""Shared test helpers: random position generators and independent oracles.

Everything here is deliberately written against the *rules of chess*, not
against the package internals, so these functions can serve as independent
checks of the production code paths.
"""

from __future__ import annotations

import itertools
import math
import random
from typing import Callable

from chesshap.position import (
    BLACK,
    WHITE,
    LegalityStatus,
    Piece,
    Position,
    square_file,
    square_index,
    square_rank,
    structural_problems,
)

NON_KING_KINDS = "PNBRQ"


def random_structural_position(
    rng: random.Random, max_extra: int = 14, n_extra: int | None = None
) -> Position:
    """A structurally valid position; may leave either king en prise.

    Used by the legality-oracle comparison, which needs both legal and
    illegal-check samples. ``n_extra`` pins the exact non-king piece count.
    """
    while True:
        count = n_extra if n_extra is not None else rng.randint(0, max_extra)
        squares = rng.sample(range(64), k=2 + count)
        wk, bk = squares[0], squares[1]
        if _kings_adjacent(wk, bk):
            continue
        pieces = [Piece("K", WHITE, wk), Piece("K", BLACK, bk)]
        counts = {WHITE: 1, BLACK: 1}
        for sq in squares[2:]:
            color = rng.choice((WHITE, BLACK))
            if counts[color] >= 16:
                color = WHITE if color == BLACK else BLACK
            kind = rng.choice(NON_KING_KINDS)
            if kind == "P" and square_rank(sq) in (0, 7):
                kind = rng.choice("NBRQ")
            pieces.append(Piece(kind, color, sq))
            counts[color] += 1
        pos = Position(pieces=tuple(pieces), side_to_move=rng.choice((WHITE, BLACK)))
        if not structural_problems(pos):
            return pos


def random_legal_position(rng: random.Random, n_pieces: int | None = None, max_extra: int = 10) -> Position:
    """A structurally valid position whose not-on-move king is safe.

    ``n_pieces`` pins the exact non-king piece count when given.
    """
    from chesshap.position import legality_status

    while True:
        pos = random_structural_position(rng, max_extra=max_extra, n_extra=n_pieces)
        if legality_status(pos) is LegalityStatus.LEGAL:
            return pos


def _kings_adjacent(a: int, b: int) -> bool:
    return max(abs(square_file(a) - square_file(b)), abs(square_rank(a) - square_rank(b))) <= 1


# ---------------------------------------------------------------------------
# Brute-force attack oracle: enumerate every (piece, target) pair and apply
# the movement rule for the piece kind, stepping through blockers explicitly.
# ---------------------------------------------------------------------------


def attacks_square_bruteforce(piece: Piece, target: int, occupied: dict[int, Piece]) -> bool:
    if piece.square == target:
        return False
    pf, pr = square_file(piece.square), square_rank(piece.square)
    tf, tr = square_file(target), square_rank(target)
    df, dr = tf - pf, tr - pr
    kind = piece.kind
    if kind == "P":
        forward = 1 if piece.color == WHITE else -1
        return dr == forward and abs(df) == 1
    if kind == "N":
        return sorted((abs(df), abs(dr))) == [1, 2]
    if kind == "K":
        return max(abs(df), abs(dr)) == 1
    if kind == "R":
        rays = ((1, 0), (-1, 0), (0, 1), (0, -1))
    elif kind == "B":
        rays = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    else:  # queen
        rays = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))
    for sf, sr in rays:
        f, r = pf + sf, pr + sr
        while 0 <= f <= 7 and 0 <= r <= 7:
            sq = square_index(f, r)
            if sq == target:
                return True
            if sq in occupied:
                break
            f += sf
            r += sr
    return False


def legality_bruteforce(pos: Position) -> LegalityStatus:
    if structural_problems(pos):
        return LegalityStatus.STRUCTURALLY_INVALID
    occupied = pos.occupancy()
    defender = BLACK if pos.side_to_move == WHITE else WHITE
    king_sq = pos.king_square(defender)
    for piece in pos.pieces:
        if piece.color == pos.side_to_move and attacks_square_bruteforce(piece, king_sq, occupied):
            return LegalityStatus.SIDE_NOT_TO_MOVE_IN_CHECK
    return LegalityStatus.LEGAL


# ---------------------------------------------------------------------------
# Shapley oracles, independent of the attribution module's weighting path.
# ---------------------------------------------------------------------------


def shapley_subset_enumeration(n: int, f: Callable[[int], float]) -> list[float]:
    """Direct definition: phi_i = sum over masks without i of
    |S|!(n-|S|-1)!/n! * (f(S+i) - f(S)). ``f`` takes a bitmask."""
    phis = []
    for i in range(n):
        bit = 1 << i
        total = 0.0
        for mask in range(1 << n):
            if mask & bit:
                continue
            s = bin(mask).count("1")
            weight = math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
            total += weight * (f(mask | bit) - f(mask))
        phis.append(total)
    return phis


def shapley_all_permutations(n: int, f: Callable[[int], float]) -> list[float]:
    """Average marginal contribution over all n! insertion orders."""
    totals = [0.0] * n
    count = 0
    for perm in itertools.permutations(range(n)):
        mask = 0
        prev = f(0)
        for i in perm:
            mask |= 1 << i
            cur = f(mask)
            totals[i] += cur - prev
            prev = cur
        count += 1
    return [t / count for t in totals]
