"""Walk through the perturbation protocol one subset at a time.

For a 3-piece board there are 2^3 = 8 coalitions. Each one becomes a real
board: kings stay put, the selected pieces remain, metadata is repaired, and
the evaluator scores what is left. These eight probabilities are everything
the exact attribution needs.
"""

from chesshap import (
    MaterialEvaluator,
    build_subset_position,
    evaluate_subset,
    non_king_indexing,
    parse_fen,
    repair,
    to_fen,
)
from chesshap.engine import EvalLimit

FEN = "8/2k5/2q5/8/4R3/4RK2/8/8 w - - 0 1"

position = parse_fen(FEN)
pieces = non_king_indexing(position)
evaluator = MaterialEvaluator()
limit = EvalLimit.movetime(100)

print(f"base board: {FEN}")
print("pieces (ascending square order):", ", ".join(p.label() for p in pieces))
print()

n = len(pieces)
for mask in range(2 ** n):
    kept = [p.square_name for i, p in enumerate(pieces) if mask >> i & 1]
    board = build_subset_position(position, mask)
    outcome = repair(board)
    prob = evaluate_subset(position, mask, evaluator, limit)
    print(
        f"mask {mask:0{n}b}  keep {','.join(kept) or 'kings only':<12} "
        f"{to_fen(board).split()[0]:<24} repair={outcome.status.value:<20} "
        f"P(White wins)={prob:.4f}"
    )

# Removing a piece can expose the king that is not on move; the repair step
# flips the side to move, and only truly hopeless boards fall back to 0.5.
print()
shield = parse_fen("4k3/8/4r3/8/4Q3/8/8/4K3 w - - 0 1")
exposed = build_subset_position(shield, 0b01)  # ablate the shielding rook
print("ablation exposing a check:", to_fen(exposed))
print("repair outcome:", repair(exposed).status.value)
