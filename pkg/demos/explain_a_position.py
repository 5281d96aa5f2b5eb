"""Explain a single position and render the result three ways.

The built-in material evaluator keeps this demo deterministic and instant;
swap in a UCI engine path to see real evaluations (see compare_engines.py).
"""

from chesshap import MaterialEvaluator, explain, parse_fen, to_json, to_svg_board, to_waterfall_text

# A rook-pair-versus-queen study: material says White is up one pawn's worth,
# but the probabilities tell a subtler story piece by piece.
FEN = "8/2k5/2q5/8/4R3/4RK2/8/8 w - - 0 1"

position = parse_fen(FEN)
explanation = explain(position, MaterialEvaluator())

# The terminal waterfall: rows ordered by |phi|, running total from the
# kings-only base value 0.5 to the full evaluation.
print(to_waterfall_text(explanation))

# Every number lives in the JSON document; this is what the HTTP service
# returns and what `chesshap render` re-renders later.
print(to_json(explanation))

# The SVG heatmap tints each piece square: red helps White, blue helps Black.
with open("explanation.svg", "w", encoding="utf-8") as fh:
    fh.write(to_svg_board(explanation))
print("\nwrote explanation.svg")
