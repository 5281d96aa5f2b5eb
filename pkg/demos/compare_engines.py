"""Compare how two evaluators distribute credit over the same board.

The cleanest contrast needs no external binaries: the standard material table
against one that values knights at zero. Every shared piece keeps its
attribution; the knights' worth moves entirely into the delta column. With a
real engine on PATH (e.g. stockfish), the same comparison surfaces genuine
disagreements in piece valuation.
"""

import shutil

from chesshap import (
    EngineRegistry,
    EvaluatorDescriptor,
    MaterialEvaluator,
    UciEngine,
    compare_explanations,
    explain,
    parse_fen,
)

FEN = "4k3/8/2n3n1/8/3N4/8/2R5/4K3 w - - 0 1"

position = parse_fen(FEN)
normal = explain(position, MaterialEvaluator())
blind = explain(position, MaterialEvaluator(values={"N": 0}, id="knight-blind"))

print(f"{'piece':<20} {'material':>10} {'knight-blind':>13} {'delta':>10}")
for row in compare_explanations(normal, blind):
    label = f"{row.piece.square_name} {row.piece.color_name} {row.piece.kind_name}"
    print(f"{label:<20} {row.phi_a:>+10.5f} {row.phi_b:>+13.5f} {row.delta:>+10.5f}")

stockfish = shutil.which("stockfish")
if stockfish:
    print("\nstockfish vs material on the same board:")
    engine = UciEngine(stockfish, id="stockfish")
    try:
        real = explain(position, engine)
    finally:
        engine.close()
    for row in compare_explanations(real, normal):
        label = f"{row.piece.square_name} {row.piece.color_name} {row.piece.kind_name}"
        print(f"{label:<20} {row.phi_a:>+10.5f} {row.phi_b:>+13.5f} {row.delta:>+10.5f}")
else:
    print("\n(no stockfish binary on PATH; skipping the engine-backed half)")
