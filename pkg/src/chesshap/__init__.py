"""Per-piece attribution of chess engine evaluations.

Treats every non-king piece as a feature, ablates piece subsets to form
perturbed boards, and distributes the engine's win probability additively
over the pieces as Shapley values.
"""

from chesshap.attribution import (
    Contribution,
    ContributionDelta,
    Explanation,
    ProbabilityMapping,
    SamplingConfig,
    SubsetCache,
    compare_explanations,
    evaluate_subset,
    explain,
    explain_exact,
    explain_sampling,
    score_to_probability,
)
from chesshap.engine import (
    EngineError,
    EnginePool,
    EngineRegistry,
    EngineScore,
    EvalLimit,
    EvaluationOutcome,
    EvaluatorDescriptor,
    MaterialEvaluator,
    UciEngine,
    material_values,
)
from chesshap.position import (
    BLACK,
    WHITE,
    IllegalSetup,
    LegalityStatus,
    MalformedFen,
    Piece,
    Position,
    PositionError,
    RepairOutcome,
    RepairStatus,
    STARTING_FEN,
    build_subset_position,
    legality_status,
    non_king_indexing,
    parse_fen,
    repair,
    to_fen,
)
from chesshap.render import (
    ColorScale,
    color_for_phi,
    from_json,
    to_json,
    to_svg_board,
    to_waterfall_svg,
    to_waterfall_text,
)

__version__ = "0.1.0"

__all__ = [
    "BLACK",
    "WHITE",
    "ColorScale",
    "Contribution",
    "ContributionDelta",
    "EngineError",
    "EnginePool",
    "EngineRegistry",
    "EngineScore",
    "EvalLimit",
    "EvaluationOutcome",
    "EvaluatorDescriptor",
    "Explanation",
    "IllegalSetup",
    "LegalityStatus",
    "MalformedFen",
    "MaterialEvaluator",
    "Piece",
    "Position",
    "PositionError",
    "ProbabilityMapping",
    "RepairOutcome",
    "RepairStatus",
    "STARTING_FEN",
    "SamplingConfig",
    "SubsetCache",
    "UciEngine",
    "build_subset_position",
    "color_for_phi",
    "compare_explanations",
    "evaluate_subset",
    "explain",
    "explain_exact",
    "explain_sampling",
    "from_json",
    "legality_status",
    "material_values",
    "non_king_indexing",
    "parse_fen",
    "repair",
    "score_to_probability",
    "to_fen",
    "to_json",
    "to_svg_board",
    "to_waterfall_svg",
    "to_waterfall_text",
    "__version__",
]
