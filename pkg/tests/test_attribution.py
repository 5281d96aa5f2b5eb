import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chesshap.attribution import (
    BudgetTooSmall,
    AttributionError,
    PositionMismatch,
    ProbabilityMapping,
    SamplingConfig,
    SubsetCache,
    SubsetStats,
    TooManyPieces,
    compare_explanations,
    evaluate_subset,
    explain,
    explain_exact,
    explain_sampling,
    score_to_probability,
)
from chesshap.engine import EngineScore, EvalLimit, EvaluationOutcome, MaterialEvaluator
from chesshap.position import full_mask, non_king_indexing, parse_fen
from support import random_legal_position, shapley_all_permutations, shapley_subset_enumeration

ROOKS_VS_QUEEN = "8/2k5/2q5/8/4R3/4RK2/8/8 w - - 0 1"
KINGS_ONLY = "8/2k5/8/8/8/5K2/8/8 w - - 0 1"
# white rook e4 vs black queen c6: the canonical 2-piece worked example
TWO_PIECE = "8/2k5/2q5/8/4R3/5K2/8/8 w - - 0 1"

LIMIT = EvalLimit.movetime(100)

# Frozen from the brute-force oracle (subset enumeration with exact factorial
# weights over the logistic material model); the all-permutations oracle
# agrees to the last bit.
P100 = 0.590975619668374
P500 = 0.8629487074245404
PM900 = 0.03516180518521524
PM400 = 0.1866388141367734
TWO_PIECE_PHI_ROOK = 0.2572128581880493
TWO_PIECE_PHI_QUEEN = -0.5705740440512759


def material_explain_exact(fen, **kwargs):
    return explain_exact(parse_fen(fen), MaterialEvaluator(), **kwargs)


class TestScoreToProbability:
    def test_zero_maps_to_half(self):
        assert score_to_probability(EngineScore.centipawns(0)) == 0.5

    def test_one_pawn_advantage(self):
        assert score_to_probability(EngineScore.centipawns(100)) == pytest.approx(P100, abs=1e-12)

    @given(st.integers(-20000, 20000))
    def test_antisymmetry(self, s):
        p_pos = score_to_probability(EngineScore.centipawns(s) if s else EngineScore.centipawns(0))
        p_neg = score_to_probability(EngineScore.centipawns(-s) if s else EngineScore.centipawns(0))
        assert p_neg == pytest.approx(1.0 - p_pos, abs=1e-15)

    def test_strictly_monotone_in_resolvable_band(self):
        rng = random.Random(7)
        scores = sorted(rng.sample(range(-6000, 6001), 500))
        probs = [score_to_probability(EngineScore.centipawns(s)) for s in scores]
        assert all(a < b for a, b in zip(probs, probs[1:]))

    def test_mate_ranks_above_realistic_centipawns(self):
        worst_mate = min(
            score_to_probability(EngineScore.mate_in(m)) for m in range(1, 101)
        )
        best_cp = max(
            score_to_probability(EngineScore.centipawns(s)) for s in range(0, 3001, 50)
        )
        assert worst_mate > best_cp
        best_black_mate = max(
            score_to_probability(EngineScore.mate_in(-m)) for m in range(1, 101)
        )
        worst_cp = min(
            score_to_probability(EngineScore.centipawns(-s)) for s in range(0, 3001, 50)
        )
        assert best_black_mate < worst_cp

    def test_mate_ordering(self):
        # Shorter mates never rank lower; the centipawn fold that defines the
        # ordering is strictly monotone even where the logistic saturates.
        mapping = ProbabilityMapping()
        probs = [score_to_probability(EngineScore.mate_in(m)) for m in range(1, 101)]
        assert all(a >= b for a, b in zip(probs, probs[1:]))
        folds = [mapping.equivalent_centipawns(EngineScore.mate_in(m)) for m in range(1, 101)]
        assert all(a > b for a, b in zip(folds, folds[1:]))

    def test_probability_stays_bounded(self):
        for score in (EngineScore.centipawns(10**9), EngineScore.mate_in(1)):
            assert 0.0 <= score_to_probability(score) <= 1.0

    def test_beta_must_be_positive(self):
        with pytest.raises(ValueError):
            ProbabilityMapping(beta=0.0)


class RejectingEvaluator:
    """Rejects boards per a predicate; used for the flip-retry pipeline."""

    id = "rejecting"

    def __init__(self, reject_when):
        self.reject_when = reject_when
        self.calls = []

    def evaluate(self, position, limit):
        self.calls.append(position.side_to_move)
        if self.reject_when(position):
            return EvaluationOutcome.rejected("refused")
        return MaterialEvaluator().evaluate(position, limit)


class TestEvaluateSubset:
    def test_full_subset_fig1(self):
        pos = parse_fen(ROOKS_VS_QUEEN)
        prob = evaluate_subset(pos, 0b111, MaterialEvaluator(), LIMIT)
        assert prob == pytest.approx(P100, abs=1e-12)

    def test_empty_subset_is_draw(self):
        pos = parse_fen(ROOKS_VS_QUEEN)
        assert evaluate_subset(pos, 0, MaterialEvaluator(), LIMIT) == 0.5

    def test_unresolvable_scores_half_and_counts_fallback(self):
        pos = parse_fen("4k3/8/4r3/8/4Q3/8/8/qN2K3 w - - 0 1")
        stats = SubsetStats()
        prob = evaluate_subset(pos, 0b0101, MaterialEvaluator(), LIMIT, stats=stats)
        assert prob == 0.5
        assert stats.fallbacks == 1
        assert stats.evaluations == 1

    def test_rejected_then_flip_succeeds(self):
        evaluator = RejectingEvaluator(lambda pos: pos.side_to_move == "w")
        pos = parse_fen(ROOKS_VS_QUEEN)
        stats = SubsetStats()
        prob = evaluate_subset(pos, 0b111, evaluator, LIMIT, stats=stats)
        assert evaluator.calls == ["w", "b"]
        assert prob == pytest.approx(P100, abs=1e-12)
        assert stats.fallbacks == 0

    def test_rejected_both_ways_falls_back(self):
        evaluator = RejectingEvaluator(lambda pos: True)
        stats = SubsetStats()
        prob = evaluate_subset(parse_fen(ROOKS_VS_QUEEN), 0b111, evaluator, LIMIT, stats=stats)
        assert prob == 0.5
        assert stats.fallbacks == 1

    def test_cache_hit_is_bit_identical_and_free(self):
        pos = parse_fen(ROOKS_VS_QUEEN)
        cache = SubsetCache()
        stats = SubsetStats()
        first = evaluate_subset(pos, 0b011, MaterialEvaluator(), LIMIT, cache=cache, stats=stats)
        again = evaluate_subset(pos, 0b011, MaterialEvaluator(), LIMIT, cache=cache, stats=stats)
        assert first == again
        assert stats.evaluations == 1

    def test_cache_key_ignores_move_counters(self):
        a = parse_fen("8/2k5/2q5/8/4R3/5K2/8/8 w - - 12 44")
        b = parse_fen(TWO_PIECE)
        assert SubsetCache.key(a) == SubsetCache.key(b)


class TestExplainExact:
    def test_kings_only(self):
        e = material_explain_exact(KINGS_ONLY)
        assert e.contributions == ()
        assert e.base_value == 0.5
        assert e.full_value == 0.5
        assert e.method == "exact"
        assert e.evaluations_used == 1

    def test_two_piece_frozen_values(self):
        e = material_explain_exact(TWO_PIECE)
        assert [c.piece.symbol for c in e.contributions] == ["R", "q"]
        assert e.contributions[0].phi == pytest.approx(TWO_PIECE_PHI_ROOK, abs=1e-12)
        assert e.contributions[1].phi == pytest.approx(TWO_PIECE_PHI_QUEEN, abs=1e-12)
        assert e.full_value == pytest.approx(PM400, abs=1e-12)
        assert e.evaluations_used == 4

    def test_efficiency_identity(self):
        e = material_explain_exact(ROOKS_VS_QUEEN)
        assert abs(e.base_value + math.fsum(e.phis) - e.full_value) <= 1e-9

    def test_each_subset_evaluated_once(self):
        e = material_explain_exact(ROOKS_VS_QUEEN)
        assert e.evaluations_used == 2 ** 3

    def test_too_many_pieces(self):
        with pytest.raises(TooManyPieces):
            material_explain_exact(ROOKS_VS_QUEEN, max_pieces=2)

    def test_matches_both_oracles(self):
        rng = random.Random(99)
        for _ in range(6):
            pos = random_legal_position(rng, max_extra=6)
            evaluator = MaterialEvaluator()
            e = explain_exact(pos, evaluator)
            assert all(abs(phi) <= 1.0 for phi in e.phis)
            n = len(non_king_indexing(pos))

            def f(mask):
                return evaluate_subset(pos, mask, evaluator, LIMIT)

            enum_phis = shapley_subset_enumeration(n, f)
            perm_phis = shapley_all_permutations(n, f)
            for got, want_a, want_b in zip(e.phis, enum_phis, perm_phis):
                assert got == pytest.approx(want_a, abs=1e-9)
                assert got == pytest.approx(want_b, abs=1e-9)

    def test_dummy_pieces_get_zero(self):
        evaluator = MaterialEvaluator(values={"N": 0})
        pos = parse_fen("4k3/8/2n5/8/3N4/8/2R5/4K3 w - - 0 1")
        e = explain_exact(pos, evaluator)
        for c in e.contributions:
            if c.piece.kind == "N":
                assert abs(c.phi) <= 1e-12

    def test_same_kind_same_color_symmetry(self):
        e = material_explain_exact(ROOKS_VS_QUEEN)
        rooks = [c.phi for c in e.contributions if c.piece.symbol == "R"]
        assert len(rooks) == 2
        assert abs(rooks[0] - rooks[1]) <= 1e-12

    def test_cache_transparency(self):
        pos = parse_fen(ROOKS_VS_QUEEN)
        with_cache = explain_exact(pos, MaterialEvaluator(), cache=SubsetCache())
        without = explain_exact(pos, MaterialEvaluator(), cache=None)
        assert with_cache == without

    def test_shared_cache_makes_second_run_free(self):
        pos = parse_fen(ROOKS_VS_QUEEN)
        cache = SubsetCache()
        first = explain_exact(pos, MaterialEvaluator(), cache=cache)
        second = explain_exact(pos, MaterialEvaluator(), cache=cache)
        assert first.phis == second.phis
        assert second.evaluations_used == 0


class TestExplainSampling:
    def test_budget_too_small(self):
        with pytest.raises(BudgetTooSmall):
            explain_sampling(
                parse_fen(TWO_PIECE),
                MaterialEvaluator(),
                config=SamplingConfig(max_evaluations=5, seed=1),
            )

    def test_needs_a_piece(self):
        with pytest.raises(AttributionError):
            explain_sampling(parse_fen(KINGS_ONLY), MaterialEvaluator())

    def test_two_piece_full_enumeration_equals_exact(self):
        pos = parse_fen(TWO_PIECE)
        sampled = explain_sampling(
            pos, MaterialEvaluator(), config=SamplingConfig(max_evaluations=6, seed=3)
        )
        exact = explain_exact(pos, MaterialEvaluator())
        for got, want in zip(sampled.phis, exact.phis):
            assert got == pytest.approx(want, abs=1e-12)

    def test_n6_full_permutation_coverage_matches_exact(self):
        rng = random.Random(6)
        pos = random_legal_position(rng, n_pieces=6)
        sampled = explain_sampling(
            pos, MaterialEvaluator(), config=SamplingConfig(max_evaluations=720, seed=0)
        )
        exact = explain_exact(pos, MaterialEvaluator())
        for got, want in zip(sampled.phis, exact.phis):
            assert got == pytest.approx(want, abs=1e-12)

    def test_seeded_runs_bit_identical(self):
        rng = random.Random(11)
        pos = random_legal_position(rng, n_pieces=9)
        config = SamplingConfig(max_evaluations=60, seed=42)
        a = explain_sampling(pos, MaterialEvaluator(), config=config)
        b = explain_sampling(pos, MaterialEvaluator(), config=config)
        assert a == b

    def test_reported_explanation_exactly_additive(self):
        rng = random.Random(12)
        pos = random_legal_position(rng, n_pieces=10)
        e = explain_sampling(
            pos, MaterialEvaluator(), config=SamplingConfig(max_evaluations=40, seed=5)
        )
        assert e.base_value + math.fsum(e.phis) == pytest.approx(e.full_value, abs=1e-12)

    def test_budget_respected(self):
        rng = random.Random(13)
        pos = random_legal_position(rng, n_pieces=10)
        e = explain_sampling(
            pos, MaterialEvaluator(), config=SamplingConfig(max_evaluations=40, seed=5)
        )
        assert e.evaluations_used <= 40
        assert e.method == "sampling"
        assert e.seed == 5


class TestExplainDispatch:
    def test_small_board_goes_exact(self):
        e = explain(parse_fen(ROOKS_VS_QUEEN), MaterialEvaluator())
        assert e.method == "exact"

    def test_threshold_is_inclusive(self):
        rng = random.Random(21)
        pos = random_legal_position(rng, n_pieces=4)
        e = explain(pos, MaterialEvaluator(), config=SamplingConfig(exact_threshold=4))
        assert e.method == "exact"

    def test_above_threshold_samples(self):
        rng = random.Random(22)
        pos = random_legal_position(rng, n_pieces=5)
        config = SamplingConfig(exact_threshold=4, max_evaluations=100, seed=1)
        e = explain(pos, MaterialEvaluator(), config=config)
        assert e.method == "sampling"

    def test_default_threshold_is_14(self):
        assert SamplingConfig().exact_threshold == 14
        assert SamplingConfig().max_evaluations == 10_000


class TestCompare:
    def test_identical_explanations_zero_deltas(self):
        e = material_explain_exact(ROOKS_VS_QUEEN)
        rows = compare_explanations(e, e)
        assert [r.delta for r in rows] == [0.0, 0.0, 0.0]
        assert [r.piece.square for r in rows] == [20, 28, 42]

    def test_knight_blind_table_ranks_knights_first(self):
        pos = parse_fen("4k3/8/2n5/8/3N4/8/2R5/4K3 w - - 0 1")
        normal = explain_exact(pos, MaterialEvaluator())
        blind = explain_exact(pos, MaterialEvaluator(values={"N": 0}, id="blind"))
        rows = compare_explanations(normal, blind)
        assert {rows[0].piece.kind, rows[1].piece.kind} == {"N"}
        assert abs(rows[0].delta) >= abs(rows[1].delta) >= abs(rows[2].delta)

    def test_position_mismatch(self):
        a = material_explain_exact(ROOKS_VS_QUEEN)
        b = material_explain_exact(TWO_PIECE)
        with pytest.raises(PositionMismatch):
            compare_explanations(a, b)


class TestProgress:
    def test_progress_reports_are_monotone(self):
        seen = []
        explain_exact(
            parse_fen(ROOKS_VS_QUEEN), MaterialEvaluator(), on_progress=seen.append
        )
        assert seen == sorted(seen)
        assert seen[-1] == 8
