"""Per-piece attribution of win probability over piece-ablation perturbations.

The engine is framed as a bounded classifier f: position -> P(White wins) by
passing its centipawn output through a logistic curve. Each non-king piece is
a feature; removing subsets of them yields perturbed boards whose evaluations
determine Shapley values: phi_i is piece i's average marginal effect on f over
all insertion orders. With the kings-only baseline fixed at 0.5, the values
decompose the evaluation additively:

    f(x) = 0.5 + sum_i phi_i

Two computation paths are provided. ``explain_exact`` evaluates every one of
the 2^n piece subsets once (memoised; the weighted-sum assembly reuses the
table for all pieces) and is exact. ``explain_sampling`` walks random piece
permutations under an evaluation budget and is the path for crowded boards.
Both share the perturbation pipeline: build the subset board, repair illegal
checks by flipping the side to move, and fall back to a drawn 0.5 when no
legal reading exists.
"""

from __future__ import annotations

import itertools
import math
import random
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from chesshap.engine import (
    DEFAULT_PERTURB_LIMIT_MS,
    DEFAULT_ROOT_LIMIT_MS,
    EngineScore,
    EvalLimit,
    EvaluationOutcome,
)
from chesshap.position import (
    Piece,
    Position,
    RepairStatus,
    build_subset_position,
    full_mask,
    non_king_indexing,
    opposite,
    repair,
    to_fen,
)

BASE_VALUE = 0.5  # kings-only boards are trivially drawn

DEFAULT_EXACT_THRESHOLD = 14
DEFAULT_MAX_EVALUATIONS = 10_000


class AttributionError(Exception):
    pass


class TooManyPieces(AttributionError):
    """Exact enumeration would exceed the configured piece limit."""


class BudgetTooSmall(AttributionError):
    """Sampling needs at least 2n + 2 evaluations to cover one full walk."""


class PositionMismatch(AttributionError):
    """Two explanations do not describe the same piece indexing."""


@dataclass(frozen=True)
class ProbabilityMapping:
    """Logistic centipawn-to-probability calibration.

    ``beta`` is the Lichess-convention slope. Mate scores are folded onto the
    centipawn axis as sign(m) * (mate_cp_base - |m|) before the logistic, so
    shorter mates rank higher and every mate outranks any realistic centipawn
    score. Note the logistic saturates in float64 above roughly |s| = 9983
    with the default beta: adjacent deep scores can share a probability even
    though their centipawn equivalents differ.
    """

    beta: float = 3.68e-3
    mate_cp_base: int = 10_000

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def equivalent_centipawns(self, score: EngineScore) -> float:
        if score.cp is not None:
            return float(score.cp)
        sign = 1 if score.mate > 0 else -1
        return sign * float(self.mate_cp_base - abs(score.mate))


DEFAULT_MAPPING = ProbabilityMapping()


def score_to_probability(score: EngineScore, mapping: ProbabilityMapping = DEFAULT_MAPPING) -> float:
    """White's win probability in [0, 1] for an engine score."""
    s = mapping.equivalent_centipawns(score)
    return 1.0 / (1.0 + math.exp(-mapping.beta * s))


@dataclass(frozen=True)
class Contribution:
    piece: Piece
    phi: float


@dataclass(frozen=True)
class Explanation:
    """Additive decomposition of one position's evaluation.

    ``contributions`` follow the piece indexing (ascending square order).
    ``evaluations_used`` counts distinct perturbed boards whose value was
    computed rather than served from cache; ``fallback_count`` is how many of
    those received the default 0.5 because no legal reading existed.
    """

    fen: str
    evaluator_id: str
    method: str  # "exact" | "sampling"
    base_value: float
    full_value: float
    contributions: tuple[Contribution, ...]
    evaluations_used: int
    fallback_count: int
    root_limit: EvalLimit
    perturb_limit: EvalLimit
    seed: Optional[int] = None

    @property
    def phis(self) -> tuple[float, ...]:
        return tuple(c.phi for c in self.contributions)


@dataclass
class SamplingConfig:
    """Budget and dispatch knobs for the sampling explainer."""

    max_evaluations: int = DEFAULT_MAX_EVALUATIONS
    seed: Optional[int] = None
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD


class SubsetCache:
    """Thread-safe map from canonical subset FEN to win probability.

    Keys zero the move counters so the same piece arrangement hits the same
    entry regardless of game history. Stored values never change; concurrent
    writers of the same key necessarily agree for deterministic evaluators,
    so last-write-wins is harmless.
    """

    def __init__(self) -> None:
        self._values: dict[str, float] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(position: Position) -> str:
        return to_fen(replace(position, halfmove_clock=0, fullmove_number=1))

    def get(self, key: str) -> Optional[float]:
        with self._lock:
            return self._values.get(key)

    def put(self, key: str, value: float) -> None:
        with self._lock:
            self._values[key] = value

    def __len__(self) -> int:
        return len(self._values)


def evaluate_subset(
    position: Position,
    subset: int,
    evaluator,
    limit: EvalLimit,
    mapping: ProbabilityMapping = DEFAULT_MAPPING,
    cache: Optional[SubsetCache] = None,
    stats: Optional["SubsetStats"] = None,
) -> float:
    """Win probability of one perturbed board, with repair and fallback.

    Pipeline: build the subset position; repair illegal checks by flipping the
    side to move (Unresolvable boards score the drawn default 0.5); otherwise
    evaluate, and if the engine rejects the board, retry once with the side
    flipped before falling back to 0.5. Results are memoised in ``cache``.
    """
    sub = build_subset_position(position, subset)
    key = SubsetCache.key(sub)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    prob = _evaluate_repaired(sub, evaluator, limit, mapping, stats)
    if cache is not None:
        cache.put(key, prob)
    return prob


@dataclass
class SubsetStats:
    evaluations: int = 0
    fallbacks: int = 0


def _evaluate_repaired(
    sub: Position,
    evaluator,
    limit: EvalLimit,
    mapping: ProbabilityMapping,
    stats: Optional[SubsetStats],
) -> float:
    if stats is not None:
        stats.evaluations += 1
    outcome = repair(sub)
    if outcome.status is RepairStatus.UNRESOLVABLE:
        if stats is not None:
            stats.fallbacks += 1
        return BASE_VALUE
    playable = outcome.position
    result: EvaluationOutcome = evaluator.evaluate(playable, limit)
    if not result.ok:
        flipped = replace(
            playable, side_to_move=opposite(playable.side_to_move), en_passant=None
        )
        result = evaluator.evaluate(flipped, limit)
        if not result.ok:
            if stats is not None:
                stats.fallbacks += 1
            return BASE_VALUE
    return score_to_probability(result.score, mapping)


class _Run:
    """Memoised subset evaluation for a single explanation.

    Keeps a mask-keyed table (masks are unique within one position) in front
    of the FEN-keyed shared cache, and enforces the evaluation budget: cache
    hits are free, every newly computed subset costs one unit.
    """

    def __init__(
        self,
        position: Position,
        evaluator,
        perturb_limit: EvalLimit,
        mapping: ProbabilityMapping,
        cache: Optional[SubsetCache],
        budget: Optional[int] = None,
        on_progress: Optional[Callable[[int], None]] = None,
    ):
        self.position = position
        self.evaluator = evaluator
        self.perturb_limit = perturb_limit
        self.mapping = mapping
        self.cache = cache
        self.budget = budget
        self.on_progress = on_progress
        self.stats = SubsetStats()
        self.table: dict[int, float] = {}

    def exhausted(self, mask: int) -> bool:
        return (
            self.budget is not None
            and mask not in self.table
            and self.stats.evaluations >= self.budget
        )

    def probability(self, mask: int, limit: Optional[EvalLimit] = None) -> float:
        if mask in self.table:
            return self.table[mask]
        prob = evaluate_subset(
            self.position,
            mask,
            self.evaluator,
            limit or self.perturb_limit,
            self.mapping,
            self.cache,
            self.stats,
        )
        self.table[mask] = prob
        if self.on_progress is not None:
            self.on_progress(self.stats.evaluations)
        return prob

    def prefetch(self, masks: Sequence[int], limit: EvalLimit) -> None:
        """Evaluate uncached masks through the evaluator's parallel path."""
        pending = [m for m in masks if m not in self.table]
        if not pending or not hasattr(self.evaluator, "evaluate_many"):
            return
        boards, fresh = [], []
        for mask in pending:
            sub = build_subset_position(self.position, mask)
            key = SubsetCache.key(sub)
            hit = self.cache.get(key) if self.cache is not None else None
            if hit is not None:
                self.table[mask] = hit
            else:
                boards.append((mask, sub, key))
                fresh.append(repair(sub))
        # Pool fan-out only covers the plain evaluate path; boards needing the
        # repair fallback logic go one at a time through probability().
        simple = [
            (mask, out.position, key)
            for (mask, sub, key), out in zip(boards, fresh)
            if out.status is not RepairStatus.UNRESOLVABLE
        ]
        outcomes = self.evaluator.evaluate_many([p for _, p, _ in simple], limit)
        for (mask, _, key), outcome in zip(simple, outcomes):
            if not outcome.ok:
                continue  # rejection retry handled by probability()
            prob = score_to_probability(outcome.score, self.mapping)
            self.stats.evaluations += 1
            self.table[mask] = prob
            if self.cache is not None:
                self.cache.put(key, prob)
        if self.on_progress is not None:
            self.on_progress(self.stats.evaluations)


def _shapley_weights(n: int) -> list[float]:
    """weights[s] = s! (n-s-1)! / n! for subset size s."""
    n_fact = math.factorial(n)
    return [math.factorial(s) * math.factorial(n - s - 1) / n_fact for s in range(n)]


def explain_exact(
    position: Position,
    evaluator,
    root_limit: EvalLimit = EvalLimit.movetime(DEFAULT_ROOT_LIMIT_MS),
    perturb_limit: EvalLimit = EvalLimit.movetime(DEFAULT_PERTURB_LIMIT_MS),
    mapping: ProbabilityMapping = DEFAULT_MAPPING,
    cache: Optional[SubsetCache] = None,
    max_pieces: int = DEFAULT_EXACT_THRESHOLD,
    on_progress: Optional[Callable[[int], None]] = None,
) -> Explanation:
    """Exact Shapley attribution by full subset enumeration.

    Evaluates each of the 2^n subsets exactly once (not n * 2^(n-1) pairs);
    every phi_i is assembled from the shared table with the subset-size
    weights s!(n-s-1)!/n!. The full board uses ``root_limit``; perturbations
    use ``perturb_limit``.
    """
    indexing = non_king_indexing(position)
    n = len(indexing)
    if n > max_pieces:
        raise TooManyPieces(f"{n} non-king pieces exceeds exact limit {max_pieces}")
    run = _Run(position, evaluator, perturb_limit, mapping, cache, on_progress=on_progress)

    full = full_mask(n)
    full_value = run.probability(full, limit=root_limit)
    run.prefetch(range(full), perturb_limit)
    for mask in range(full):
        run.probability(mask)

    weights = _shapley_weights(n)
    contributions = []
    for i, piece in enumerate(indexing):
        bit = 1 << i
        terms = []
        for mask in range(1 << n):
            if mask & bit:
                continue
            w = weights[bin(mask).count("1")]
            terms.append(w * (run.table[mask | bit] - run.table[mask]))
        contributions.append(Contribution(piece, math.fsum(terms)))

    return Explanation(
        fen=to_fen(position),
        evaluator_id=getattr(evaluator, "id", "unknown"),
        method="exact",
        base_value=BASE_VALUE,
        full_value=full_value,
        contributions=tuple(contributions),
        evaluations_used=run.stats.evaluations,
        fallback_count=run.stats.fallbacks,
        root_limit=root_limit,
        perturb_limit=perturb_limit,
    )


def explain_sampling(
    position: Position,
    evaluator,
    config: Optional[SamplingConfig] = None,
    root_limit: EvalLimit = EvalLimit.movetime(DEFAULT_ROOT_LIMIT_MS),
    perturb_limit: EvalLimit = EvalLimit.movetime(DEFAULT_PERTURB_LIMIT_MS),
    mapping: ProbabilityMapping = DEFAULT_MAPPING,
    cache: Optional[SubsetCache] = None,
    on_progress: Optional[Callable[[int], None]] = None,
) -> Explanation:
    """Monte Carlo Shapley attribution by permutation walks.

    Draws piece insertion orders from a seeded generator and accumulates each
    piece's marginal probability change; when n! fits inside the budget the
    orders are enumerated outright, which reproduces the exact values. The
    budget counts distinct perturbed boards (memoised repeats are free); a
    walk interrupted by budget exhaustion keeps its completed marginals.
    The residual f(x) - 0.5 - sum(phi) is spread uniformly so the reported
    explanation is exactly additive.
    """
    config = config or SamplingConfig()
    indexing = non_king_indexing(position)
    n = len(indexing)
    if n < 1:
        raise AttributionError("sampling needs at least one non-king piece")
    if config.max_evaluations < 2 * n + 2:
        raise BudgetTooSmall(
            f"budget {config.max_evaluations} below minimum {2 * n + 2} for {n} pieces"
        )

    run = _Run(
        position,
        evaluator,
        perturb_limit,
        mapping,
        cache,
        budget=config.max_evaluations,
        on_progress=on_progress,
    )
    full = full_mask(n)
    full_value = run.probability(full, limit=root_limit)

    sums = [0.0] * n
    counts = [0] * n
    for perm in _permutation_stream(n, config):
        if run.exhausted(0):
            break
        mask = 0
        prev = run.probability(0)
        aborted = False
        for i in perm:
            step = mask | (1 << i)
            if run.exhausted(step):
                aborted = True
                break
            cur = run.probability(step)
            sums[i] += cur - prev
            counts[i] += 1
            mask, prev = step, cur
        if aborted:
            break

    estimates = [sums[i] / counts[i] for i in range(n)]
    residual = full_value - BASE_VALUE - math.fsum(estimates)
    correction = residual / n
    contributions = tuple(
        Contribution(piece, estimates[i] + correction) for i, piece in enumerate(indexing)
    )

    return Explanation(
        fen=to_fen(position),
        evaluator_id=getattr(evaluator, "id", "unknown"),
        method="sampling",
        base_value=BASE_VALUE,
        full_value=full_value,
        contributions=contributions,
        evaluations_used=run.stats.evaluations,
        fallback_count=run.stats.fallbacks,
        root_limit=root_limit,
        perturb_limit=perturb_limit,
        seed=config.seed,
    )


def _permutation_stream(n: int, config: SamplingConfig):
    """Insertion orders for the sampler.

    Full lexicographic enumeration when all n! orders fit inside the walk
    budget (coverage then equals the exact computation); otherwise seeded
    random draws, capped at one walk per budget unit so the loop terminates
    even when every subset is already cached.
    """
    max_walks = config.max_evaluations
    if math.factorial(n) <= max_walks:
        yield from itertools.permutations(range(n))
        return
    rng = random.Random(config.seed)
    base = list(range(n))
    for _ in range(max_walks):
        order = base[:]
        rng.shuffle(order)
        yield order


def explain(
    position: Position,
    evaluator,
    config: Optional[SamplingConfig] = None,
    root_limit: EvalLimit = EvalLimit.movetime(DEFAULT_ROOT_LIMIT_MS),
    perturb_limit: EvalLimit = EvalLimit.movetime(DEFAULT_PERTURB_LIMIT_MS),
    mapping: ProbabilityMapping = DEFAULT_MAPPING,
    cache: Optional[SubsetCache] = None,
    on_progress: Optional[Callable[[int], None]] = None,
) -> Explanation:
    """Exact attribution up to the piece threshold, sampling beyond it.

    The threshold is inclusive: a board at exactly the limit still gets the
    exact treatment.
    """
    config = config or SamplingConfig()
    n = len(non_king_indexing(position))
    if n <= config.exact_threshold:
        return explain_exact(
            position,
            evaluator,
            root_limit=root_limit,
            perturb_limit=perturb_limit,
            mapping=mapping,
            cache=cache,
            max_pieces=config.exact_threshold,
            on_progress=on_progress,
        )
    return explain_sampling(
        position,
        evaluator,
        config=config,
        root_limit=root_limit,
        perturb_limit=perturb_limit,
        mapping=mapping,
        cache=cache,
        on_progress=on_progress,
    )


@dataclass(frozen=True)
class ContributionDelta:
    piece: Piece
    phi_a: float
    phi_b: float

    @property
    def delta(self) -> float:
        return self.phi_a - self.phi_b


def compare_explanations(a: Explanation, b: Explanation) -> list[ContributionDelta]:
    """Per-piece differences between two explanations of the same position.

    Sorted by |phi_a - phi_b| descending; ties break on square index so the
    order is stable.
    """
    pieces_a = [c.piece for c in a.contributions]
    pieces_b = [c.piece for c in b.contributions]
    if a.fen.split()[0] != b.fen.split()[0] or pieces_a != pieces_b:
        raise PositionMismatch("explanations describe different positions")
    rows = [
        ContributionDelta(ca.piece, ca.phi, cb.phi)
        for ca, cb in zip(a.contributions, b.contributions)
    ]
    return sorted(rows, key=lambda r: (-abs(r.delta), r.piece.square))
