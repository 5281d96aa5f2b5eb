"""Command-line entry point: explain, compare, render, serve.

Exit codes: 0 success, 2 usage error, 3 engine failure, 4 illegal position.
stdout carries only the requested artifact; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from chesshap.attribution import (
    Explanation,
    SamplingConfig,
    compare_explanations,
    explain,
)
from chesshap.engine import (
    EngineError,
    EngineRegistry,
    EvalLimit,
    UnknownEvaluator,
)
from chesshap.position import PositionError, parse_fen
from chesshap.render import (
    from_json,
    to_json,
    to_svg_board,
    to_waterfall_svg,
    to_waterfall_text,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ENGINE = 3
EXIT_POSITION = 4

FORMATS = ("json", "text", "svg", "waterfall")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chesshap",
        description="Attribute a chess engine's win probability to individual pieces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--fen", required=True, help="position to explain (FEN)")
        p.add_argument("--registry", help="engine registry JSON file")
        p.add_argument("--root-ms", type=int, default=5000,
                       help="movetime for the full board (default 5000)")
        p.add_argument("--perturb-ms", type=int, default=100,
                       help="movetime per perturbation (default 100)")
        p.add_argument("--max-evals", type=int, default=10000,
                       help="sampling budget in distinct perturbations (default 10000)")
        p.add_argument("--seed", type=int, default=None, help="sampling seed")
        p.add_argument("--exact-threshold", type=int, default=14,
                       help="largest piece count still enumerated exactly (default 14)")
        p.add_argument("--pool", type=int, default=None,
                       help="engine processes for perturbations (default: CPU count)")
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--out", help="write the artifact here instead of stdout")

    p_explain = sub.add_parser("explain", help="explain one position")
    p_explain.add_argument("--engine", required=True, help="registry id or engine path")
    add_run_flags(p_explain)

    p_compare = sub.add_parser("compare", help="explain with two engines and diff")
    p_compare.add_argument("--engine-a", required=True)
    p_compare.add_argument("--engine-b", required=True)
    add_run_flags(p_compare)

    p_render = sub.add_parser("render", help="re-render a saved explanation document")
    p_render.add_argument("--in", dest="input", required=True, help="explanation JSON file")
    p_render.add_argument("--format", choices=FORMATS, default="svg")
    p_render.add_argument("--out")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True, help="service config JSON file")

    return parser


def _load_registry(path: Optional[str]) -> EngineRegistry:
    return EngineRegistry.from_file(path) if path else EngineRegistry()


def _run_explanation(args, registry: EngineRegistry, engine: str) -> Explanation:
    descriptor = registry.resolve(engine)
    position = parse_fen(args.fen)
    evaluator = descriptor.create_pool(args.pool)
    try:
        return explain(
            position,
            evaluator,
            config=SamplingConfig(
                max_evaluations=args.max_evals,
                seed=args.seed,
                exact_threshold=args.exact_threshold,
            ),
            root_limit=EvalLimit.movetime(args.root_ms),
            perturb_limit=EvalLimit.movetime(args.perturb_ms),
        )
    finally:
        evaluator.close()


def _render_explanation(explanation: Explanation, format: str) -> str:
    if format == "json":
        return to_json(explanation) + "\n"
    if format == "text":
        return to_waterfall_text(explanation)
    if format == "svg":
        return to_svg_board(explanation) + "\n"
    return to_waterfall_svg(explanation) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_explain(args) -> int:
    registry = _load_registry(args.registry)
    explanation = _run_explanation(args, registry, args.engine)
    _emit(_render_explanation(explanation, args.format), args.out)
    return EXIT_OK


def _cmd_compare(args) -> int:
    registry = _load_registry(args.registry)
    a = _run_explanation(args, registry, args.engine_a)
    b = _run_explanation(args, registry, args.engine_b)
    rows = compare_explanations(a, b)
    if args.format == "json":
        from chesshap.render import to_document

        doc = {
            "a": to_document(a),
            "b": to_document(b),
            "deltas": [
                {
                    "square": row.piece.square_name,
                    "piece": row.piece.kind_name,
                    "color": row.piece.color_name,
                    "phi_a": row.phi_a,
                    "phi_b": row.phi_b,
                    "delta": row.delta,
                }
                for row in rows
            ],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        lines = [f"{'piece':<24} {'phi_a':>10} {'phi_b':>10} {'delta':>10}"]
        for row in rows:
            label = f"{row.piece.square_name} {row.piece.color_name} {row.piece.kind_name}"
            lines.append(
                f"{label:<24} {row.phi_a:>+10.5f} {row.phi_b:>+10.5f} {row.delta:>+10.5f}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_render(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        explanation = from_json(fh.read())
    _emit(_render_explanation(explanation, args.format), args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    from chesshap.service import ServiceConfig, run

    if not os.path.exists(args.config):
        print(f"chesshap: config file not found: {args.config}", file=sys.stderr)
        return EXIT_USAGE
    run(ServiceConfig.from_file(args.config))
    return EXIT_OK


_COMMANDS = {
    "explain": _cmd_explain,
    "compare": _cmd_compare,
    "render": _cmd_render,
    "serve": _cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PositionError as exc:
        print(f"chesshap: illegal position: {exc}", file=sys.stderr)
        return EXIT_POSITION
    except UnknownEvaluator as exc:
        print(f"chesshap: unknown engine {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EngineError as exc:
        print(f"chesshap: engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except FileNotFoundError as exc:
        print(f"chesshap: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
