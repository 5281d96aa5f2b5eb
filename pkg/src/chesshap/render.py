"""Serialise explanations: JSON documents, SVG board heatmaps, waterfalls.

Colour convention: red tints mark pieces that raise White's win probability,
blue tints mark pieces that favour Black. The diverging scale is anchored at
zero (neutral) and clamped symmetrically to the largest |phi| on the board,
so every rendering normalises per explanation. All functions are pure; the
same explanation always yields byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from chesshap.attribution import Contribution, Explanation
from chesshap.engine import EvalLimit
from chesshap.position import (
    KIND_NAMES,
    NAME_COLORS,
    NAME_KINDS,
    Piece,
    parse_fen,
    parse_square,
    square_file,
    square_name,
    square_rank,
)

SCHEMA_VERSION = 1

NEUTRAL_COLOR = "#F7F7F7"
POSITIVE_COLOR = "#67001F"  # deep red
NEGATIVE_COLOR = "#053061"  # deep blue

LIGHT_SQUARE = "#F0D9B5"
DARK_SQUARE = "#B58863"
TINT_OPACITY = 0.7

_GLYPHS = {
    ("w", "K"): "♔", ("w", "Q"): "♕", ("w", "R"): "♖",
    ("w", "B"): "♗", ("w", "N"): "♘", ("w", "P"): "♙",
    ("b", "K"): "♚", ("b", "Q"): "♛", ("b", "R"): "♜",
    ("b", "B"): "♝", ("b", "N"): "♞", ("b", "P"): "♟",
}


@dataclass(frozen=True)
class ColorScale:
    """Diverging red/blue ramp anchored at phi = 0.

    The domain is [-max_abs, +max_abs]; equal magnitudes on either side sit
    at the same distance from neutral (mirrored intensity).
    """

    max_abs: float

    @classmethod
    def for_explanation(cls, explanation: Explanation) -> "ColorScale":
        phis = explanation.phis
        return cls(max_abs=max((abs(p) for p in phis), default=0.0))

    def color_for_phi(self, phi: float) -> str:
        if self.max_abs == 0.0:
            return NEUTRAL_COLOR
        t = max(-1.0, min(1.0, phi / self.max_abs))
        endpoint = POSITIVE_COLOR if t > 0 else NEGATIVE_COLOR
        return _mix(NEUTRAL_COLOR, endpoint, abs(t))


def color_for_phi(phi: float, max_abs: float) -> str:
    return ColorScale(max_abs).color_for_phi(phi)


def _mix(start_hex: str, end_hex: str, t: float) -> str:
    sr, sg, sb = _rgb(start_hex)
    er, eg, eb = _rgb(end_hex)
    return "#{:02X}{:02X}{:02X}".format(
        round(sr + (er - sr) * t),
        round(sg + (eg - sg) * t),
        round(sb + (eb - sb) * t),
    )


def _rgb(hex_color: str) -> tuple[int, int, int]:
    h = hex_color.lstrip("#")
    return int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16)


# ---------------------------------------------------------------------------
# JSON document
# ---------------------------------------------------------------------------


def to_document(explanation: Explanation) -> dict:
    """Plain-dict form of an explanation, contributions in square order."""
    return {
        "schema_version": SCHEMA_VERSION,
        "fen": explanation.fen,
        "evaluator": explanation.evaluator_id,
        "method": explanation.method,
        "seed": explanation.seed,
        "base_value": explanation.base_value,
        "full_value": explanation.full_value,
        "evaluations_used": explanation.evaluations_used,
        "fallback_count": explanation.fallback_count,
        "root_limit": explanation.root_limit.to_json(),
        "perturb_limit": explanation.perturb_limit.to_json(),
        "contributions": [
            {
                "square": c.piece.square_name,
                "piece": c.piece.kind_name,
                "color": c.piece.color_name,
                "phi": c.phi,
            }
            for c in explanation.contributions
        ],
    }


def to_json(explanation: Explanation, indent: Optional[int] = 2) -> str:
    """Deterministic JSON text; floats keep their shortest round-trip form."""
    return json.dumps(to_document(explanation), indent=indent)


def document_to_explanation(doc: dict) -> Explanation:
    contributions = tuple(
        Contribution(
            Piece(
                NAME_KINDS[c["piece"]],
                NAME_COLORS[c["color"]],
                parse_square(c["square"]),
            ),
            c["phi"],
        )
        for c in doc["contributions"]
    )
    return Explanation(
        fen=doc["fen"],
        evaluator_id=doc["evaluator"],
        method=doc["method"],
        base_value=doc["base_value"],
        full_value=doc["full_value"],
        contributions=contributions,
        evaluations_used=doc["evaluations_used"],
        fallback_count=doc["fallback_count"],
        root_limit=EvalLimit.from_json(doc["root_limit"]),
        perturb_limit=EvalLimit.from_json(doc["perturb_limit"]),
        seed=doc.get("seed"),
    )


def from_json(text: str) -> Explanation:
    return document_to_explanation(json.loads(text))


# ---------------------------------------------------------------------------
# SVG board heatmap
# ---------------------------------------------------------------------------


def to_svg_board(
    explanation: Explanation,
    scale: Optional[ColorScale] = None,
    square_size: int = 48,
) -> str:
    """8x8 board with attributed pieces tinted by phi; kings stay untinted."""
    scale = scale or ColorScale.for_explanation(explanation)
    position = parse_fen(explanation.fen)
    tints = {c.piece.square: scale.color_for_phi(c.phi) for c in explanation.contributions}
    s = square_size
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{8 * s}" height="{8 * s}" '
        f'viewBox="0 0 {8 * s} {8 * s}">',
    ]
    for rank in range(7, -1, -1):
        for file in range(8):
            x, y = file * s, (7 - rank) * s
            base = LIGHT_SQUARE if (file + rank) % 2 else DARK_SQUARE
            lines.append(f'<rect x="{x}" y="{y}" width="{s}" height="{s}" fill="{base}"/>')
    for c in explanation.contributions:
        x = square_file(c.piece.square) * s
        y = (7 - square_rank(c.piece.square)) * s
        lines.append(
            f'<rect x="{x}" y="{y}" width="{s}" height="{s}" '
            f'fill="{tints[c.piece.square]}" fill-opacity="{TINT_OPACITY}"/>'
        )
    for piece in position.pieces:
        x = square_file(piece.square) * s + s // 2
        y = (7 - square_rank(piece.square)) * s + s // 2
        glyph = _GLYPHS[(piece.color, piece.kind)]
        lines.append(
            f'<text x="{x}" y="{y}" font-size="{int(s * 0.78)}" '
            f'text-anchor="middle" dominant-baseline="central">{glyph}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Waterfall
# ---------------------------------------------------------------------------


def waterfall_rows(explanation: Explanation) -> list[tuple[Contribution, float]]:
    """(contribution, running total) pairs, largest |phi| first.

    The running total starts at the base value and lands on the full value.
    Ties break on square index for a stable order.
    """
    ordered = sorted(
        explanation.contributions, key=lambda c: (-abs(c.phi), c.piece.square)
    )
    rows = []
    total = explanation.base_value
    for c in ordered:
        total += c.phi
        rows.append((c, total))
    return rows


def to_waterfall_text(explanation: Explanation, bar_width: int = 24) -> str:
    """Terminal waterfall: signed bars labelled with square + piece kind."""
    rows = waterfall_rows(explanation)
    max_abs = max((abs(c.phi) for c, _ in rows), default=0.0)
    lines = [
        f"evaluation {explanation.full_value:+.5f}  base {explanation.base_value:.5f}  "
        f"({explanation.method}, {explanation.evaluations_used} evaluations)",
        f"{'base':<22}          {explanation.base_value:+.5f}",
    ]
    for c, total in rows:
        label = f"{c.piece.square_name} {c.piece.color_name} {c.piece.kind_name}"
        if max_abs > 0:
            filled = round(abs(c.phi) / max_abs * bar_width)
        else:
            filled = 0
        bar = ("+" if c.phi >= 0 else "-") * filled
        lines.append(f"{label:<22} {c.phi:+.5f}  {bar:<{bar_width + 1}} -> {total:+.5f}")
    return "\n".join(lines) + "\n"


def to_waterfall_svg(
    explanation: Explanation,
    scale: Optional[ColorScale] = None,
    row_height: int = 26,
    chart_width: int = 560,
) -> str:
    """SVG waterfall: one signed bar per piece, running from base to full."""
    scale = scale or ColorScale.for_explanation(explanation)
    rows = waterfall_rows(explanation)
    label_w = 150
    plot_w = chart_width - label_w - 10
    values = [explanation.base_value, explanation.full_value]
    total = explanation.base_value
    for c, running in rows:
        values.extend((total, running))
        total = running
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo

    def x_of(v: float) -> float:
        return label_w + (v - lo) / span * plot_w

    height = (len(rows) + 2) * row_height + 10
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{chart_width}" height="{height}" '
        f'viewBox="0 0 {chart_width} {height}">',
        f'<line x1="{x_of(explanation.base_value):.2f}" y1="5" '
        f'x2="{x_of(explanation.base_value):.2f}" y2="{height - 5}" '
        'stroke="#999999" stroke-dasharray="4 3"/>',
        f'<text x="5" y="{row_height - 8}" font-size="12">'
        f"base {explanation.base_value:.3f}</text>",
    ]
    running = explanation.base_value
    for idx, (c, total) in enumerate(rows):
        y = (idx + 1) * row_height
        x0, x1 = x_of(running), x_of(total)
        color = scale.color_for_phi(c.phi)
        label = f"{c.piece.square_name} {c.piece.color_name} {c.piece.kind_name}"
        lines.append(
            f'<rect x="{min(x0, x1):.2f}" y="{y}" width="{abs(x1 - x0):.2f}" '
            f'height="{row_height - 8}" fill="{color}"/>'
        )
        lines.append(
            f'<text x="5" y="{y + row_height - 14}" font-size="12">{label}</text>'
        )
        lines.append(
            f'<text x="{max(x0, x1) + 4:.2f}" y="{y + row_height - 14}" '
            f'font-size="11">{c.phi:+.4f}</text>'
        )
        running = total
    y = (len(rows) + 1) * row_height
    lines.append(
        f'<text x="5" y="{y + row_height - 14}" font-size="12">'
        f"evaluation {explanation.full_value:.3f}</text>"
    )
    lines.append("</svg>")
    return "\n".join(lines)
