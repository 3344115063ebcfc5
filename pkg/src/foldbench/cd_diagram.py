"""Critical-difference diagram rendering to standalone SVG.

Geometry is fixed (width 800, margins 40, 24 px label rows) so the
output is byte-for-byte reproducible and suitable for golden-file tests.
Models sit on a [1, k] rank axis; labels alternate between a left and a
right stack in rank order; one bar per maximal group of rank-adjacent
models whose spread does not exceed the critical difference.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape as xml_escape

from .errors import ValidationError

WIDTH = 800
MARGIN = 40
ROW_HEIGHT = 24

_CD_BAR_Y = MARGIN
_AXIS_Y = MARGIN + 50
_GROUP_BAR_START = _AXIS_Y + 14
_GROUP_BAR_STEP = 8


def connector_groups(sorted_ranks: list[float], cd: float) -> list[tuple[int, int]]:
    """Maximal index intervals [i, j], j > i, with rank spread <= cd.

    Input ranks must be sorted ascending. Intervals contained in a larger
    qualifying interval are suppressed.
    """
    groups: list[tuple[int, int]] = []
    last_end = -1
    n = len(sorted_ranks)
    for i in range(n):
        j = i
        while j + 1 < n and sorted_ranks[j + 1] - sorted_ranks[i] <= cd:
            j += 1
        if j > i and j > last_end:
            groups.append((i, j))
            last_end = j
    return groups


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def cd_diagram_svg(model_names: list[str], mean_ranks: list[float], cd: float) -> str:
    """Render a critical-difference diagram; deterministic for fixed input."""
    if len(model_names) != len(mean_ranks):
        raise ValidationError(
            f"{len(model_names)} names but {len(mean_ranks)} ranks"
        )
    k = len(model_names)
    if k < 2:
        raise ValidationError("diagram needs at least 2 models")
    for name, rank in zip(model_names, mean_ranks):
        if not math.isfinite(rank):
            raise ValidationError(f"non-finite mean rank for {name!r}: {rank}")
    if not math.isfinite(cd) or cd <= 0:
        raise ValidationError(f"critical difference must be positive, got {cd}")

    order = sorted(range(k), key=lambda i: (mean_ranks[i], model_names[i]))
    ranks_sorted = [mean_ranks[i] for i in order]
    groups = connector_groups(ranks_sorted, cd)

    span = WIDTH - 2 * MARGIN

    def x_of(rank: float) -> float:
        return MARGIN + (rank - 1.0) / (k - 1) * span

    labels_top = _GROUP_BAR_START + max(1, len(groups)) * _GROUP_BAR_STEP + 18
    left_count = (k + 1) // 2
    right_count = k // 2
    height = labels_top + max(left_count, right_count) * ROW_HEIGHT + MARGIN

    e: list[str] = []
    e.append('<?xml version="1.0" encoding="UTF-8"?>')
    e.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">'
    )
    e.append(
        "<style>text{font-family:Helvetica,Arial,sans-serif;font-size:12px;}"
        ".cd-label{font-size:11px;}</style>"
    )

    # CD scale bar (clamped to the axis span; the caption has the value)
    cd_x0 = x_of(1.0)
    cd_x1 = x_of(1.0 + min(cd, float(k - 1)))
    e.append(
        f'<line x1="{_fmt(cd_x0)}" y1="{_CD_BAR_Y}" x2="{_fmt(cd_x1)}" '
        f'y2="{_CD_BAR_Y}" stroke="black" stroke-width="1.5"/>'
    )
    for xx in (cd_x0, cd_x1):
        e.append(
            f'<line x1="{_fmt(xx)}" y1="{_CD_BAR_Y - 4}" x2="{_fmt(xx)}" '
            f'y2="{_CD_BAR_Y + 4}" stroke="black" stroke-width="1.5"/>'
        )
    e.append(
        f'<text x="{_fmt(cd_x0)}" y="{_CD_BAR_Y - 8}" class="cd-label">'
        f"CD = {cd:.4f}</text>"
    )

    # rank axis with integer ticks
    e.append(
        f'<line x1="{MARGIN}" y1="{_AXIS_Y}" x2="{WIDTH - MARGIN}" '
        f'y2="{_AXIS_Y}" stroke="black" stroke-width="1"/>'
    )
    for tick in range(1, k + 1):
        tx = x_of(float(tick))
        e.append(
            f'<line x1="{_fmt(tx)}" y1="{_AXIS_Y - 5}" x2="{_fmt(tx)}" '
            f'y2="{_AXIS_Y}" stroke="black" stroke-width="1"/>'
        )
        e.append(
            f'<text x="{_fmt(tx)}" y="{_AXIS_Y - 9}" text-anchor="middle">{tick}</text>'
        )

    # connector bars for indistinguishable groups
    for g, (i, j) in enumerate(groups):
        gy = _GROUP_BAR_START + g * _GROUP_BAR_STEP
        e.append(
            f'<line x1="{_fmt(x_of(ranks_sorted[i]) - 3)}" y1="{gy}" '
            f'x2="{_fmt(x_of(ranks_sorted[j]) + 3)}" y2="{gy}" '
            f'stroke="black" stroke-width="3"/>'
        )

    # alternating left/right label stacks, best rank first
    left_row = 0
    right_row = 0
    for pos, idx in enumerate(order):
        rank = mean_ranks[idx]
        name = model_names[idx]
        mx = x_of(rank)
        if pos % 2 == 0:
            label_y = labels_top + left_row * ROW_HEIGHT
            side_x = MARGIN
            anchor = "start"
            left_row += 1
        else:
            label_y = labels_top + right_row * ROW_HEIGHT
            side_x = WIDTH - MARGIN
            anchor = "end"
            right_row += 1
        e.append(
            f'<polyline points="{_fmt(mx)},{_AXIS_Y} {_fmt(mx)},{label_y} '
            f'{_fmt(side_x)},{label_y}" fill="none" stroke="black" stroke-width="1"/>'
        )
        e.append(
            f'<text x="{_fmt(side_x)}" y="{label_y - 5}" text-anchor="{anchor}">'
            f"{xml_escape(name)} ({rank:.2f})</text>"
        )

    e.append("</svg>")
    return "\n".join(e) + "\n"
