"""Render comparison tables to LaTeX and CSV, and aggregate few-shot runs.

LaTeX output is the tabular body only (booktabs rules, multirow category
groups, best value per directed column in bold); a suggested wrapper is
emitted as comments so the fragment drops into a document unchanged.
CSV output carries the same cells at full precision with no styling.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import ValidationError

HIGHER = "higher"
LOWER = "lower"
NONE = "none"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    key: str
    better: str = NONE  # "higher" | "lower" | "none"
    decimals: int = 2
    unit_suffix: str = ""

    def __post_init__(self):
        if self.better not in (HIGHER, LOWER, NONE):
            raise ValidationError(f"better must be higher/lower/none, got {self.better!r}")
        if self.decimals < 0:
            raise ValidationError("decimals must be >= 0")


@dataclass(frozen=True)
class TableRow:
    model: str
    strategy: str
    cells: tuple[float, ...]


@dataclass(frozen=True)
class TableModel:
    """Rows grouped by category, cells aligned with a ColumnSpec list."""

    groups: tuple[tuple[str, tuple[TableRow, ...]], ...]

    def all_rows(self) -> list[TableRow]:
        return [row for _, rows in self.groups for row in rows]


# Characters LaTeX treats specially, with their replacements. Backslash,
# tilde and caret need textual commands; the rest take a simple backslash.
_LATEX_SIMPLE = {"&": r"\&", "%": r"\%", "$": r"\$", "#": r"\#", "_": r"\_",
                 "{": r"\{", "}": r"\}"}
_LATEX_NAMED = {"~": r"\textasciitilde{}", "^": r"\textasciicircum{}",
                "\\": r"\textbackslash{}"}
_ESCAPED_TOKENS = sorted(
    list(_LATEX_SIMPLE.values()) + list(_LATEX_NAMED.values()), key=len, reverse=True
)


def latex_escape(text: str) -> str:
    """Escape LaTeX specials; idempotent on its own output."""
    out = []
    i = 0
    while i < len(text):
        matched = None
        for token in _ESCAPED_TOKENS:
            if text.startswith(token, i):
                matched = token
                break
        if matched is not None:
            out.append(matched)
            i += len(matched)
            continue
        ch = text[i]
        if ch in _LATEX_SIMPLE:
            out.append(_LATEX_SIMPLE[ch])
        elif ch in _LATEX_NAMED:
            out.append(_LATEX_NAMED[ch])
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _check_arity(table: TableModel, columns: list[ColumnSpec]):
    for _, rows in table.groups:
        for row in rows:
            if len(row.cells) != len(columns):
                raise ValidationError(
                    f"row {row.model!r} has {len(row.cells)} cells, "
                    f"expected {len(columns)}"
                )


def column_optima(table: TableModel, columns: list[ColumnSpec]) -> list[float | None]:
    """Per column: min/max over all rows for directed columns, else None."""
    rows = table.all_rows()
    optima: list[float | None] = []
    for j, col in enumerate(columns):
        if col.better == NONE or not rows:
            optima.append(None)
        else:
            values = [row.cells[j] for row in rows]
            optima.append(max(values) if col.better == HIGHER else min(values))
    return optima


_WRAPPER_COMMENT = """\
% Suggested wrapper:
%   \\begin{table}[htbp]
%     \\centering
%     \\caption{...}
%     \\begin{adjustbox}{center}
%       <tabular below>
%     \\end{adjustbox}
%   \\end{table}
% Requires: booktabs, multirow, adjustbox.
"""


def render_latex_table(table: TableModel, columns: list[ColumnSpec]) -> str:
    """Tabular body with multirow category groups and bold column optima."""
    if not table.groups or not table.all_rows():
        raise ValidationError("cannot render an empty table")
    _check_arity(table, columns)
    optima = column_optima(table, columns)

    def fmt_cell(value: float, col: ColumnSpec, optimum: float | None) -> str:
        text = f"{value:.{col.decimals}f}"
        if col.unit_suffix:
            text += latex_escape(col.unit_suffix)
        if optimum is not None and value == optimum:
            text = rf"\textbf{{{text}}}"
        return text

    lines = [_WRAPPER_COMMENT.rstrip("\n")]
    spec = "lll" + "r" * len(columns)
    lines.append(rf"\begin{{tabular}}{{{spec}}}")
    lines.append(r"\toprule")
    header = ["Category", "Model", "Strategy"] + [latex_escape(c.name) for c in columns]
    lines.append(" & ".join(header) + r" \\")
    lines.append(r"\midrule")
    for g, (category, rows) in enumerate(table.groups):
        if g > 0:
            lines.append(r"\midrule")
        for r, row in enumerate(rows):
            if r == 0:
                cat = (
                    rf"\multirow{{{len(rows)}}}{{*}}{{{latex_escape(category)}}}"
                    if len(rows) > 1
                    else latex_escape(category)
                )
            else:
                cat = ""
            cells = [
                fmt_cell(value, col, opt)
                for value, col, opt in zip(row.cells, columns, optima)
            ]
            parts = [cat, latex_escape(row.model), latex_escape(row.strategy)] + cells
            lines.append(" & ".join(parts) + r" \\")
    lines.append(r"\bottomrule")
    lines.append(r"\end{tabular}")
    return "\n".join(lines) + "\n"


def render_csv(table: TableModel, columns: list[ColumnSpec]) -> str:
    """Same cells as the LaTeX table, full precision, RFC-4180 quoting."""
    if not table.groups or not table.all_rows():
        raise ValidationError("cannot render an empty table")
    _check_arity(table, columns)
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(["Category", "Model", "Strategy"] + [c.name for c in columns])
    for category, rows in table.groups:
        for row in rows:
            writer.writerow(
                [category, row.model, row.strategy] + [repr(v) for v in row.cells]
            )
    return buf.getvalue()


def render_comparison_latex(models, friedman_result, nemenyi_result) -> str:
    """LaTeX fragment summarizing a Friedman/Nemenyi comparison."""
    fr = friedman_result
    nr = nemenyi_result
    lines = [
        "% Friedman / Nemenyi comparison summary",
        r"\begin{tabular}{lr}",
        r"\toprule",
        r"Statistic & Value \\",
        r"\midrule",
        rf"Friedman $\chi^2$ (df = {fr.df}) & {fr.chi2:.4f} \\",
        rf"$p$-value & {fr.p_value:.4g} \\",
    ]
    if fr.tie_corrected:
        lines.append(rf"Uncorrected $\chi^2$ & {fr.chi2_uncorrected:.4f} \\")
    if fr.iman_davenport_F is not None:
        lines.append(rf"Iman--Davenport $F$ & {fr.iman_davenport_F:.4f} \\")
        lines.append(rf"Iman--Davenport $p$ & {fr.iman_davenport_p:.4g} \\")
    else:
        lines.append(r"Iman--Davenport $F$ & -- \\")
    lines.append(
        rf"Critical difference ($\alpha$ = {nr.alpha:g}) & {nr.critical_difference:.4f} \\"
    )
    lines.append(r"\bottomrule")
    lines.append(r"\end{tabular}")
    lines.append("")
    lines.append(r"\begin{tabular}{lr}")
    lines.append(r"\toprule")
    lines.append(r"Model & Mean rank \\")
    lines.append(r"\midrule")
    order = sorted(range(len(models)), key=lambda i: (fr.mean_ranks[i], models[i]))
    for i in order:
        lines.append(rf"{latex_escape(models[i])} & {fr.mean_ranks[i]:.4f} \\")
    lines.append(r"\bottomrule")
    lines.append(r"\end{tabular}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FewShotSummary:
    episode_accuracies: tuple[float, ...]
    mean: float
    std: float  # population standard deviation (divisor n)


def fewshot_aggregate(accuracies: list[float]) -> FewShotSummary:
    """Mean and population std over episode accuracies."""
    if not accuracies:
        raise ValidationError("cannot aggregate an empty episode list")
    for a in accuracies:
        if not math.isfinite(a):
            raise ValidationError(f"non-finite episode accuracy: {a}")
    n = len(accuracies)
    mean = sum(accuracies) / n
    variance = sum((a - mean) ** 2 for a in accuracies) / n
    return FewShotSummary(
        episode_accuracies=tuple(accuracies), mean=mean, std=math.sqrt(variance)
    )


def format_mean_std(summary: FewShotSummary) -> str:
    """Percent rendering at two decimals: ``MM.mm±SS.ss``."""
    return f"{100.0 * summary.mean:.2f}±{100.0 * summary.std:.2f}"
