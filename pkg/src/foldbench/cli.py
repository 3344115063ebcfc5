"""Command-line front end wiring the harness together.

Subcommands: ``metrics``, ``compare``, ``split``, ``table``, ``fewshot``
and ``config resolve``. All randomness flows through an explicit
``--seed`` flag; reruns on identical inputs rewrite identical bytes.
Output files are written atomically (temp file + rename).

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .cd_diagram import cd_diagram_svg
from .config import load_config, to_canonical_json
from .errors import HarnessError, ParseError, ValidationError
from .ingest import ExperimentIndex, parse_prediction_file, scan_experiment_dir
from .metrics import confusion_matrix, report_as_dict, summarize
from .report import (
    ColumnSpec,
    TableModel,
    TableRow,
    fewshot_aggregate,
    format_mean_std,
    render_comparison_latex,
    render_csv,
    render_latex_table,
)
from .splits import load_manifest, stratified_holdout, stratified_kfold
from .stats import ScoreTable, friedman, nemenyi, rank_matrix

_METRIC_KEYS = (
    "accuracy",
    "balanced_accuracy",
    "macro_f1",
    "weighted_f1",
    "macro_precision",
    "macro_recall",
    "cohen_kappa",
)
_META_KEYS = {
    "total_params_m": "total_params_millions",
    "train_params_m": "trainable_params_millions",
    "epoch_time_s": "epoch_time_seconds",
}

# (spec, render fraction as percent) pairs mirroring the usual comparison table
DEFAULT_COLUMNS: list[tuple[ColumnSpec, bool]] = [
    (ColumnSpec("Accuracy (%)", "accuracy", better="higher"), True),
    (ColumnSpec("Balanced Acc (%)", "balanced_accuracy", better="higher"), True),
    (ColumnSpec("F1 Macro (%)", "macro_f1", better="higher"), True),
    (ColumnSpec("Recall (%)", "macro_recall", better="higher"), True),
    (ColumnSpec("Precision (%)", "macro_precision", better="higher"), True),
    (ColumnSpec("Total Params (M)", "total_params_m", better="lower"), False),
    (ColumnSpec("Train Params (M)", "train_params_m", better="lower"), False),
    (ColumnSpec("Epoch Time (s)", "epoch_time_s", better="lower"), False),
]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 on usage errors (2 is for bad input data)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _atomic_write(path: Path | str, text: str):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


# ---------------------------------------------------------------- metrics


def _cmd_metrics(args) -> int:
    text = Path(args.predictions).read_text(encoding="utf-8")
    records = parse_prediction_file(text, source=str(args.predictions))
    label_order = None
    if args.labels:
        label_order = [lab.strip() for lab in args.labels.split(",") if lab.strip()]
    cm = confusion_matrix(records, label_order=label_order)
    report = summarize(cm)
    sys.stdout.write(_dump_json(report_as_dict(report)))
    return 0


# ---------------------------------------------------------------- compare


def _parse_score_csv(text: str, source: str) -> tuple[list[str], list[list[float]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty score table", source=source) from None
    if not header or header[0].strip() != "fold":
        raise ParseError("first column must be 'fold'", source=source, line=1)
    models = [h.strip() for h in header[1:]]
    if len(models) < 2:
        raise ValidationError(f"{source}: need at least 2 model columns")
    blocks: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(models) + 1:
            raise ParseError(
                f"expected {len(models) + 1} cells, got {len(row)}",
                source=source,
                line=lineno,
            )
        try:
            blocks.append([float(cell) for cell in row[1:]])
        except ValueError as exc:
            raise ParseError(f"bad score value ({exc})", source=source, line=lineno) from exc
    if len(blocks) < 2:
        raise ValidationError(f"{source}: need at least 2 fold rows")
    return models, blocks


def _cmd_compare(args) -> int:
    text = Path(args.scores).read_text(encoding="utf-8")
    models, blocks = _parse_score_csv(text, source=str(args.scores))
    table = ScoreTable(
        models=tuple(models),
        blocks=tuple(tuple(b) for b in blocks),
        direction=args.direction,
    )
    ranks = rank_matrix(table)
    fr = friedman(ranks)
    nr = nemenyi(fr.mean_ranks, len(models), fr.n_blocks, alpha=args.alpha)

    result = {
        "models": models,
        "n_blocks": fr.n_blocks,
        "direction": args.direction,
        "alpha": args.alpha,
        "mean_ranks": list(fr.mean_ranks),
        "chi2": fr.chi2,
        "chi2_uncorrected": fr.chi2_uncorrected,
        "tie_corrected": fr.tie_corrected,
        "df": fr.df,
        "p_value": fr.p_value,
        "iman_davenport_F": fr.iman_davenport_F,
        "iman_davenport_p": fr.iman_davenport_p,
        "q_alpha": nr.q_alpha,
        "critical_difference": nr.critical_difference,
        "significant": [list(row) for row in nr.significant],
        "conventions": {
            "tie_correction": "applied when ties are present; chi2_uncorrected is the raw statistic",
            "omnibus_p_value": "p_value (Friedman chi-squared)",
            "iman_davenport": "reported alongside; null when its denominator is not positive",
        },
    }
    json_text = _dump_json(result)
    if args.out_json:
        _atomic_write(args.out_json, json_text)
    else:
        sys.stdout.write(json_text)
    if args.out_latex:
        _atomic_write(args.out_latex, render_comparison_latex(models, fr, nr))
    if args.out_svg:
        svg = cd_diagram_svg(models, list(fr.mean_ranks), nr.critical_difference)
        _atomic_write(args.out_svg, svg)
    return 0


# ---------------------------------------------------------------- split


def _cmd_split(args) -> int:
    manifest = load_manifest(
        Path(args.manifest).read_text(encoding="utf-8"), source=str(args.manifest)
    )
    if args.k is not None:
        plan = stratified_kfold(manifest, args.k, args.seed)
        payload = {"folds": dict(sorted(plan.fold_of.items()))}
    else:
        plan = stratified_holdout(manifest, args.train_frac, args.seed)
        payload = {"train": plan.train_ids, "test": plan.test_ids}
    text = _dump_json(payload)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- table


def _load_column_specs(path) -> list[tuple[ColumnSpec, bool]]:
    source = str(path)
    try:
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", source=source, line=exc.lineno) from exc
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"{source}: expected a non-empty JSON array of columns")
    columns = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "name" not in entry or "key" not in entry:
            raise ValidationError(f"{source}: column {i} needs 'name' and 'key'")
        key = entry["key"]
        if key not in _METRIC_KEYS and key not in _META_KEYS:
            raise ValidationError(f"{source}: unknown column key {key!r}")
        spec = ColumnSpec(
            name=str(entry["name"]),
            key=key,
            better=entry.get("better", "none"),
            decimals=int(entry.get("decimals", 2)),
            unit_suffix=str(entry.get("unit_suffix", "")),
        )
        columns.append((spec, bool(entry.get("percent", False))))
    return columns


def build_table_model(
    index: ExperimentIndex, columns: list[tuple[ColumnSpec, bool]]
) -> TableModel:
    """One row per run: fold metrics averaged, meta fields passed through."""
    if not index.runs:
        raise ValidationError(f"no runs under experiment root {index.dataset_name!r}")
    grouped: dict[str, list[TableRow]] = {}
    for run in index.runs:
        reports = [summarize(confusion_matrix(f.predictions)) for f in run.folds]
        cells = []
        for spec, percent in columns:
            if spec.key in _META_KEYS:
                value = getattr(run.meta, _META_KEYS[spec.key])
            else:
                value = sum(getattr(r, spec.key) for r in reports) / len(reports)
                if percent:
                    value *= 100.0
            cells.append(value)
        grouped.setdefault(run.meta.category, []).append(
            TableRow(model=run.meta.model_name, strategy=run.meta.strategy, cells=tuple(cells))
        )
    groups = tuple((cat, tuple(rows)) for cat, rows in grouped.items())
    return TableModel(groups=groups)


def _cmd_table(args) -> int:
    index = scan_experiment_dir(args.exp_dir)
    columns = _load_column_specs(args.columns) if args.columns else DEFAULT_COLUMNS
    table = build_table_model(index, columns)
    specs = [spec for spec, _ in columns]
    latex = render_latex_table(table, specs)
    if args.out_latex:
        _atomic_write(args.out_latex, latex)
    if args.out_csv:
        _atomic_write(args.out_csv, render_csv(table, specs))
    if not args.out_latex and not args.out_csv:
        sys.stdout.write(latex)
    return 0


# ---------------------------------------------------------------- fewshot


def _cmd_fewshot(args) -> int:
    source = str(args.episodes)
    try:
        payload = json.loads(Path(args.episodes).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", source=source, line=exc.lineno) from exc
    if isinstance(payload, dict):
        payload = payload.get("episode_accuracies")
    if not isinstance(payload, list) or not payload:
        raise ValidationError(f"{source}: expected a non-empty array of accuracies")
    accuracies = []
    for value in payload:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"{source}: non-numeric episode accuracy {value!r}")
        if not 0.0 <= float(value) <= 1.0:
            raise ValidationError(f"{source}: episode accuracy {value} outside [0, 1]")
        accuracies.append(float(value))
    summary = fewshot_aggregate(accuracies)
    formatted = format_mean_std(summary)
    sys.stdout.write(formatted + "\n")
    sys.stdout.write(
        _dump_json(
            {
                "episodes": len(summary.episode_accuracies),
                "mean": summary.mean,
                "std": summary.std,
                "std_convention": "population (divisor n)",
                "formatted": formatted,
            }
        )
    )
    return 0


# ---------------------------------------------------------------- config


def _cmd_config_resolve(args) -> int:
    tree = load_config(args.config_file)
    sys.stdout.write(to_canonical_json(tree))
    return 0


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="foldbench",
        description="Statistical benchmarking harness for per-fold prediction logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="metric suite for one predictions file")
    p.add_argument("predictions", help="predictions.jsonl path")
    p.add_argument("--labels", help="comma-separated label order (default: observed, sorted)")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("compare", help="Friedman/Nemenyi comparison over a fold-by-model CSV")
    p.add_argument("scores", help="CSV with a 'fold' column followed by one column per model")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument(
        "--direction",
        choices=["higher", "lower"],
        default="higher",
        help="whether higher or lower scores are better (default higher)",
    )
    p.add_argument("--out-json", help="write the result JSON here instead of stdout")
    p.add_argument("--out-latex", help="write a LaTeX summary fragment here")
    p.add_argument("--out-svg", help="write the critical-difference diagram here")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("split", help="stratified K-fold or holdout plan for a manifest")
    p.add_argument("manifest", help="CSV with header sample_id,label")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--k", type=int, help="number of folds")
    mode.add_argument("--train-frac", type=float, help="train fraction for a holdout split")
    p.add_argument("--seed", type=int, default=0, help="deterministic seed (default 0)")
    p.add_argument("--out", help="write the plan JSON here instead of stdout")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("table", help="comparison table over an experiment directory")
    p.add_argument("--exp-dir", required=True, help="experiment root directory")
    p.add_argument("--columns", help="JSON file with column definitions")
    p.add_argument("--out-latex", help="write the LaTeX table here")
    p.add_argument("--out-csv", help="write the CSV table here")
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("fewshot", help="mean±std aggregation of episode accuracies")
    p.add_argument("episodes", help="JSON array of accuracies (fractions in [0, 1])")
    p.set_defaults(func=_cmd_fewshot)

    p = sub.add_parser("config", help="configuration tools")
    config_sub = p.add_subparsers(dest="config_command", required=True)
    pr = config_sub.add_parser("resolve", help="resolve _base_ inheritance, print JSON")
    pr.add_argument("config_file", help="YAML config path")
    pr.set_defaults(func=_cmd_config_resolve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return args.func(args)
    except (HarnessError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
