"""End-to-end CLI behaviour: outputs, determinism, exit codes."""

import json
import random

import pytest

from foldbench.cli import main

from test_ingest import _write_fold, _write_meta


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def perfect_predictions(tmp_path):
    path = tmp_path / "perfect.jsonl"
    lines = [
        json.dumps({"sample_id": f"s{i}", "true": f"c{i % 3}", "pred": f"c{i % 3}"})
        for i in range(12)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestMetricsCommand:
    def test_perfect_fixture(self, capsys, perfect_predictions):
        code, out, _ = _run(capsys, "metrics", str(perfect_predictions))
        assert code == 0
        payload = json.loads(out)
        assert payload["accuracy"] == 1.0
        assert payload["cohen_kappa"] == 1.0

    def test_malformed_line_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"sample_id":"a","true":"A","pred":"A"}\ngarbage\n', encoding="utf-8")
        code, _, err = _run(capsys, "metrics", str(bad))
        assert code == 2
        assert "line 2" in err

    def test_missing_file_exit_2(self, capsys, tmp_path):
        code, _, err = _run(capsys, "metrics", str(tmp_path / "absent.jsonl"))
        assert code == 2

    def test_explicit_label_order(self, capsys, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text('{"sample_id":"a","true":"B","pred":"B"}\n', encoding="utf-8")
        code, out, _ = _run(capsys, "metrics", str(path), "--labels", "B,A")
        assert code == 0
        labels = [c["label"] for c in json.loads(out)["per_class"]]
        assert labels == ["B", "A"]


def _scores_csv(tmp_path, rows, models=("m1", "m2")):
    path = tmp_path / "scores.csv"
    lines = ["fold," + ",".join(models)]
    for i, row in enumerate(rows):
        lines.append(f"{i}," + ",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestCompareCommand:
    def test_clean_sweep_chi2(self, capsys, tmp_path):
        path = _scores_csv(tmp_path, [[0.9, 0.1]] * 5)
        code, out, _ = _run(capsys, "compare", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["chi2"] == pytest.approx(5.0, abs=1e-12)
        assert payload["p_value"] == pytest.approx(0.02535, abs=5e-5)

    def test_all_tied(self, capsys, tmp_path):
        path = _scores_csv(tmp_path, [[0.5, 0.5]] * 4)
        code, out, _ = _run(capsys, "compare", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["chi2"] == 0.0
        assert payload["p_value"] == 1.0
        assert not any(any(row) for row in payload["significant"])

    def test_output_files_deterministic(self, capsys, tmp_path):
        rng = random.Random(2)
        rows = [[round(rng.random(), 3) for _ in range(4)] for _ in range(6)]
        path = _scores_csv(tmp_path, rows, models=("a", "b", "c", "d"))
        outputs = {}
        for attempt in ("first", "second"):
            args = [
                "compare",
                str(path),
                "--out-json",
                str(tmp_path / "r.json"),
                "--out-latex",
                str(tmp_path / "r.tex"),
                "--out-svg",
                str(tmp_path / "r.svg"),
            ]
            assert main(args) == 0
            outputs[attempt] = tuple(
                (tmp_path / name).read_bytes() for name in ("r.json", "r.tex", "r.svg")
            )
        assert outputs["first"] == outputs["second"]
        assert outputs["first"][2].startswith(b"<?xml")

    def test_single_model_exit_2(self, capsys, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("fold,m1\n0,0.5\n1,0.6\n", encoding="utf-8")
        code, _, err = _run(capsys, "compare", str(path))
        assert code == 2

    def test_lower_direction_flips_ranks(self, capsys, tmp_path):
        path = _scores_csv(tmp_path, [[1.0, 2.0]] * 3)
        _, out_h, _ = _run(capsys, "compare", str(path), "--direction", "higher")
        _, out_l, _ = _run(capsys, "compare", str(path), "--direction", "lower")
        assert json.loads(out_h)["mean_ranks"] == [2.0, 1.0]
        assert json.loads(out_l)["mean_ranks"] == [1.0, 2.0]


TREE_MANIFEST_SIZES = {
    "Douglasie": 183,
    "Buche": 164,
    "Fichte": 158,
    "Roteiche": 100,
    "Esche": 39,
    "Kiefer": 25,
    "Eiche": 23,
}


def _manifest_csv(tmp_path, sizes):
    path = tmp_path / "manifest.csv"
    lines = ["sample_id,label"]
    for label, size in sizes.items():
        lines.extend(f"{label}_{i:04d},{label}" for i in range(size))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestSplitCommand:
    def test_holdout_tree_counts(self, capsys, tmp_path):
        path = _manifest_csv(tmp_path, TREE_MANIFEST_SIZES)
        code, out, _ = _run(capsys, "split", str(path), "--train-frac", "0.8", "--seed", "42")
        assert code == 0
        payload = json.loads(out)
        per_class = {}
        for sample_id in payload["train"]:
            label = sample_id.rsplit("_", 1)[0]
            per_class[label] = per_class.get(label, 0) + 1
        assert per_class == {
            "Douglasie": 146,
            "Buche": 131,
            "Fichte": 126,
            "Roteiche": 80,
            "Esche": 31,
            "Kiefer": 20,
            "Eiche": 18,
        }

    def test_kfold_rerun_identical_file(self, tmp_path):
        path = _manifest_csv(tmp_path, {"a": 11, "b": 7})
        out = tmp_path / "plan.json"
        assert main(["split", str(path), "--k", "3", "--seed", "5", "--out", str(out)]) == 0
        first = out.read_bytes()
        assert main(["split", str(path), "--k", "3", "--seed", "5", "--out", str(out)]) == 0
        assert out.read_bytes() == first

    def test_kfold_passes_recount(self, capsys, tmp_path):
        rng = random.Random(10)
        sizes = {f"c{i}": rng.randint(4, 30) for i in range(5)}
        path = _manifest_csv(tmp_path, sizes)
        code, out, _ = _run(capsys, "split", str(path), "--k", "4", "--seed", "1")
        assert code == 0
        folds = json.loads(out)["folds"]
        assert len(folds) == sum(sizes.values())
        for label, size in sizes.items():
            per_fold = [0] * 4
            for sample_id, fold in folds.items():
                if sample_id.startswith(label + "_"):
                    per_fold[fold] += 1
            assert sum(per_fold) == size
            assert max(per_fold) - min(per_fold) <= 1

    def test_requires_exactly_one_mode(self, capsys, tmp_path):
        path = _manifest_csv(tmp_path, {"a": 4})
        code, _, _ = _run(capsys, "split", str(path))
        assert code == 1
        code, _, _ = _run(capsys, "split", str(path), "--k", "2", "--train-frac", "0.5")
        assert code == 1


def _experiment_dir(tmp_path, models):
    root = tmp_path / "exp"
    for name, (category, accuracy_pairs, meta_values) in models.items():
        model_dir = root / name
        _write_meta(model_dir, name, category=category)
        meta = json.loads((model_dir / "meta.json").read_text(encoding="utf-8"))
        meta.update(meta_values)
        (model_dir / "meta.json").write_text(json.dumps(meta), encoding="utf-8")
        for fold, n_correct in enumerate(accuracy_pairs):
            records = [(f"s{fold}_{i}", "A", "A" if i < n_correct else "B") for i in range(10)]
            _write_fold(model_dir / f"fold_{fold}", records)
    return root


class TestTableCommand:
    def test_single_run_single_row(self, capsys, tmp_path):
        root = _experiment_dir(
            tmp_path, {"m1": ("cat", [7, 8], {"total_params_m": 1.5})}
        )
        code, out, _ = _run(capsys, "table", "--exp-dir", str(root))
        assert code == 0
        body_rows = [l for l in out.splitlines() if l.startswith(("cat", r"\multirow"))]
        assert len(body_rows) == 1
        assert "75.00" in body_rows[0]  # mean of 70% and 80% accuracy

    def test_csv_and_latex_outputs(self, tmp_path):
        root = _experiment_dir(
            tmp_path,
            {
                "m1": ("cat", [7], {"total_params_m": 3.47, "train_params_m": 3.0}),
                "m2": ("cat", [9], {"total_params_m": 0.16, "train_params_m": 0.1}),
            },
        )
        tex = tmp_path / "t.tex"
        csv_path = tmp_path / "t.csv"
        assert (
            main(
                [
                    "table",
                    "--exp-dir",
                    str(root),
                    "--out-latex",
                    str(tex),
                    "--out-csv",
                    str(csv_path),
                ]
            )
            == 0
        )
        tex_text = tex.read_text(encoding="utf-8")
        assert r"\textbf{0.16}" in tex_text
        assert r"\textbf{3.47}" not in tex_text
        assert "m1" in csv_path.read_text(encoding="utf-8")

    def test_custom_columns(self, capsys, tmp_path):
        root = _experiment_dir(tmp_path, {"m1": ("cat", [5], {})})
        columns = tmp_path / "cols.json"
        columns.write_text(
            json.dumps(
                [
                    {"name": "Acc (%)", "key": "accuracy", "better": "higher", "percent": True},
                    {"name": "Kappa", "key": "cohen_kappa", "better": "higher", "decimals": 3},
                ]
            ),
            encoding="utf-8",
        )
        code, out, _ = _run(capsys, "table", "--exp-dir", str(root), "--columns", str(columns))
        assert code == 0
        assert r"Acc (\%)" in out
        assert "50.00" in out

    def test_unknown_column_key_exit_2(self, capsys, tmp_path):
        root = _experiment_dir(tmp_path, {"m1": ("cat", [5], {})})
        columns = tmp_path / "cols.json"
        columns.write_text(json.dumps([{"name": "X", "key": "nope"}]), encoding="utf-8")
        code, _, err = _run(capsys, "table", "--exp-dir", str(root), "--columns", str(columns))
        assert code == 2
        assert "nope" in err

    def test_rerun_byte_identical(self, capsys, tmp_path):
        root = _experiment_dir(
            tmp_path,
            {"m1": ("cat", [7, 3], {}), "m2": ("other", [5], {})},
        )
        _, first, _ = _run(capsys, "table", "--exp-dir", str(root))
        _, second, _ = _run(capsys, "table", "--exp-dir", str(root))
        assert first == second


class TestFewshotCommand:
    def test_constant_episodes(self, capsys, tmp_path):
        path = tmp_path / "eps.json"
        path.write_text(json.dumps([0.5] * 10), encoding="utf-8")
        code, out, _ = _run(capsys, "fewshot", str(path))
        assert code == 0
        assert out.splitlines()[0] == "50.00±0.00"

    def test_two_point_case(self, capsys, tmp_path):
        path = tmp_path / "eps.json"
        path.write_text(json.dumps([0.4, 0.6]), encoding="utf-8")
        code, out, _ = _run(capsys, "fewshot", str(path))
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "50.00±10.00"
        payload = json.loads("\n".join(lines[1:]))
        assert payload["mean"] == pytest.approx(0.5)
        assert payload["std"] == pytest.approx(0.1)

    def test_random_against_oracle(self, capsys, tmp_path):
        rng = random.Random(20)
        values = [round(rng.random(), 4) for _ in range(10)]
        path = tmp_path / "eps.json"
        path.write_text(json.dumps(values), encoding="utf-8")
        code, out, _ = _run(capsys, "fewshot", str(path))
        payload = json.loads("\n".join(out.splitlines()[1:]))
        mean = sum(values) / len(values)
        std = (sum((v - mean) ** 2 for v in values) / len(values)) ** 0.5
        assert payload["mean"] == pytest.approx(mean, abs=1e-12)
        assert payload["std"] == pytest.approx(std, abs=1e-12)

    def test_out_of_range_value_exit_2(self, capsys, tmp_path):
        path = tmp_path / "eps.json"
        path.write_text(json.dumps([0.5, 1.5]), encoding="utf-8")
        code, _, _ = _run(capsys, "fewshot", str(path))
        assert code == 2


class TestConfigResolveCommand:
    def test_resolve_prints_json(self, capsys, tmp_path):
        (tmp_path / "base.yaml").write_text("model:\n  dim: 64\n", encoding="utf-8")
        child = tmp_path / "c.yaml"
        child.write_text("_base_: base.yaml\nmodel:\n  NAME: B\n", encoding="utf-8")
        code, out, _ = _run(capsys, "config", "resolve", str(child))
        assert code == 0
        assert json.loads(out) == {"model": {"dim": 64, "NAME": "B"}}

    def test_cycle_exit_2(self, capsys, tmp_path):
        (tmp_path / "a.yaml").write_text("_base_: b.yaml\n", encoding="utf-8")
        (tmp_path / "b.yaml").write_text("_base_: a.yaml\n", encoding="utf-8")
        code, _, err = _run(capsys, "config", "resolve", str(tmp_path / "a.yaml"))
        assert code == 2
        assert "cycle" in err


class TestExitCodes:
    def test_unknown_subcommand_exit_1(self, capsys):
        code, _, _ = _run(capsys, "frobnicate")
        assert code == 1

    def test_missing_required_flag_exit_1(self, capsys):
        code, _, _ = _run(capsys, "table")
        assert code == 1

    def test_help_exit_0(self, capsys):
        code, out, _ = _run(capsys, "--help")
        assert code == 0
        for name in ("metrics", "compare", "split", "table", "fewshot", "config"):
            assert name in out

    def test_internal_error_exit_3(self, capsys, tmp_path, monkeypatch):
        import foldbench.cli as cli_module

        def boom(*args, **kwargs):
            raise RuntimeError("invariant violated")

        monkeypatch.setattr(cli_module, "summarize", boom)
        path = tmp_path / "p.jsonl"
        path.write_text('{"sample_id":"a","true":"A","pred":"A"}\n', encoding="utf-8")
        code, _, err = _run(capsys, "metrics", str(path))
        assert code == 3
        assert "internal error" in err
