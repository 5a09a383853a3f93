import csv
import json

import pytest

from dyadic_bellman import bellman_forms as bf
from dyadic_bellman.cli import main, parse_depths, parse_grid, UsageError
from dyadic_bellman.tree_lab import StepFunction


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestEval:
    def test_dp(self, capsys):
        code, out, _ = run(capsys, "eval", "--formula", "dp", "--N", "2", "--p", "2", "--F", "2",
                           "--f", "1", "--kappa", "0.5")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "1.875"
        assert "dp_min_form 1.875" in lines and "difference 0.0" in lines

    def test_lp_and_chain(self, capsys):
        assert run(capsys, "eval", "--formula", "lp", "--F", "1", "--f", "1", "--p", "2", "--N", "2")[1] == "1.0\n"
        assert run(capsys, "eval", "--formula", "chain", "--N", "2", "--m", "1", "--q", "3",
                   "--p", "2", "--f", "1")[1] == "4.5\n"

    def test_printed_value_is_library_value(self, capsys):
        _, out, _ = run(capsys, "eval", "--formula", "weak", "--F", "4", "--f", "1", "--p", "2",
                        "--q", "4", "--N", "3")
        assert float(out) == bf.weak_lower(4.0, 1.0, 3, 2.0, 4.0)

    @pytest.mark.parametrize("argv", [
        ("eval",),
        ("eval", "--formula", "dp", "--F", "2", "--f", "1", "--p", "2"),
        ("eval", "--formula", "nope"),
        ("eval", "--formula", "lp", "--F", "0.5", "--f", "1", "--p", "2"),
        ("eval", "--formula", "bq_less", "--f", "1", "--q", "3", "--p", "2"),
        (),
    ])
    def test_usage_errors(self, capsys, argv):
        with pytest.raises(SystemExit) as exc:
            code = main(list(argv))
            raise SystemExit(code)
        assert exc.value.code == 1


class TestSweep:
    def test_rows(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        code, _, _ = run(capsys, "sweep", "--N", "2", "--p", "2", "--F", "2", "--f", "1",
                         "--kappa-grid", "0.25,0.5,1", "--out", str(out))
        rows = list(csv.DictReader(out.open()))
        assert code == 0 and len(rows) == 3
        assert [float(r["dp"]) for r in rows] == [1.0, 1.875, 2.5]

    def test_continuity_across_branch(self, capsys):
        _, out, _ = run(capsys, "sweep", "--N", "2", "--p", "2", "--F", "2", "--f", "1",
                        "--kappa-grid", "0.749999:0.750001:3", "--format", "json")
        vals = [r["dp"] for r in json.loads(out)]
        assert max(vals) - min(vals) < 1e-5

    def test_json_schema(self, capsys):
        _, out, _ = run(capsys, "sweep", "--N", "3", "--p", "2", "--q", "3", "--f", "1", "--L", "1.5",
                        "--F-grid", "1,2", "--kappa-grid", "0.5", "--format", "json")
        data = json.loads(out)
        assert isinstance(data, list) and len(data) == 2
        for r in data:
            assert {"N", "p", "q", "F", "f", "kappa", "lp", "dp", "dp_min", "weak", "bpq", "blq"} <= set(r)

    def test_empty_grid(self, capsys):
        assert run(capsys, "sweep", "--N", "2", "--p", "2", "--f", "1", "--kappa-grid", "0.5")[0] == 1
        assert run(capsys, "sweep", "--N", "2", "--p", "2", "--f", "1", "--F-grid", " ")[0] == 1


class TestVerify:
    def test_campaign_passes(self, capsys, tmp_path):
        out = tmp_path / "v.csv"
        code, _, err = run(capsys, "verify", "--samples", "50", "--N", "2", "--depth", "4", "--p", "2",
                           "--q", "3", "--seed", "7", "--out", str(out))
        assert code == 0
        assert "violations=0" in err
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 50
        assert min(float(r["min_slack"]) for r in rows) >= -1e-9

    def test_degenerate(self, capsys, tmp_path):
        out = tmp_path / "v.csv"
        code, _, _ = run(capsys, "verify", "--samples", "1", "--N", "2", "--depth", "3", "--p", "2",
                         "--q", "3", "--F", "1", "--f", "1", "--out", str(out), "--format", "json")
        rows = json.loads(out.read_text())
        assert code == 0
        assert abs(rows[0]["min_slack"]) <= 1e-12

    def test_corrupted_constant_fails(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify", "--samples", "5", "--N", "2", "--depth", "3", "--p", "2",
                         "--q", "3", "--bound-scale", "1.05", "--out", str(tmp_path / "v.csv"))
        assert code == 2

    def test_projection_failures_reported(self, capsys, tmp_path):
        # F far above anything reachable at depth 1
        code, _, err = run(capsys, "verify", "--samples", "3", "--N", "2", "--depth", "1", "--p", "2",
                           "--q", "3", "--F", "50", "--f", "1", "--out", str(tmp_path / "v.csv"))
        assert "projection_failures=3" in err
        assert code == 3


class TestOracle:
    def test_constant(self, capsys, tmp_path):
        out = tmp_path / "o.csv"
        code, _, _ = run(capsys, "oracle", "--F", "1", "--f", "1", "--N", "2", "--p", "2", "--q", "3",
                         "--depth-list", "1,2", "--budget", "100", "--out", str(out))
        rows = list(csv.DictReader(out.open()))
        assert code == 0 and all(float(r["gap"]) <= 1e-9 for r in rows)

    def test_generic_gap_monotone(self, capsys, tmp_path):
        out = tmp_path / "o.json"
        code, _, err = run(capsys, "oracle", "--F", "3", "--f", "1", "--N", "2", "--p", "2", "--q", "3",
                           "--depth-list", "2-3", "--budget", "200", "--format", "json", "--out", str(out))
        gaps = [r["gap"] for r in json.loads(out.read_text())]
        assert code == 0 and gaps[1] <= gaps[0] + 1e-12
        assert err.count("depth=") == 2

    def test_infeasible_depth(self, capsys):
        code, _, _ = run(capsys, "oracle", "--F", "3", "--f", "1", "--N", "2", "--p", "2", "--q", "3",
                         "--depth-list", "1", "--budget", "50")
        assert code == 1


class TestExtremal:
    def test_chain_file(self, capsys, tmp_path):
        out = tmp_path / "c.json"
        code, _, _ = run(capsys, "extremal", "--construction", "chain", "--N", "2", "--m", "2", "--f", "1",
                         "--format", "json", "--out", str(out))
        data = json.loads(out.read_text())
        assert code == 0
        assert StepFunction.from_dict(data["function"]).leaf_values.tolist() == [4.0, 0.0, 0.0, 0.0]
        assert data["report"]["relative_gap"] == 0.0

    def test_dp_gap_shrinks(self, capsys, tmp_path):
        gaps = []
        for depth in ("4", "6"):
            out = tmp_path / f"d{depth}.json"
            run(capsys, "extremal", "--construction", "dp", "--N", "2", "--F", "2", "--f", "1", "--p", "2",
                "--kappa", "0.5", "--depth", depth, "--format", "json", "--out", str(out))
            gaps.append(json.loads(out.read_text())["report"]["relative_gap"])
        assert gaps[1] <= gaps[0]

    def test_concentrated_constant(self, capsys, tmp_path):
        out = tmp_path / "k.json"
        run(capsys, "extremal", "--construction", "concentrated", "--N", "2", "--m", "1", "--f", "1",
            "--F", "1", "--p", "2", "--format", "json", "--out", str(out))
        leaves = json.loads(out.read_text())["function"]["leaves"]
        assert all(abs(v - 1) < 1e-12 for v in leaves)

    def test_non_n_adic(self, capsys):
        code, _, err = run(capsys, "extremal", "--construction", "dp", "--N", "2", "--F", "2", "--f", "1",
                           "--p", "2", "--kappa", "0.3", "--depth", "6")
        assert code == 1 and "N-adic" in err

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "extremal", "--construction", "chain", "--N", "2", "--m", "1", "--f", "1")
        lines = out.strip().splitlines()
        assert lines[0].startswith("target_value")
        assert StepFunction.from_csv_row(lines[2]).leaf_values.tolist() == [2.0, 0.0]


def test_grid_parsers():
    assert parse_grid("0.1,0.2") == [0.1, 0.2]
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_depths("1-4") == [1, 2, 3, 4]
    assert parse_depths("2,5") == [2, 5]
    with pytest.raises(UsageError):
        parse_grid("")
    with pytest.raises(UsageError):
        parse_grid("a,b")
