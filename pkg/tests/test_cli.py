"""Tests for the dispersion command line.

Usage:
    pytest tests/test_cli.py -v
"""

import json

from cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, parse_and_dispatch


class TestUsage:
    """Argument errors map to exit status 1."""

    def test_unknown_flag(self, capsys):
        """Unknown flags are usage errors."""
        assert parse_and_dispatch(["run", "--n", "5", "--bogus"]) == EXIT_ERROR
        assert "bogus" in capsys.readouterr().err

    def test_missing_command(self):
        """A subcommand is required."""
        assert parse_and_dispatch([]) == EXIT_ERROR

    def test_mc_needs_n(self, capsys):
        """mc without --n or --n-list is refused."""
        assert parse_and_dispatch(["mc", "--trials", "2"]) == EXIT_ERROR
        assert "--n" in capsys.readouterr().err

    def test_invalid_plan(self, capsys):
        """Grid plans with coupling instrumentation fail validation."""
        code = parse_and_dispatch(["mc", "--n", "5", "--graph", "grid2", "--instrument", "coupling"])
        assert code == EXIT_ERROR
        assert "Invalid plan" in capsys.readouterr().err

    def test_help(self, capsys):
        """--help exits cleanly."""
        assert parse_and_dispatch(["--help"]) == EXIT_OK
        assert "lemma" in capsys.readouterr().out


class TestCommands:
    """Each subcommand end to end on small inputs."""

    def test_run(self, capsys):
        """run prints the trial record as JSON."""
        assert parse_and_dispatch(["run", "--n", "20", "--seed", "3"]) == EXIT_OK
        record = json.loads(capsys.readouterr().out.splitlines()[0])
        assert record["n"] == 20
        assert record["seed"] == 3
        assert record["span"] >= 19

    def test_run_trace(self, tmp_path):
        """--trace writes a TSV with headers and one row per step."""
        assert parse_and_dispatch(["run", "--n", "10", "--seed", "1", "--trace", "--out", str(tmp_path)]) == EXIT_OK
        lines = (tmp_path / "trace_n10_s1.tsv").read_text().splitlines()
        assert lines[0].startswith("# {")
        assert lines[2].split("\t")[0] == "t"
        assert lines[3].split("\t")[0] == "0"

    def test_run_capped(self):
        """A capped trial still exits 0 from run."""
        assert parse_and_dispatch(["run", "--n", "30", "--max-steps", "1"]) == EXIT_OK

    def test_mc_writes_files(self, tmp_path, capsys):
        """mc writes its result files under --out."""
        code = parse_and_dispatch([
            "mc", "--n-list", "4,8", "--trials", "3", "--seed", "2", "--jobs", "1", "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert (tmp_path / "records.jsonl").exists()
        assert (tmp_path / "summary.csv").exists()
        assert "n=8" in capsys.readouterr().out

    def test_mc_capped(self):
        """Capped trials make mc exit 2."""
        assert parse_and_dispatch(["mc", "--n", "30", "--max-steps", "2", "--jobs", "1"]) == EXIT_VIOLATION

    def test_couple(self, capsys):
        """couple reports zero domination violations."""
        assert parse_and_dispatch(["couple", "--n", "30", "--seed", "7", "--jobs", "1"]) == EXIT_OK
        assert "violations: 0" in capsys.readouterr().out

    def test_lemma(self, capsys):
        """lemma prints a passing certificate."""
        assert parse_and_dispatch(["lemma", "--C", "1", "--rho", "0.5", "--m", "30", "--eps", "0.5"]) == EXIT_OK
        assert "exact tail" in capsys.readouterr().out

    def test_lemma_json(self, capsys):
        """--json prints the report as JSON."""
        code = parse_and_dispatch(["lemma", "--C", "1", "--rho", "0.5", "--m", "10", "--eps", "1", "--json"])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["passed"] is True

    def test_lemma_invalid(self):
        """rho >= 1 is an argument error."""
        assert parse_and_dispatch(["lemma", "--C", "1", "--rho", "1.5", "--m", "10", "--eps", "0.5"]) == EXIT_ERROR

    def test_shape2d(self, tmp_path, capsys):
        """shape2d prints shape means and writes snapshots."""
        code = parse_and_dispatch([
            "shape2d", "--n", "40", "--trials", "2", "--jobs", "1", "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert "r_max" in capsys.readouterr().out
        assert len(list((tmp_path / "snapshots").iterdir())) == 2
