"""Test hamsquare.cli"""

from pathlib import Path

from click.testing import CliRunner

from hamsquare.cli import cli
from hamsquare.graphs.graph import path_graph
from hamsquare.graphs.graph6 import emit_graph6


def test_verify_and_check(fixtures_dir: Path, tmp_path: Path):
    runner = CliRunner()
    corpus = str(fixtures_dir / "biconnected_n4.g6")
    out = tmp_path / "h4.cert"
    result = runner.invoke(cli, ["--corpus", corpus, "--out", str(out), "verify"])
    assert result.exit_code == 0
    assert "instances:      3" in result.output
    assert "certified:      3" in result.output
    assert "contradictions: 0" in result.output
    assert out.read_text().startswith("# hamsquare mode=h-property seed=0 corpus=")

    result = runner.invoke(cli, ["check", str(out)])
    assert result.exit_code == 0
    assert "certified:      3" in result.output


def test_verify_modes(fixtures_dir: Path):
    corpus = str(fixtures_dir / "biconnected_n4.g6")
    result = CliRunner().invoke(cli, ["--corpus", corpus, "--k", "3", "verify", "--mode", "thm3"])
    assert result.exit_code == 0
    assert "instances:      36" in result.output

    result = CliRunner().invoke(cli, ["--corpus", corpus, "verify", "--mode", "h6"])
    assert result.exit_code == 2


def test_counterexample():
    result = CliRunner().invoke(cli, ["counterexample"])
    assert result.exit_code == 0
    assert "absent:         15" in result.output


def test_error_exit(tmp_path: Path):
    corpus = tmp_path / "path.g6"
    corpus.write_text(emit_graph6(path_graph(4)) + "\n")
    result = CliRunner().invoke(cli, ["--corpus", str(corpus), "--k", "2", "verify"])
    assert result.exit_code == 1
    assert "error:          6" in result.output


def test_bad_inputs(fixtures_dir: Path, tmp_path: Path):
    result = CliRunner().invoke(cli, ["--corpus", str(fixtures_dir / "malformed.g6"), "verify"])
    assert result.exit_code == 1
    assert "line 2" in result.output

    bad = tmp_path / "bad.cert"
    bad.write_text("IDX:0\n")
    result = CliRunner().invoke(cli, ["check", str(bad)])
    assert result.exit_code == 1
    assert "line 1" in result.output

    result = CliRunner().invoke(cli, ["--k", "0", "verify"])
    assert result.exit_code == 1
    assert "k must be at least 1" in result.output
