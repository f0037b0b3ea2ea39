"""End-to-end tests for the pathcalc command line."""

import io
import json

import numpy as np
import pandas as pd
import pytest

from pathcalc import cli
from pathcalc.cli import (
    EXIT_FAILED_CHECKS, EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE, main, parse_seed_range,
)
from pathcalc.errors import InvalidArgument
from pathcalc.verify import IdentityVerifier


def _table(path):
    return pd.read_csv(path)


def test_kono_bracket_through_files(tmp_path):
    path = tmp_path / "kono.csv"
    out = tmp_path / "bracket.csv"
    assert main(["gen", "kono", "-o", str(path)]) == EXIT_OK
    assert main(["bracket", "-i", str(path), "--base", "4", "--depth", "7",
                 "-o", str(out)]) == EXIT_OK
    frame = _table(out)
    np.testing.assert_allclose(frame["bracket"], frame["t"], atol=1e-9)


def test_depth_is_inferred_from_a_uniform_grid(tmp_path):
    path = tmp_path / "kono.csv"
    out = tmp_path / "levels.csv"
    main(["gen", "kono", "-o", str(path)])
    assert main(["bracket", "-i", str(path), "--base", "4", "--per-level",
                 "-o", str(out)]) == EXIT_OK
    frame = _table(out)
    assert list(frame["level"]) == list(range(1, 8))
    np.testing.assert_allclose(frame["s_2"], 1.0, atol=1e-9)


def test_pvar_dominates_level_sums(tmp_path):
    path = tmp_path / "b.csv"
    out = tmp_path / "pvar.csv"
    main(["gen", "brownian", "--depth", "6", "--seed", "1", "-o", str(path)])
    assert main(["pvar", "-i", str(path), "--p", "2", "--depth", "6", "-o", str(out)]) == EXIT_OK
    frame = _table(out)
    assert len(frame) == 6
    assert np.all(frame["v_p"] >= frame["s_p"] - 1e-12)


def test_generated_paths_are_deterministic(capsys):
    main(["gen", "brownian", "--depth", "5", "--seed", "7"])
    first = capsys.readouterr().out
    main(["gen", "brownian", "--depth", "5", "--seed", "7"])
    assert capsys.readouterr().out == first
    assert first.startswith("# style: continuous")


def test_unknown_flag_is_a_usage_error():
    assert main(["bracket", "--bogus"]) == EXIT_USAGE
    assert main(["no-such-command"]) == EXIT_USAGE


def test_malformed_csv_is_reported(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("t,value\n0,0\n1,abc\n")
    assert main(["bracket", "-i", str(path), "--depth", "1"]) == EXIT_USAGE
    assert "row 2" in capsys.readouterr().err


def test_missing_partition_sequence(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("t,value\n0,0\n0.3,1\n0.6,0\n1,0\n")
    assert main(["bracket", "-i", str(path)]) == EXIT_USAGE


def test_binomial_rows_per_seed(capsys):
    assert main(["binomial", "--m", "2", "--seeds", "0:3", "--format", "json"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert [row["seed"] for row in rows] == [0, 1, 2]
    assert all(row["m"] == 2 for row in rows)


def test_step_path_as_json(capsys):
    assert main(["gen", "step", "--jumps", "0.25:0.5,0.5:-0.3", "--depth", "3",
                 "--format", "json"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert [row["value"] for row in rows][-1] == pytest.approx(0.2)


def test_doleans_of_step_path_from_stdin(monkeypatch, capsys):
    text = "# style: cadlag-step\nt,value\n0,0\n0.25,0\n0.5,0.5\n0.75,0.5\n1,0.5\n"
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    assert main(["doleans", "-i", "-", "--depth", "2"]) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    np.testing.assert_allclose(frame["E"], [1.0, 1.0, 1.5, 1.5, 1.5])
    np.testing.assert_allclose(frame["residual"], 0.0, atol=1e-12)


def test_parse_seed_range():
    assert parse_seed_range("2:5") == (2, 3, 4)
    assert parse_seed_range("9") == (9,)
    for bad in ("5:2", "a:b", "-1:3"):
        with pytest.raises(InvalidArgument):
            parse_seed_range(bad)


def test_verify_selected_checks(capsys):
    assert main(["verify", "--quick", "--only", "pde-residual,kono-exactness"]) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert set(frame["check"]) == {"pde-residual", "kono-exactness"}
    assert frame["passed"].all()


def test_verify_unknown_check_is_a_usage_error():
    assert main(["verify", "--only", "no-such-check"]) == EXIT_USAGE


def test_failed_checks_and_crashes_have_distinct_exit_codes(monkeypatch):
    assert EXIT_FAILED_CHECKS != EXIT_UNEXPECTED
    monkeypatch.setattr(IdentityVerifier, "check_pde", lambda self: (False, "forced"))
    assert main(["verify", "--only", "pde-residual"]) == EXIT_FAILED_CHECKS

    def boom(args, config):
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.COMMANDS, "bracket", boom)
    assert main(["bracket", "--depth", "1"]) == EXIT_UNEXPECTED


def test_skeleton_and_binomial_commands(capsys):
    assert main(["gen", "skeleton", "--m", "2", "--seed", "3", "--format", "json"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    levels = np.array([row["level"] for row in rows])
    np.testing.assert_allclose(np.abs(np.diff(levels)), 0.25)
    assert main(["binomial", "--m", "3", "--seed", "1", "--price-path"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("# style: cadlag-step")


@pytest.mark.slow
def test_full_quick_verification():
    assert main(["verify", "--quick"]) == EXIT_OK
