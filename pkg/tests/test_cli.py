import json
import textwrap

import pytest

from infoloss.cli import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, main

OK_CONFIG = textwrap.dedent("""
    [alphabets.bits]
    ring = "mod-2"

    [source]
    kind = "iid"
    alphabet = "bits"
    probs = [0.5, 0.5]

    [[systems]]
    kind = "xor-filter"

    [[analyses]]
    kind = "loss-report"
    max_block = 6
    tolerance = 1e-6

    [[analyses]]
    kind = "round-trip"
    length = 20
    sequences = 2
""")


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "xor.toml"
    p.write_text(OK_CONFIG)
    return str(p)


def test_analyze_json_and_exit_zero(cfg_path, capsys):
    assert main(["analyze", cfg_path]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] is True
    assert [a["kind"] for a in rep["analyses"]] == ["loss-report", "round-trip"]


def test_analyze_text_and_out_file(cfg_path, tmp_path, capsys):
    out = tmp_path / "report.txt"
    assert main(["analyze", cfg_path, "--format", "text", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    body = out.read_text()
    assert "[analysis loss-report]  PASS" in body


def test_analyze_is_byte_identical_across_runs(cfg_path, capsys):
    main(["analyze", cfg_path])
    first = capsys.readouterr().out
    main(["analyze", cfg_path])
    assert capsys.readouterr().out == first
    main(["analyze", cfg_path, "--timing"])
    assert "wall_time_s" in capsys.readouterr().out


def test_analyze_bad_config_exits_two(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[source]\nkind = 'iid'\n")
    assert main(["analyze", str(p)]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err
    assert main(["analyze", str(tmp_path / "missing.toml")]) == EXIT_ERROR
    capsys.readouterr()


def test_env_caps_are_validated(cfg_path, capsys, monkeypatch):
    monkeypatch.setenv("INFOLOSS_STATE_CAP", "not-a-number")
    assert main(["analyze", cfg_path]) == EXIT_ERROR
    assert "INFOLOSS_STATE_CAP" in capsys.readouterr().err
    monkeypatch.setenv("INFOLOSS_STATE_CAP", "2")
    assert main(["analyze", cfg_path]) == EXIT_ERROR
    assert "ResourceLimitError" in capsys.readouterr().err
    monkeypatch.setenv("INFOLOSS_STATE_CAP", "100000")
    assert main(["analyze", cfg_path]) == EXIT_OK
    capsys.readouterr()


def test_suite_subcommand(capsys):
    assert main(["suite", "dpi", "--seed", "2", "--instances", "2"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["suite"] == "dpi" and rep["ok"] is True
    assert main(["suite", "zoo-all", "--instances", "1", "--format", "text"]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_roundtrip_subcommand(cfg_path, capsys):
    assert main(["roundtrip", cfg_path, "--format", "text"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out == "roundtrip PASS: 2 sequence(s) of length 20\n"
    assert main(["roundtrip", cfg_path, "--length", "40", "--sequences", "3"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["analyses"][0]["length"] == 40
    assert rep["analyses"][0]["sequences"] == 3


def test_roundtrip_refuses_lossy_config(tmp_path, capsys):
    p = tmp_path / "sq.toml"
    p.write_text(textwrap.dedent("""
        [alphabets.signs]
        symbols = ["-1", "0", "1"]
        [source]
        kind = "iid"
        alphabet = "signs"
        probs = [0.25, 0.5, 0.25]
        [[systems]]
        kind = "squarer"
    """))
    assert main(["roundtrip", str(p)]) == EXIT_ERROR
    assert "AnalysisUnsupportedError" in capsys.readouterr().err


def test_filter_subcommand(capsys):
    assert main(["filter", "--b", "1", "-2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "rate change (roots):    0.693147181 nats" in out
    assert "not minimum-phase" in out
    assert "cross-check: PASS" in out
    assert main(["filter", "--b", "1", "-1"]) == EXIT_ERROR
    assert "NumericError" in capsys.readouterr().err
    assert main(["filter", "--b", "4", "--a", "0.5", "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["analyses"][0]["minimum_phase"] is True


def test_usage_errors(capsys):
    with pytest.raises(SystemExit):
        main([])
    with pytest.raises(SystemExit):
        main(["suite", "not-a-suite"])
    capsys.readouterr()
