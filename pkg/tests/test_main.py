#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy příkazové řádky: podpříkazy a návratové kódy.
"""

import os

import pandas as pd

from main import build_parser, main


def _write_ini(path):
    path.write_text("\n".join([
        "[data]",
        "synthetic=true",
        "[synthetic]",
        "length_hours=300",
        "[experiment]",
        "name=oracle",
        "episode_hours=24",
        "[dp]",
        "resolution=61",
        "",
    ]), encoding="utf-8")
    return str(path)


def test_parser_knows_all_commands():
    """Parser obsahuje všechny podpříkazy."""
    parser = build_parser()
    for argv in (["ingest"], ["generate-data"], ["train-forecaster"], ["eval-forecaster"],
                 ["train-dqn"], ["run-cem"], ["run-oracle", "--kind", "dp"], ["report", "runs/a"],
                 ["sweep"]):
        assert parser.parse_args(argv).command == argv[0]


def test_generate_data(tmp_path, capsys):
    """generate-data zapíše řadu se sloupcem špiček a skončí kódem 0."""
    assert main(["--out", str(tmp_path), "--seed", "5", "generate-data", "--hours", "48",
                 "--spike-rate", "0.1"]) == 0
    frame = pd.read_csv(tmp_path / "synthetic.csv")
    assert len(frame) == 48
    assert list(frame.columns) == ["timestamp", "price", "demand", "spike"]
    assert "záznamů: 48" in capsys.readouterr().out


def test_ingest_roundtrip(tmp_path):
    """ingest přečte vygenerovanou řadu a zapíše ji bez sloupce špiček."""
    assert main(["--out", str(tmp_path), "generate-data", "--hours", "30"]) == 0
    assert main(["--out", str(tmp_path), "ingest", "--input", str(tmp_path / "synthetic.csv")]) == 0
    frame = pd.read_csv(tmp_path / "market.csv")
    assert list(frame.columns) == ["timestamp", "price", "demand"]
    assert len(frame) == 30


def test_missing_config_is_validation_exit(tmp_path, capsys):
    """Neexistující konfigurační soubor skončí kódem 1 a zprávou na stderr."""
    assert main(["--config", str(tmp_path / "missing.ini"), "generate-data"]) == 1
    assert "missing.ini" in capsys.readouterr().err


def test_bad_arguments_exit_code():
    """Neznámý podpříkaz je chyba validace, --version skončí úspěšně."""
    assert main(["fly"]) == 1
    assert main(["--version"]) == 0


def test_oracle_then_report(tmp_path):
    """run-oracle vytvoří běh, report ho porovná a zapíše comparison.csv."""
    ini = _write_ini(tmp_path / "lab.ini")
    runs = tmp_path / "runs"
    assert main(["--config", ini, "--out", str(runs), "run-oracle", "--kind", "dp"]) == 0
    run_dirs = [os.path.join(runs, name) for name in os.listdir(runs) if name.startswith("oracle-")]
    assert len(run_dirs) == 1

    report = tmp_path / "report"
    assert main(["--out", str(report), "report", run_dirs[0]]) == 0
    comparison = pd.read_csv(report / "comparison.csv")
    assert comparison["name"].tolist() == ["oracle"]
    assert comparison["mean_reward"].iloc[0] >= 0.0


def test_report_on_missing_run(tmp_path):
    """Porovnání neexistujícího běhu skončí kódem 1."""
    assert main(["report", str(tmp_path / "nothing")]) == 1
