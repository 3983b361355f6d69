#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy porovnání běhů.
"""

import logging
import math
import os

import pandas as pd
import pytest

from config import SUMMARY_COLUMNS, TIMING_COLUMNS
from controller.report_controller import compare_report, load_run, relative_gain
from utils.csv_io import write_csv
from utils.errors import ValidationError


def _write_run(root, name, rewards, length=24, timing=True):
    run_dir = os.path.join(str(root), name)
    rows = [{"name": name, "kind": "dqn", "seed": seed, "reward": reward, "activity": 10,
             "episode_length": length} for seed, reward in enumerate(rewards, start=1)]
    write_csv(rows, os.path.join(run_dir, "summary.csv"), SUMMARY_COLUMNS)
    if timing:
        write_csv([{"name": name, "kind": "dqn", "compute_seconds": 1.5}] * len(rewards),
                  os.path.join(run_dir, "timing.csv"), TIMING_COLUMNS)
    return run_dir


def test_relative_gain():
    """Zisk v procentech vůči základu; vůči sobě nula; nulový základ dá NaN."""
    assert relative_gain(547_000.0, 341_000.0) == pytest.approx(60.41, abs=0.01)
    assert relative_gain(341_000.0, 341_000.0) == 0.0
    assert relative_gain(-50.0, -100.0) == pytest.approx(50.0)
    assert math.isnan(relative_gain(10.0, 0.0))


def test_load_run_aggregates_seeds(tmp_path):
    """Průměr, odchylka (ddof 0) a součet výpočetního času přes semínka."""
    run = load_run(_write_run(tmp_path, "dqn-perfect", [100.0, 300.0]))
    assert run["mean_reward"] == 200.0
    assert run["std_reward"] == 100.0
    assert run["compute_seconds"] == 3.0
    assert run["episode_length"] == [24]


def test_load_run_without_timing(tmp_path, caplog):
    """Bez timing.csv je výpočetní čas NaN a zaloguje se varování."""
    run_dir = _write_run(tmp_path, "cem", [5.0], timing=False)
    with caplog.at_level(logging.WARNING):
        run = load_run(run_dir)
    assert math.isnan(run["compute_seconds"])
    assert "timing.csv" in caplog.text


def test_missing_run_dir_names_path(tmp_path):
    """Chybějící adresář je chyba validace s cestou ve zprávě."""
    missing = str(tmp_path / "nowhere")
    with pytest.raises(ValidationError, match="nowhere"):
        load_run(missing)
    os.makedirs(tmp_path / "empty")
    with pytest.raises(ValidationError, match="summary.csv"):
        load_run(str(tmp_path / "empty"))


def test_compare_against_first_run(tmp_path):
    """Výchozím základem je první běh; tabulka se zapíše do comparison.csv."""
    base = _write_run(tmp_path, "dqn-none", [341_000.0])
    better = _write_run(tmp_path, "dqn-perfect", [547_000.0])
    frame = compare_report([base, better], output_dir=str(tmp_path / "report"))
    assert frame["name"].tolist() == ["dqn-none", "dqn-perfect"]
    assert frame["relative_gain"].tolist() == pytest.approx([0.0, 60.41], abs=0.01)
    assert os.path.isfile(tmp_path / "report" / "comparison.csv")


def test_compare_writes_next_to_runs_by_default(tmp_path):
    """Bez výstupního adresáře se comparison.csv zapíše do společného nadřazeného adresáře běhů."""
    first = _write_run(tmp_path / "runs", "a", [100.0])
    second = _write_run(tmp_path / "runs", "b", [150.0])
    compare_report([first, second])
    written = pd.read_csv(tmp_path / "runs" / "comparison.csv")
    assert written["name"].tolist() == ["a", "b"]
    assert written["relative_gain"].tolist() == pytest.approx([0.0, 50.0])


def test_compare_named_baseline(tmp_path):
    """Základ lze zvolit jménem; neznámý základ je chyba validace."""
    first = _write_run(tmp_path, "a", [100.0])
    second = _write_run(tmp_path, "b", [50.0])
    frame = compare_report([first, second], baseline="b")
    assert frame["relative_gain"].tolist() == pytest.approx([100.0, 0.0])
    with pytest.raises(ValidationError):
        compare_report([first, second], baseline="c")


def test_compare_warns_on_length_mismatch(tmp_path, caplog):
    """Různé délky epizod porovnání nezastaví, jen se zaloguje varování."""
    first = _write_run(tmp_path, "a", [100.0], length=24)
    second = _write_run(tmp_path, "b", [120.0], length=48)
    with caplog.at_level(logging.WARNING):
        frame = compare_report([first, second])
    assert len(frame) == 2
    assert "délky epizod" in caplog.text


def test_zero_baseline_gives_nan(tmp_path, caplog):
    """Nulový základ dá NaN zisky a varování."""
    first = _write_run(tmp_path, "idle", [0.0])
    second = _write_run(tmp_path, "b", [10.0])
    with caplog.at_level(logging.WARNING):
        frame = compare_report([first, second])
    assert frame["relative_gain"].isna().all()
    assert "nulovou" in caplog.text
