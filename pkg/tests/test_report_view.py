#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy textových výstupů pro konzoli.
"""

import pandas as pd

from controller.experiment_controller import RunSummary
from view.report_view import format_comparison, format_run_summary, format_table


def test_empty_table():
    """Prázdná tabulka má zástupný text."""
    assert format_table([], ["a", "b"], "Nadpis") == "Nadpis\n(žádné řádky)"


def test_comparison_shows_signed_gain():
    """Relativní zisk se zobrazí se znaménkem, NaN jako pomlčka."""
    frame = pd.DataFrame([
        {"name": "a", "mean_reward": 100.0, "std_reward": 0.0, "relative_gain": 60.41,
         "activity": 3.0, "compute_seconds": 1.0},
        {"name": "b", "mean_reward": 0.0, "std_reward": 0.0, "relative_gain": float("nan"),
         "activity": 0.0, "compute_seconds": 1.0},
    ])
    text = format_comparison(frame)
    assert "+60.4 %" in text
    assert text.splitlines()[0] == "Porovnání běhů"


def test_run_summary_lists_seeds():
    """Souhrn běhu vypíše každé semínko."""
    summary = RunSummary("lab", "dp", {2: 10.0, 1: 1234.5}, 4.0, 2.0, 24, "runs/lab-abc")
    lines = format_run_summary(summary).splitlines()
    assert lines[0] == "Běh lab (dp): runs/lab-abc"
    assert lines[-2:] == ["  semínko 1: 1 234.50", "  semínko 2: 10.00"]
