#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Controller pro porovnání dokončených běhů experimentů.
"""

import logging
import os

import numpy as np
import pandas as pd

from config import COMPARISON_COLUMNS, SUMMARY_COLUMNS, TIMING_COLUMNS
from utils.csv_io import read_csv, write_csv
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


def relative_gain(candidate, baseline):
    """
    Relativní zisk kandidáta vůči základu v procentech.

    Args:
        candidate (float): Průměrná odměna kandidáta
        baseline (float): Průměrná odměna základu

    Returns:
        float: (kandidát − základ) / |základ| · 100, NaN při nulovém základu
    """
    if baseline == 0:
        return float("nan")
    return (candidate - baseline) / abs(baseline) * 100.0


def load_run(run_dir):
    """
    Načte souhrn jednoho běhu.

    Args:
        run_dir (str): Adresář běhu

    Returns:
        dict: Řádek porovnání bez relativního zisku a délka epizody
    """
    summary_path = os.path.join(run_dir, "summary.csv")
    if not os.path.isdir(run_dir):
        raise ValidationError(f"Adresář běhu {run_dir} neexistuje")
    if not os.path.isfile(summary_path):
        raise ValidationError(f"Adresář běhu {run_dir} neobsahuje summary.csv")

    summary = read_csv(summary_path, SUMMARY_COLUMNS)
    if summary.empty:
        raise ValidationError(f"Soubor {summary_path} neobsahuje žádné semínko")

    timing_path = os.path.join(run_dir, "timing.csv")
    if os.path.isfile(timing_path):
        compute_seconds = float(read_csv(timing_path, TIMING_COLUMNS)["compute_seconds"].sum())
    else:
        logger.warning("Běh %s nemá timing.csv, výpočetní čas chybí", run_dir)
        compute_seconds = float("nan")

    rewards = summary["reward"].to_numpy(dtype=np.float64)
    lengths = sorted(set(summary["episode_length"].astype(int)))
    return {
        "name": str(summary["name"].iloc[0]),
        "mean_reward": float(rewards.mean()),
        "std_reward": float(rewards.std()),
        "activity": float(summary["activity"].mean()),
        "compute_seconds": compute_seconds,
        "episode_length": lengths,
        "run_dir": run_dir,
    }


def _find_baseline(runs, baseline):
    if baseline is None or baseline == "":
        return runs[0]
    for run in runs:
        if baseline in (run["name"], run["run_dir"]) or os.path.normpath(baseline) == os.path.normpath(run["run_dir"]):
            return run
    raise ValidationError(f"Základní běh {baseline} není mezi porovnávanými běhy")


def _common_parent(run_dirs):
    parents = [os.path.dirname(os.path.abspath(os.path.normpath(run_dir))) for run_dir in run_dirs]
    try:
        return os.path.commonpath(parents)
    except ValueError:
        return os.getcwd()


def compare_report(run_dirs, baseline=None, output_dir=None):
    """
    Porovná běhy: průměr a odchylku odměny, relativní zisk vůči základu,
    aktivitu a výpočetní čas.

    Args:
        run_dirs (list): Adresáře běhů
        baseline (str, optional): Jméno nebo adresář základního běhu (jinak první)
        output_dir (str, optional): Kam zapsat comparison.csv (jinak společný
            nadřazený adresář běhů, případně aktuální adresář)

    Returns:
        pd.DataFrame: Tabulka porovnání
    """
    if not run_dirs:
        raise ValidationError("Porovnání vyžaduje alespoň jeden běh")
    runs = [load_run(run_dir) for run_dir in run_dirs]

    lengths = {length for run in runs for length in run["episode_length"]}
    if len(lengths) > 1:
        logger.warning("Běhy mají různé délky epizod %s, porovnání nemusí být férové", sorted(lengths))

    base = _find_baseline(runs, baseline)
    if base["mean_reward"] == 0:
        logger.warning("Základní běh %s má nulovou průměrnou odměnu, relativní zisk nelze určit", base["name"])
    for run in runs:
        run["relative_gain"] = relative_gain(run["mean_reward"], base["mean_reward"])

    frame = pd.DataFrame(runs, columns=COMPARISON_COLUMNS)
    output_dir = output_dir or _common_parent(run_dirs)
    write_csv(frame, os.path.join(output_dir, "comparison.csv"), COMPARISON_COLUMNS)
    logger.info("Porovnání %d běhů zapsáno do %s", len(runs), output_dir)
    return frame
