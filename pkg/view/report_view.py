#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Textové výstupy pro konzoli: tabulky porovnání, metrik prognóz a souhrnů běhů.
"""

import numpy as np
import pandas as pd

from config import COMPARISON_COLUMNS, METRICS_COLUMNS


def _format_number(value):
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "-"
        return f"{value:,.2f}".replace(",", " ")
    return str(value)


def format_table(rows, columns, title=None):
    """
    Naformátuje řádky jako zarovnanou textovou tabulku.

    Args:
        rows: DataFrame nebo seznam slovníků
        columns (list): Zobrazené sloupce v pořadí
        title (str, optional): Nadpis nad tabulkou

    Returns:
        str: Tabulka
    """
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    if frame.empty:
        body = "(žádné řádky)"
    else:
        body = frame[columns].to_string(index=False, formatters={c: _format_number for c in columns})
    return f"{title}\n{body}" if title else body


def format_comparison(frame):
    """Tabulka porovnání běhů; relativní zisk se zobrazí se znaménkem a procenty."""
    shown = frame.copy()
    shown["relative_gain"] = [
        "-" if np.isnan(value) else f"{value:+.1f} %" for value in shown["relative_gain"]
    ]
    return format_table(shown, COMPARISON_COLUMNS, "Porovnání běhů")


def format_metrics(rows, title="Metriky prognóz"):
    """Tabulka metrik prognóz (horizont, druh, RMSE, MAE, MAPE, parametry)."""
    return format_table(rows, METRICS_COLUMNS, title)


def format_run_summary(summary):
    """
    Krátký souhrn běhu experimentu.

    Args:
        summary (RunSummary): Souhrn přes semínka

    Returns:
        str: Několik řádků textu
    """
    lines = [
        f"Běh {summary.name} ({summary.kind}): {summary.run_dir}",
        f"  průměrná odměna: {_format_number(summary.mean)} ± {_format_number(summary.std)}",
        f"  aktivita: {_format_number(summary.activity)} za {summary.episode_length} kroků",
        f"  výpočetní čas: {summary.compute_seconds:.1f} s",
    ]
    for seed, reward in sorted(summary.rewards.items()):
        lines.append(f"  semínko {seed}: {_format_number(reward)}")
    return "\n".join(lines)


def format_series_summary(series, path):
    """Souhrn tržní řady po načtení nebo vygenerování."""
    prices = series.prices
    lines = [
        f"Řada zapsána do {path}",
        f"  záznamů: {len(series)} ({series.timestamps[0].isoformat()} až {series.timestamps[-1].isoformat()})",
        f"  cena: min {_format_number(float(prices.min()))}, průměr {_format_number(float(prices.mean()))}, "
        f"max {_format_number(float(prices.max()))}",
    ]
    for name in ("train", "validation", "test"):
        start, end = series.segment(name)
        lines.append(f"  {name}: [{start}, {end})")
    return "\n".join(lines)


def format_sweep(result):
    """Tabulka buněk mřížky a nejlepší nastavení."""
    table = format_table(result.rows, ["cell", "overrides", "mean_reward"], "Prohledávání mřížky")
    return f"{table}\nNejlepší: {result.best_overrides} (průměrná odměna {_format_number(result.best_reward)})"
