#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Zápis a čtení výstupních CSV souborů (stopy epizod, historie, metriky, souhrny).
Všechny zapisovače používají stejný formát čísel, aby opakovaný běh
se stejnou konfigurací vytvořil bajtově shodné soubory.
"""

import logging
import os

import pandas as pd

from config import CSV_FLOAT_FORMAT
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


def write_csv(rows, filename, columns):
    """
    Zapíše řádky do CSV souboru s pevným pořadím sloupců.

    Args:
        rows: DataFrame nebo seznam slovníků
        filename (str): Cesta k výstupnímu souboru
        columns (list): Pořadí sloupců

    Returns:
        str: Cesta k zapsanému souboru
    """
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ValidationError(f"Chybí sloupce {missing} pro {filename}")

    directory = os.path.dirname(filename)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)

    frame[columns].to_csv(filename, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.debug("Zapsáno %d řádků do %s", len(frame), filename)
    return filename


def read_csv(filename, columns):
    """
    Načte CSV soubor a ověří, že obsahuje očekávané sloupce.

    Args:
        filename (str): Cesta ke vstupnímu souboru
        columns (list): Povinné sloupce

    Returns:
        pd.DataFrame: Načtená data
    """
    if not os.path.isfile(filename):
        raise ValidationError(f"Soubor {filename} neexistuje")
    frame = pd.read_csv(filename)
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ValidationError(f"Soubor {filename} nemá sloupce {missing}")
    return frame


def upsert_csv(rows, filename, columns, keys):
    """
    Sloučí nové řádky do existujícího CSV; řádky se stejným klíčem nahradí.
    Výsledek se seřadí podle klíčů, takže nezáleží na pořadí běhů.

    Args:
        rows (list): Nové řádky jako slovníky
        filename (str): Cesta k CSV souboru
        columns (list): Pořadí sloupců
        keys (list): Sloupce tvořící klíč řádku

    Returns:
        pd.DataFrame: Výsledná tabulka
    """
    new = pd.DataFrame(list(rows), columns=columns)
    if os.path.isfile(filename):
        old = read_csv(filename, columns)[columns]
        frame = pd.concat([old, new], ignore_index=True)
        frame = frame.drop_duplicates(subset=keys, keep="last")
    else:
        frame = new
    frame = frame.sort_values(keys, kind="mergesort").reset_index(drop=True)
    write_csv(frame, filename, columns)
    return frame
