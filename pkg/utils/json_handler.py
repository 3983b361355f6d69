#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Utility pro práci s JSON soubory (kontrolní body sítí, metadata běhů).
"""

import hashlib
import json
import logging
import os

import numpy as np

logger = logging.getLogger(__name__)


def save_to_json(data, filename, indent=2, ensure_ascii=False):
    """
    Uloží data do JSON souboru.

    Args:
        data: Data k uložení (slovník nebo seznam)
        filename (str): Cesta k výstupnímu souboru
        indent (int): Odsazení pro formátování JSON (None pro kompaktní formát)
        ensure_ascii (bool): Zda použít pouze ASCII znaky

    Returns:
        bool: True, pokud se uložení podařilo, jinak False
    """
    try:
        # Vytvoření adresáře, pokud neexistuje
        directory = os.path.dirname(filename)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)

        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(data, f, ensure_ascii=ensure_ascii, indent=indent, cls=NumpyEncoder)
            f.write("\n")
        return True
    except (OSError, TypeError, ValueError) as e:
        logger.error("Chyba při ukládání do JSON souboru %s: %s", filename, e)
        return False


def load_from_json(filename):
    """
    Načte data z JSON souboru.

    Args:
        filename (str): Cesta ke vstupnímu souboru

    Returns:
        tuple: (data, chyba) - data nebo None v případě chyby, chyba je None nebo chybová zpráva
    """
    try:
        if not os.path.exists(filename):
            return None, f"Soubor {filename} neexistuje"

        with open(filename, 'r', encoding='utf-8') as f:
            data = json.load(f)
        return data, None
    except json.JSONDecodeError as e:
        return None, f"Chyba při dekódování JSON: {str(e)}"
    except OSError as e:
        return None, f"Chyba při načítání z JSON souboru: {str(e)}"


def content_hash(data, length=None):
    """
    Vypočítá SHA-256 hash obsahu libovolné JSON-serializovatelné struktury.
    Klíče se řadí, takže pořadí vložení hash neovlivní.

    Args:
        data: Data k zahashování
        length (int, optional): Délka vráceného hexadecimálního řetězce

    Returns:
        str: Hexadecimální řetězec hash hodnoty
    """
    payload = json.dumps(data, sort_keys=True, cls=NumpyEncoder, ensure_ascii=True)
    digest = hashlib.sha256(payload.encode('utf-8')).hexdigest()
    return digest[:length] if length else digest


class NumpyEncoder(json.JSONEncoder):
    """JSON encoder s podporou pro numpy typy."""

    def default(self, obj):
        """Převede objekty na serializovatelný formát."""
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        return super().default(obj)
