#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Načítání konfigurace experimentů z INI souborů.

Soubor čte QSettings ve formátu INI. Tečkové klíče odpovídají sekcím
(`battery.capacity_mwh` je klíč `capacity_mwh` v sekci `[battery]`),
klíče bez sekce patří do `[General]`. Seznamy se zapisují s čárkami.
"""

import copy
import logging
import os

from PySide6.QtCore import QSettings

from config import DEFAULT_OPTIONS, FREE_FORM_SECTIONS
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

_TRUE_WORDS = ("true", "1", "yes", "on")
_FALSE_WORDS = ("false", "0", "no", "off")


def split_list(raw):
    """Rozdělí hodnotu z INI na seznam řetězců (toleruje hranaté závorky)."""
    if isinstance(raw, (list, tuple)):
        items = [str(item) for item in raw]
    else:
        items = str(raw).split(",")
    items = [item.strip() for item in items]
    if items:
        items[0] = items[0].lstrip("[").strip()
        items[-1] = items[-1].rstrip("]").strip()
    return [item for item in items if item]


def convert_value(key, raw, default):
    """
    Převede hodnotu z INI souboru na typ výchozí hodnoty.

    Args:
        key (str): Tečkový klíč (pro chybovou zprávu)
        raw: Hodnota vrácená QSettings (řetězec nebo seznam řetězců)
        default: Výchozí hodnota, jejíž typ se použije

    Returns:
        Převedená hodnota

    Raises:
        ConfigurationError: Hodnotu nelze převést
    """
    try:
        if isinstance(default, bool):
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in _TRUE_WORDS:
                return True
            if text in _FALSE_WORDS:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(str(raw).strip())
        if isinstance(default, float):
            return float(str(raw).strip())
        if isinstance(default, list):
            item_type = type(default[0]) if default else str
            return [item_type(item) for item in split_list(raw)]
        # Řetězec s čárkou vrací QSettings jako seznam, spojíme ho zpět
        if isinstance(raw, (list, tuple)):
            return ", ".join(str(item) for item in raw)
        return str(raw).strip()
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Klíč {key}: nelze převést hodnotu {raw!r} ({e})") from e


class ConfigModel:
    """Konfigurace experimentu: výchozí hodnoty přepsané obsahem INI souboru."""

    def __init__(self, path=None, overrides=None):
        """
        Inicializace konfigurace.

        Args:
            path (str, optional): Cesta k INI souboru
            overrides (dict, optional): Tečkové klíče, které přepíší hodnoty ze souboru
        """
        self.path = path
        self.options = copy.deepcopy(DEFAULT_OPTIONS)
        self.sections = {section: {} for section in FREE_FORM_SECTIONS}

        if path:
            self._load(path)

        for key, value in (overrides or {}).items():
            self.set(key, value)

    @classmethod
    def from_dict(cls, data):
        """
        Vytvoří konfiguraci ze slovníku tečkových klíčů (výstup as_dict).

        Args:
            data (dict): Tečkové klíče včetně volných sekcí

        Returns:
            ConfigModel: Nová konfigurace
        """
        model = cls()
        for key, value in data.items():
            section, _, rest = key.partition(".")
            if section in model.sections and rest:
                model.sections[section][rest] = value
            else:
                model.set(key, value)
        return model

    def _load(self, path):
        """Načte INI soubor přes QSettings."""
        if not os.path.isfile(path):
            raise ConfigurationError(f"Konfigurační soubor {path} neexistuje")

        settings = QSettings(path, QSettings.Format.IniFormat)
        if settings.status() != QSettings.Status.NoError:
            raise ConfigurationError(f"Konfigurační soubor {path} nelze přečíst")

        for settings_key in settings.allKeys():
            dotted = settings_key.replace("/", ".")
            raw = settings.value(settings_key)
            section, _, rest = dotted.partition(".")

            if section in self.sections and rest:
                self.sections[section][rest] = raw
            elif dotted in DEFAULT_OPTIONS:
                self.options[dotted] = convert_value(dotted, raw, DEFAULT_OPTIONS[dotted])
            else:
                logger.warning("Neznámý klíč konfigurace %s v %s, ignoruji", dotted, path)

    def get(self, key):
        """
        Vrací hodnotu tečkového klíče.

        Args:
            key (str): Např. `battery.capacity_mwh`

        Returns:
            Hodnota klíče
        """
        if key not in self.options:
            raise ConfigurationError(f"Neznámý klíč konfigurace: {key}")
        return self.options[key]

    def set(self, key, value):
        """
        Nastaví hodnotu klíče; textové hodnoty se převedou jako při čtení souboru.

        Args:
            key (str): Tečkový klíč
            value: Nová hodnota
        """
        if key not in DEFAULT_OPTIONS:
            raise ConfigurationError(f"Neznámý klíč konfigurace: {key}")
        default = DEFAULT_OPTIONS[key]
        if isinstance(value, str) and not isinstance(default, str):
            value = convert_value(key, value, default)
        self.options[key] = value

    def section(self, name):
        """Vrací volnou sekci (např. `checkpoints`) jako slovník řetězců."""
        return dict(self.sections.get(name, {}))

    def as_dict(self):
        """Vrací kopii všech voleb včetně volných sekcí."""
        data = copy.deepcopy(self.options)
        for name, values in self.sections.items():
            for key, value in values.items():
                data[f"{name}.{key}"] = value
        return data
