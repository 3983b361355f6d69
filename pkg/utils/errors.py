#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Výjimky laboratoře.
Příkazová řádka podle typu výjimky volí návratový kód.
"""


class LabError(Exception):
    """Společný předek všech chyb laboratoře."""


class ValidationError(LabError, ValueError):
    """Neplatná vstupní data nebo konfigurace."""


class ParseError(ValidationError):
    """Chyba při čtení vstupního souboru s číslem řádku."""

    def __init__(self, message, line=None):
        """
        Inicializace chyby.

        Args:
            message (str): Popis chyby
            line (int, optional): Číslo řádku ve vstupním souboru (od 1, včetně hlavičky)
        """
        if line is not None:
            message = f"řádek {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigurationError(ValidationError):
    """Chybná nebo neúplná konfigurace."""


class ArgumentError(LabError, ValueError):
    """Neplatný argument volání."""


class StateError(LabError, RuntimeError):
    """Operace není v aktuálním stavu objektu povolena."""
