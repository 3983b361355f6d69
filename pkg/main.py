#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Vstupní bod aplikace Battery Arbitrage Lab.
Zpracuje argumenty příkazové řádky a předá řízení hlavnímu controlleru.
"""

import argparse
import logging
import sys

from PySide6.QtCore import QCoreApplication

from config import APP_NAME, APP_VERSION, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, FORECASTER_KINDS, LOG_FORMAT, SEGMENTS
from controller.app_controller import AppController
from utils.errors import ArgumentError, ValidationError

logger = logging.getLogger(__name__)


def build_parser():
    """Sestaví parser argumentů se všemi podpříkazy."""
    parser = argparse.ArgumentParser(prog="battery-lab", description="Laboratoř bateriové arbitráže")
    parser.add_argument("--config", help="konfigurační INI soubor")
    parser.add_argument("--seed", type=int, help="semínko (přepíše experiment.seeds a train.seed)")
    parser.add_argument("--out", help="výstupní adresář")
    parser.add_argument("--verbose", "-v", action="store_true", help="podrobné logování")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    ingest = commands.add_parser("ingest", help="načte a ověří CSV s tržními daty")
    ingest.add_argument("--input", help="vstupní CSV (jinak data.path)")
    ingest.add_argument("--output", default="market.csv", help="výstupní CSV")
    ingest.add_argument("--fill-gaps", action="store_true", help="doplnit chybějící hodiny")

    generate = commands.add_parser("generate-data", help="vygeneruje syntetickou řadu cen")
    generate.add_argument("--hours", type=int, help="délka řady v hodinách")
    generate.add_argument("--spike-rate", type=float, help="pravděpodobnost cenové špičky za hodinu")
    generate.add_argument("--output", default="synthetic.csv", help="výstupní CSV")

    train = commands.add_parser("train-forecaster", help="natrénuje prognózy ceny")
    train.add_argument("--horizon", help="horizont, seznam horizontů nebo skupina (short, middle, long, all)")
    train.add_argument("--kind", choices=FORECASTER_KINDS + ["all"], help="druh prognózy")

    evaluate = commands.add_parser("eval-forecaster", help="vyhodnotí uložené prognózy")
    evaluate.add_argument("--checkpoint", action="append", help="kontrolní bod (lze opakovat)")
    evaluate.add_argument("--horizon", help="horizonty ze sekce [checkpoints]")
    evaluate.add_argument("--segment", choices=SEGMENTS, default="test", help="vyhodnocovaná část řady")

    dqn = commands.add_parser("train-dqn", help="natrénuje DQN agenta")
    dqn.add_argument("--seeds", type=int, help="počet semínek 1..N")
    dqn.add_argument("--episodes", type=int, help="počet tréninkových epizod")

    cem = commands.add_parser("run-cem", help="metoda křížové entropie")
    cem.add_argument("--seeds", type=int, help="počet semínek 1..N")

    oracle = commands.add_parser("run-oracle", help="orákulum s dokonalou znalostí cen")
    oracle.add_argument("--kind", choices=["mpc-ga", "dp"], required=True, help="druh orákula")
    oracle.add_argument("--seeds", type=int, help="počet semínek 1..N")

    report = commands.add_parser("report", help="porovná dokončené běhy")
    report.add_argument("runs", nargs="+", help="adresáře běhů")
    report.add_argument("--baseline", help="jméno nebo adresář základního běhu")

    commands.add_parser("sweep", help="prohledá mřížku hyperparametrů ze sekce [sweep_grid]")
    return parser


def main(argv=None):
    """
    Hlavní funkce aplikace.

    Args:
        argv (list, optional): Argumenty (jinak sys.argv)

    Returns:
        int: Návratový kód
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    app = QCoreApplication.instance() or QCoreApplication([APP_NAME])
    app.setApplicationName(APP_NAME)
    app.setApplicationVersion(APP_VERSION)

    try:
        # Vytvoření a spuštění hlavního controlleru
        controller = AppController(args)
        return controller.start()
    except (ValidationError, ArgumentError) as e:
        print(f"Chyba: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.debug("Neošetřená výjimka", exc_info=True)
        print(f"Chyba běhu: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
