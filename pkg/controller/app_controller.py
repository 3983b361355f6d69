#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Hlavní controller aplikace Battery Arbitrage Lab.
Propojuje podpříkazy příkazové řádky s modely a výstupy.
"""

import logging
import os

import pandas as pd
from PySide6.QtCore import QObject, Qt, Signal

from config import FORECASTER_KINDS, METRICS_COLUMNS
from controller.experiment_controller import (
    ExperimentRunner, ExperimentSpec, hyperparameter_sweep, load_series,
)
from controller.report_controller import compare_report
from model.forecast_wrapper import resolve_horizons
from model.forecasting import evaluate, fit_forecaster, load_forecaster, save_forecaster, select_best
from model.market_data import ingest_csv
from model.neural_core import TrainConfig
from utils.config_loader import ConfigModel, split_list
from utils.csv_io import upsert_csv, write_csv
from utils.errors import ArgumentError, ConfigurationError
from view import report_view

logger = logging.getLogger(__name__)


class AppController(QObject):
    """
    Hlavní controller aplikace.
    Každý podpříkaz má vlastní obslužnou metodu; výstupy pro uživatele
    se posílají signálem `message`.
    """

    message = Signal(str)

    def __init__(self, args):
        """
        Inicializace controlleru.

        Args:
            args (argparse.Namespace): Zpracované argumenty příkazové řádky
        """
        super().__init__()
        self.args = args
        self.config = ConfigModel(args.config, self._global_overrides(args))
        self.handlers = {}

        # Připojení podpříkazů a výstupu
        self.connect_signals()

    @staticmethod
    def _global_overrides(args):
        overrides = {}
        if getattr(args, "seed", None) is not None:
            overrides["experiment.seeds"] = [args.seed]
            overrides["train.seed"] = args.seed
            overrides["synthetic.seed"] = args.seed
        if getattr(args, "out", None):
            overrides["experiment.output_dir"] = args.out
            overrides["forecaster.output_dir"] = args.out
        return overrides

    def connect_signals(self):
        """Připojení podpříkazů a signálů."""
        self.handlers = {
            "ingest": self.ingest,
            "generate-data": self.generate_data,
            "train-forecaster": self.train_forecaster,
            "eval-forecaster": self.eval_forecaster,
            "train-dqn": self.train_dqn,
            "run-cem": self.run_cem,
            "run-oracle": self.run_oracle,
            "report": self.report,
            "sweep": self.sweep,
        }
        self.message.connect(print, Qt.ConnectionType.DirectConnection)

    def start(self):
        """
        Spustí zvolený podpříkaz.

        Returns:
            int: Návratový kód (0 při úspěchu)
        """
        handler = self.handlers.get(self.args.command)
        if handler is None:
            raise ArgumentError(f"Neznámý podpříkaz: {self.args.command}")
        logger.debug("Spouštím podpříkaz %s", self.args.command)
        handler()
        return 0

    def _output_path(self, filename):
        base = self.args.out or ""
        return filename if os.path.isabs(filename) else os.path.join(base, filename)

    def ingest(self):
        """Načte a ověří CSV s tržními daty a zapíše ho v jednotném formátu."""
        path = self.args.input or self.config.get("data.path")
        if not path:
            raise ConfigurationError("Není zadán vstupní soubor (--input nebo data.path)")
        fill_gaps = self.args.fill_gaps or self.config.get("data.fill_gaps")
        series = ingest_csv(path, fill_gaps=fill_gaps, splits=self.config.get("data.splits"))
        output = self._output_path(self.args.output)
        self._write_series(series, output, with_spikes=False)
        self.message.emit(report_view.format_series_summary(series, output))

    def generate_data(self):
        """Vygeneruje syntetickou řadu podle sekce [synthetic]."""
        overrides = {"data.synthetic": True}
        if self.args.hours is not None:
            overrides["synthetic.length_hours"] = self.args.hours
        if self.args.spike_rate is not None:
            overrides["synthetic.spike_rate"] = self.args.spike_rate
        for key, value in overrides.items():
            self.config.set(key, value)
        series = load_series(self.config)
        output = self._output_path(self.args.output)
        self._write_series(series, output, with_spikes=True)
        self.message.emit(report_view.format_series_summary(series, output))

    @staticmethod
    def _write_series(series, output, with_spikes):
        rows = {
            "timestamp": [t.strftime("%Y-%m-%dT%H:%M:%SZ") for t in series.timestamps],
            "price": series.prices,
            "demand": series.demand,
        }
        columns = ["timestamp", "price", "demand"]
        if with_spikes and series.spikes is not None:
            rows["spike"] = series.spikes.astype(int)
            columns.append("spike")
        write_csv(pd.DataFrame(rows), output, columns)

    def _horizons(self):
        values = split_list(self.args.horizon) if self.args.horizon else [self.config.get("forecaster.horizon")]
        return resolve_horizons(values)

    def train_forecaster(self):
        """
        Natrénuje prognózy pro zvolené horizonty.
        S `--kind all` vyzkouší všechny druhy a nejlepší uloží jako `h<H>_best.json`.
        """
        series = load_series(self.config)
        kind = self.args.kind or self.config.get("forecaster.kind")
        kinds = FORECASTER_KINDS if kind == "all" else [kind]
        if any(k not in FORECASTER_KINDS for k in kinds):
            raise ConfigurationError(f"Neznámý druh prognózy: {kind}")

        output_dir = self.config.get("forecaster.output_dir")
        train_config = TrainConfig.from_config(self.config)
        alpha = self.config.get("smoothing.alpha") or None
        rows, candidates = [], {}
        for horizon in self._horizons():
            candidates[horizon] = []
            for current in kinds:
                forecaster = fit_forecaster(
                    current, series, horizon,
                    window_size=self.config.get("window_size"),
                    features=self.config.get("features"),
                    smoothing_alpha=alpha,
                    ar_order=self.config.get("forecaster.ar_order"),
                    ar_difference=self.config.get("forecaster.ar_difference"),
                    hidden_widths=self.config.get("forecaster.hidden_widths"),
                    activation=self.config.get("forecaster.activation"),
                    train_config=train_config,
                )
                metrics = evaluate(forecaster, series, "validation")
                save_forecaster(forecaster, os.path.join(output_dir, f"h{horizon}_{current}.json"), metrics)
                rows.append(metrics.to_row(horizon, current, forecaster.parameter_count))
                candidates[horizon].append((forecaster, metrics))
                logger.info("Horizont %d h, %s: validační RMSE %.3f", horizon, current, metrics.rmse)

        if kind == "all":
            for horizon, best in select_best(candidates).items():
                metrics = next(m for f, m in candidates[horizon] if f is best)
                save_forecaster(best, os.path.join(output_dir, f"h{horizon}_best.json"), metrics)
                logger.info("Horizont %d h: nejlepší prognóza %s", horizon, best.kind)

        upsert_csv(rows, os.path.join(output_dir, "metrics.csv"), METRICS_COLUMNS, ["horizon", "kind"])
        self.message.emit(report_view.format_metrics(rows, "Validační metriky prognóz"))

    def eval_forecaster(self):
        """Vyhodnotí uložené prognózy na zvolené části řady."""
        series = load_series(self.config)
        if self.args.checkpoint:
            paths = list(self.args.checkpoint)
        else:
            checkpoints = self.config.section("checkpoints")
            paths = [checkpoints[str(h)] for h in self._horizons() if str(h) in checkpoints]
        if not paths:
            raise ConfigurationError("Nejsou zadány kontrolní body (--checkpoint nebo sekce [checkpoints])")

        rows = []
        for path in paths:
            forecaster = load_forecaster(path)
            metrics = evaluate(forecaster, series, self.args.segment)
            rows.append(metrics.to_row(forecaster.horizon, forecaster.kind, forecaster.parameter_count))
            if metrics.excluded:
                logger.info("%s: %d vzorků vynecháno z MAPE", path, metrics.excluded)
        output = os.path.join(self.config.get("forecaster.output_dir"), f"eval_{self.args.segment}.csv")
        upsert_csv(rows, output, METRICS_COLUMNS, ["horizon", "kind"])
        self.message.emit(report_view.format_metrics(rows, f"Metriky prognóz ({self.args.segment})"))

    def _run_agent(self, agent):
        self.config.set("experiment.agent", agent)
        if getattr(self.args, "seeds", None):
            self.config.set("experiment.seeds", list(range(1, self.args.seeds + 1)))
        if getattr(self.args, "episodes", None):
            self.config.set("experiment.episodes", self.args.episodes)
        spec = ExperimentSpec.from_config(self.config)
        runner = ExperimentRunner()
        runner.seed_finished.connect(self._on_seed_finished, Qt.ConnectionType.DirectConnection)
        summary = runner.run(spec)
        self.message.emit(report_view.format_run_summary(summary))
        return summary

    @staticmethod
    def _on_seed_finished(seed, reward):
        logger.info("Semínko %d dokončeno, odměna %.2f", seed, reward)

    def train_dqn(self):
        """Natrénuje a vyhodnotí DQN agenta pro každé semínko."""
        self._run_agent("dqn")

    def run_cem(self):
        """Spustí metodu křížové entropie."""
        self._run_agent("cem")

    def run_oracle(self):
        """Spustí orákulum MPC-GA nebo dynamické programování."""
        self._run_agent(self.args.kind)

    def report(self):
        """Porovná dokončené běhy."""
        baseline = self.args.baseline or self.config.get("experiment.baseline") or None
        frame = compare_report(self.args.runs, baseline, self.args.out)
        self.message.emit(report_view.format_comparison(frame))

    def sweep(self):
        """Prohledá mřížku hyperparametrů ze sekce [sweep_grid]."""
        grid = {key: split_list(value) for key, value in self.config.section("sweep_grid").items()}
        if not grid:
            raise ConfigurationError("Sekce [sweep_grid] je prázdná")
        template = ExperimentSpec.from_config(self.config)
        series = load_series(self.config)
        result = hyperparameter_sweep(template, grid, self.config.get("sweep.cap"),
                                      self.config.get("sweep.seed"), series=series)
        self.message.emit(report_view.format_sweep(result))
