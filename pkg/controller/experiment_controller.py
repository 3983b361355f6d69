#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Controller experimentů.
Sestaví data, prostředí a agenta podle konfigurace, spustí trénink
a vyhodnocení pro každé semínko (případně paralelně), zapíše výsledky
do adresáře běhu a provádí prohledávání mřížky hyperparametrů.
"""

import itertools
import json
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np
from PySide6.QtCore import QObject, QRunnable, Qt, QThreadPool, Signal

from config import (
    AGENT_KINDS, CEM_COLUMNS, DEFAULT_OPTIONS, HISTORY_COLUMNS, RUN_HASH_LENGTH,
    SEGMENTS, SUMMARY_COLUMNS, SWEEP_COLUMNS, TIMING_COLUMNS,
)
from model.battery_env import BatteryEnv, BatteryParams, discretize_actions
from model.cem import CemConfig, cem_optimize, cem_policy_eval, policy_parameter_count
from model.dqn_agent import DqnAgent, DqnConfig, evaluate_policy, run_training, save_agent
from model.forecast_wrapper import ForecastWrapper, WrapperConfig, resolve_horizons
from model.forecasting import load_forecaster
from model.market_data import (
    SyntheticParams, fit_scaler, generate_synthetic, ingest_csv, resolve_split_bounds,
)
from model.oracle import DpConfig, GaConfig, MpcGaOracle, dp_dispatch
from utils.config_loader import ConfigModel
from utils.csv_io import write_csv
from utils.errors import ConfigurationError, ValidationError
from utils.json_handler import content_hash, save_to_json

logger = logging.getLogger(__name__)

# Klíče, které neovlivňují výsledky, a proto ani identitu běhu
_HASH_EXCLUDED = ("experiment.output_dir", "experiment.workers")


def load_series(config):
    """
    Načte tržní řadu podle konfigurace (CSV soubor nebo syntetický generátor).

    Args:
        config (ConfigModel): Konfigurace

    Returns:
        MarketSeries: Řada s dělením podle `data.splits`
    """
    path = config.get("data.path")
    if config.get("data.synthetic") or not path:
        if not config.get("data.synthetic"):
            raise ConfigurationError("Není zadán zdroj dat: nastavte data.path nebo data.synthetic = true")
        params = SyntheticParams(
            base_price=config.get("synthetic.base_price"),
            amplitude=config.get("synthetic.amplitude"),
            noise_scale=config.get("synthetic.noise_scale"),
            noise_persistence=config.get("synthetic.noise_persistence"),
            noise_clip=config.get("synthetic.noise_clip"),
            spike_min=config.get("synthetic.spike_min"),
            spike_max=config.get("synthetic.spike_max"),
        )
        series = generate_synthetic(config.get("synthetic.length_hours"), config.get("synthetic.seed"),
                                    config.get("synthetic.spike_rate"), params)
        train_end, val_end = resolve_split_bounds(series.timestamps, config.get("data.splits"))
        return series if train_end is None else series.with_split(train_end, val_end)
    return ingest_csv(path, fill_gaps=config.get("data.fill_gaps"), splits=config.get("data.splits"))


def load_forecasters(config, horizons):
    """
    Načte prognostické modely ze sekce `[checkpoints]` (horizont = cesta).

    Raises:
        ConfigurationError: Chybí záznam nebo soubor pro některý horizont
    """
    checkpoints = config.section("checkpoints")
    forecasters = {}
    for horizon in horizons:
        path = checkpoints.get(str(horizon))
        if not path:
            raise ConfigurationError(f"V sekci [checkpoints] chybí model pro horizont {horizon}")
        if not os.path.isfile(path):
            raise ConfigurationError(f"Kontrolní bod {path} pro horizont {horizon} neexistuje")
        try:
            forecasters[horizon] = load_forecaster(path)
        except ValidationError as e:
            raise ConfigurationError(f"Kontrolní bod {path}: {e}") from e
    return forecasters


def episode_bounds(series, segment, hours=0):
    """
    Hranice epizody v části řady, volitelně zkrácené na `hours` hodin.

    Returns:
        tuple: (začátek, konec)
    """
    if segment not in SEGMENTS:
        raise ConfigurationError(f"Neznámá část řady: {segment}")
    start, end = series.segment(segment)
    if hours:
        end = min(end, start + hours)
    if end <= start:
        raise ValidationError(f"Část řady {segment} je prázdná")
    return start, end


def experiment_bounds(config, series):
    """
    Hranice tréninkové a vyhodnocovací epizody podle `experiment.*`.

    Returns:
        tuple: ((začátek, konec) tréninku, (začátek, konec) vyhodnocení)
    """
    hours = config.get("experiment.episode_hours")
    return (episode_bounds(series, config.get("experiment.train_segment"), hours),
            episode_bounds(series, config.get("experiment.eval_segment"), hours))


@dataclass(frozen=True)
class ExperimentSpec:
    """Popis jednoho experimentu: agent, obal, semínka a všechny volby."""

    name: str
    agent: str
    wrapper_mode: str
    horizons: tuple
    seeds: tuple
    episodes: int
    output_dir: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_config(cls, config):
        """Vytvoří specifikaci z konfigurace."""
        return cls(
            name=config.get("experiment.name"),
            agent=config.get("experiment.agent"),
            wrapper_mode=config.get("wrapper.mode"),
            horizons=resolve_horizons(config.get("wrapper.horizons")),
            seeds=tuple(config.get("experiment.seeds")),
            episodes=config.get("experiment.episodes"),
            output_dir=config.get("experiment.output_dir"),
            options=config.as_dict(),
        )

    @property
    def config(self):
        return ConfigModel.from_dict(self.options)

    @property
    def run_id(self):
        """Název adresáře běhu: jméno a hash obsahu specifikace."""
        payload = {key: value for key, value in self.options.items() if key not in _HASH_EXCLUDED}
        return f"{self.name}-{content_hash(payload, RUN_HASH_LENGTH)}"

    @property
    def run_dir(self):
        return os.path.join(self.output_dir, self.run_id)

    def with_overrides(self, overrides):
        """Vrací novou specifikaci s přepsanými volbami."""
        for key in overrides:
            section = key.partition(".")[0]
            if key not in DEFAULT_OPTIONS and section not in ("checkpoints", "sweep_grid"):
                raise ConfigurationError(f"Neznámý klíč konfigurace: {key}")
        return ExperimentSpec.from_config(ConfigModel.from_dict({**self.options, **overrides}))

    def validate(self):
        """
        Ověří předpoklady běhu ještě před vytvořením adresářů.

        Raises:
            ConfigurationError: Neplatná kombinace voleb
        """
        if self.agent not in AGENT_KINDS:
            raise ConfigurationError(f"Neznámý druh agenta: {self.agent} (povolené {AGENT_KINDS})")
        if not self.seeds:
            raise ConfigurationError("experiment.seeds je prázdné")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError(f"experiment.seeds obsahuje duplicity: {list(self.seeds)}")
        if self.episodes < 1:
            raise ConfigurationError("experiment.episodes musí být alespoň 1")
        if not self.name:
            raise ConfigurationError("experiment.name je prázdné")


@dataclass
class SeedResult:
    """Výsledek jednoho semínka."""

    seed: int
    reward: float
    activity: int
    purchases: float
    sales: float
    episode_length: int
    compute_seconds: float
    env: object = None
    history: list = field(default_factory=list)
    cem_stats: list = field(default_factory=list)
    agent: object = None


@dataclass
class RunSummary:
    """Souhrn experimentu přes všechna semínka."""

    name: str
    kind: str
    rewards: dict
    activity: float
    compute_seconds: float
    episode_length: int
    run_dir: str = ""

    @property
    def mean(self):
        return float(np.mean(list(self.rewards.values())))

    @property
    def std(self):
        return float(np.std(list(self.rewards.values())))


def _log_episode(seed, episode, reward):
    logger.debug("Semínko %d, epizoda %d: odměna %.2f", seed, episode, reward)


def _log_iteration(iteration, best, mean, std):
    logger.debug("CEM iterace %d: nejlepší %.2f, průměr %.2f, odchylka %.2f", iteration, best, mean, std)


def _log_mpc_step(step, planned):
    if step % 500 == 0:
        logger.debug("MPC-GA krok %d: plánovaná odměna %.2f", step, planned)


class SeedWorker(QRunnable):
    """Úloha pro QThreadPool: spustí jedno semínko a uloží výsledek nebo chybu."""

    def __init__(self, function, seed):
        super().__init__()
        self.function = function
        self.seed = seed
        self.result = None
        self.error = None
        self.setAutoDelete(False)

    def run(self):
        try:
            self.result = self.function(self.seed)
        except Exception as e:  # chyba se předá hlavnímu vláknu
            self.error = e


class ExperimentRunner(QObject):
    """
    Spouští experimenty.
    Signály seed_finished(semínko, odměna) a experiment_finished(adresář, průměr)
    se vysílají z volajícího vlákna.
    """

    seed_finished = Signal(int, float)
    experiment_finished = Signal(str, float)

    def __init__(self, series=None):
        """
        Inicializace.

        Args:
            series (MarketSeries, optional): Řada; jinak se načte podle konfigurace
        """
        super().__init__()
        self.series = series

    def run(self, spec):
        """
        Provede experiment a zapíše výsledky.

        Args:
            spec (ExperimentSpec): Specifikace

        Returns:
            RunSummary: Souhrn přes semínka
        """
        spec.validate()
        config = spec.config
        series = self.series if self.series is not None else load_series(config)
        params = BatteryParams.from_config(config)
        forecasters = load_forecasters(config, spec.horizons) if spec.wrapper_mode == "predicted" else {}
        wrapper_config = WrapperConfig(spec.wrapper_mode, spec.horizons, forecasters)
        train_bounds, eval_bounds = experiment_bounds(config, series)
        price_scaler = fit_scaler(series, ["price"])
        initial_soc = config.get("battery.initial_soc")
        if not params.soc_min <= initial_soc <= params.soc_max:
            raise ConfigurationError(f"battery.initial_soc = {initial_soc} leží mimo meze stavu nabití")

        context = {
            "spec": spec, "config": config, "series": series, "params": params,
            "wrapper": wrapper_config, "train": train_bounds, "eval": eval_bounds,
            "scaler": price_scaler, "initial_soc": initial_soc,
        }
        logger.info("Experiment %s (%s, obal %s), semínka %s", spec.name, spec.agent,
                    spec.wrapper_mode, list(spec.seeds))

        results = self._run_seeds(lambda seed: run_seed(context, seed), spec.seeds,
                                  config.get("experiment.workers"))
        for result in results:
            self.seed_finished.emit(result.seed, result.reward)

        summary = write_run(spec, results, wrapper_config)
        self.experiment_finished.emit(summary.run_dir, summary.mean)
        logger.info("Experiment %s: průměrná odměna %.2f ± %.2f (%s)",
                    spec.name, summary.mean, summary.std, summary.run_dir)
        return summary

    @staticmethod
    def _run_seeds(function, seeds, workers):
        if workers <= 1 or len(seeds) == 1:
            return [function(seed) for seed in seeds]

        pool = QThreadPool()
        pool.setMaxThreadCount(workers)
        tasks = [SeedWorker(function, seed) for seed in seeds]
        for task in tasks:
            pool.start(task)
        pool.waitForDone()
        for task in tasks:
            if task.error is not None:
                raise task.error
        return [task.result for task in tasks]


def _make_env(context, bounds, wrapped=True):
    env = BatteryEnv(context["series"], context["params"], bounds[0], bounds[1], context["initial_soc"])
    return ForecastWrapper(env, context["wrapper"]) if wrapped else env


def run_seed(context, seed):
    """
    Trénink a vyhodnocení jednoho semínka.

    Args:
        context (dict): Sdílené neměnné vstupy experimentu
        seed (int): Semínko

    Returns:
        SeedResult: Výsledek semínka
    """
    spec, config, params = context["spec"], context["config"], context["params"]
    width = context["wrapper"].observation_width
    actions = discretize_actions(params)
    started = time.perf_counter()
    history, cem_stats, agent = [], [], None

    if spec.agent == "dqn":
        agent = DqnAgent(width, DqnConfig.from_config(config), seed, context["scaler"], actions)
        agent.episode_finished.connect(_log_episode, Qt.ConnectionType.DirectConnection)
        rewards = run_training(agent, _make_env(context, context["train"]), spec.episodes)
        history = [{"episode": i + 1, "seed": seed, "reward": r} for i, r in enumerate(rewards)]
        eval_env = _make_env(context, context["eval"])
        evaluation = evaluate_policy(agent, eval_env)

    elif spec.agent == "cem":
        cem_config = CemConfig.from_config(config, seed)
        train_env = _make_env(context, context["train"])

        def objective(parameters):
            return cem_policy_eval(parameters, train_env, actions, width,
                                   cem_config.hidden_widths, context["scaler"])

        result = cem_optimize(objective, policy_parameter_count(width, cem_config.hidden_widths),
                              cem_config, on_iteration=_log_iteration)
        cem_stats = [dict(row, seed=seed) for row in result.stats]
        history = [{"episode": row["iteration"], "seed": seed, "reward": row["best"]} for row in result.stats]
        eval_env = _make_env(context, context["eval"])
        evaluation = cem_policy_eval(result.best_parameters, eval_env, actions,
                                     width, cem_config.hidden_widths, context["scaler"], full_result=True)

    elif spec.agent == "mpc-ga":
        oracle = MpcGaOracle(GaConfig.from_config(config, seed))
        oracle.step_finished.connect(_log_mpc_step, Qt.ConnectionType.DirectConnection)
        eval_env = _make_env(context, context["eval"], wrapped=False)
        evaluation = oracle.dispatch(eval_env)

    else:
        eval_env = _make_env(context, context["eval"], wrapped=False)
        evaluation, _ = dp_dispatch(eval_env, DpConfig.from_config(config))

    elapsed = time.perf_counter() - started
    logger.info("Semínko %d: odměna %.2f, aktivit %d, %.1f s", seed, evaluation.reward,
                evaluation.activity, elapsed)
    return SeedResult(
        seed=seed,
        reward=evaluation.reward,
        activity=evaluation.activity,
        purchases=evaluation.purchases,
        sales=evaluation.sales,
        episode_length=evaluation.steps,
        compute_seconds=elapsed,
        env=eval_env,
        history=history,
        cem_stats=cem_stats,
        agent=agent,
    )


def write_run(spec, results, wrapper_config):
    """
    Zapíše výsledky běhu do adresáře `<output_dir>/<jméno>-<hash>`.

    Returns:
        RunSummary: Souhrn běhu
    """
    run_dir = spec.run_dir
    os.makedirs(run_dir, exist_ok=True)
    save_to_json(spec.options, os.path.join(run_dir, "spec.json"))

    summary_rows, timing_rows, history_rows, cem_rows = [], [], [], []
    for result in sorted(results, key=lambda r: r.seed):
        summary_rows.append({"name": spec.name, "kind": spec.agent, "seed": result.seed,
                             "reward": result.reward, "activity": result.activity,
                             "episode_length": result.episode_length})
        timing_rows.append({"name": spec.name, "kind": spec.agent,
                            "compute_seconds": result.compute_seconds})
        history_rows.extend(result.history)
        cem_rows.extend(result.cem_stats)

        meta = {"name": spec.name, "kind": spec.agent, "seed": result.seed,
                "purchases": result.purchases, "sales": result.sales,
                "wrapper_mode": wrapper_config.mode, "horizons": list(wrapper_config.horizons)}
        if isinstance(result.env, ForecastWrapper):
            meta.update(result.env.metadata_entry())
        result.env.unwrapped.export_trace(os.path.join(run_dir, "traces", f"seed{result.seed}.csv"), meta)

        if result.agent is not None:
            save_agent(result.agent, os.path.join(run_dir, "checkpoints", f"seed{result.seed}.json"))

    write_csv(summary_rows, os.path.join(run_dir, "summary.csv"), SUMMARY_COLUMNS)
    write_csv(timing_rows, os.path.join(run_dir, "timing.csv"), TIMING_COLUMNS)
    if history_rows:
        write_csv(history_rows, os.path.join(run_dir, "history.csv"), HISTORY_COLUMNS)
    if cem_rows:
        write_csv(cem_rows, os.path.join(run_dir, "cem.csv"), ["seed"] + CEM_COLUMNS)

    return RunSummary(
        name=spec.name,
        kind=spec.agent,
        rewards={r.seed: r.reward for r in results},
        activity=float(np.mean([r.activity for r in results])),
        compute_seconds=float(sum(r.compute_seconds for r in results)),
        episode_length=results[0].episode_length,
        run_dir=run_dir,
    )


def run_experiment(spec, series=None):
    """
    Provede experiment podle specifikace.

    Args:
        spec (ExperimentSpec): Specifikace
        series (MarketSeries, optional): Již načtená řada

    Returns:
        RunSummary: Souhrn přes semínka
    """
    return ExperimentRunner(series).run(spec)


@dataclass
class SweepResult:
    """Výsledek prohledávání mřížky."""

    best_spec: ExperimentSpec
    best_overrides: dict
    best_reward: float
    rows: list = field(default_factory=list)


def expand_grid(grid, cap=0, seed=0):
    """
    Kartézský součin mřížky; při `cap` menším než počet buněk se buňky
    rovnoměrně vylosují (pořadí výčtu zůstane zachováno).

    Args:
        grid (dict): klíč -> seznam hodnot
        cap (int): Maximální počet buněk (0 = bez omezení)
        seed (int): Semínko losování

    Returns:
        list: Dvojice (index buňky, slovník přepsaných voleb)
    """
    if not grid or any(len(values) == 0 for values in grid.values()):
        raise ConfigurationError("Mřížka hyperparametrů je prázdná")
    keys = list(grid)
    cells = [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]
    indices = range(len(cells))
    if 0 < cap < len(cells):
        indices = sorted(np.random.default_rng(seed).choice(len(cells), size=cap, replace=False).tolist())
    return [(index, cells[index]) for index in indices]


def hyperparameter_sweep(template, grid, cap=0, seed=0, runner=None, series=None):
    """
    Vyzkouší buňky mřížky a vrátí specifikaci s nejvyšší průměrnou odměnou
    na validační části řady; při shodě vyhrává dřívější buňka.

    Args:
        template (ExperimentSpec): Výchozí specifikace
        grid (dict): klíč -> seznam hodnot
        cap (int): Maximální počet buněk
        seed (int): Semínko losování buněk
        runner: Funkce ExperimentSpec -> RunSummary (jinak run_experiment)
        series (MarketSeries, optional): Již načtená řada

    Returns:
        SweepResult: Nejlepší buňka a tabulka všech výsledků
    """
    runner = runner or (lambda spec: run_experiment(spec, series))
    best = None
    rows = []
    for index, overrides in expand_grid(grid, cap, seed):
        spec = template.with_overrides({**overrides, "experiment.name": f"{template.name}-cell{index}",
                                        "experiment.eval_segment": "validation"})
        summary = runner(spec)
        rows.append({"cell": index, "overrides": json.dumps(overrides, sort_keys=True, default=str),
                     "mean_reward": summary.mean})
        logger.info("Buňka %d %s: průměrná odměna %.2f", index, overrides, summary.mean)
        if best is None or summary.mean > best.best_reward:
            best = SweepResult(spec, overrides, summary.mean)

    best.rows = rows
    write_csv(rows, os.path.join(template.output_dir, f"sweep-{template.run_id}.csv"), SWEEP_COLUMNS)
    return best
