#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Horní meze dispečinku s dokonalou znalostí cen.
Genetický algoritmus s posuvným horizontem (provede se vždy první akce
optimalizované posloupnosti) a přesné dynamické programování nad množinou
dosažitelných stavů nabití se třemi diskrétními akcemi.
"""

import logging
from dataclasses import dataclass

import numpy as np
from PySide6.QtCore import QObject, Signal

from config import (
    DP_EXACT, DP_MAX_NODES, DP_MERGE_TOLERANCE, DP_RESOLUTION, GA_CROSSOVER_RATE, GA_ELITISM,
    GA_GENERATIONS, GA_HORIZON, GA_MUTATION_RATE, GA_MUTATION_STD, GA_POPULATION, GA_TOURNAMENT_SIZE,
)
from model.battery_env import discretize_actions, rollout_policy, simulate_step
from utils.errors import ArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig:
    """Nastavení genetického algoritmu."""

    horizon: int = GA_HORIZON
    population: int = GA_POPULATION
    generations: int = GA_GENERATIONS
    crossover_rate: float = GA_CROSSOVER_RATE
    mutation_rate: float = GA_MUTATION_RATE
    mutation_std: float = GA_MUTATION_STD
    tournament_size: int = GA_TOURNAMENT_SIZE
    elitism: int = GA_ELITISM
    seed: int = 0
    discrete: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ArgumentError(f"Horizont musí být alespoň 1, je {self.horizon}")
        if self.population < 2 or not 0 <= self.elitism < self.population:
            raise ArgumentError(f"Musí platit 0 ≤ elitism < population ({self.elitism}, {self.population})")
        if not 1 <= self.tournament_size <= self.population:
            raise ArgumentError(f"Velikost turnaje {self.tournament_size} mimo [1, {self.population}]")
        if self.generations < 0 or self.mutation_std < 0:
            raise ArgumentError("generations i mutation_std nesmí být záporné")

    @classmethod
    def from_config(cls, config, seed=0):
        """Vytvoří nastavení z klíčů `ga.*`."""
        return cls(
            horizon=config.get("ga.horizon"),
            population=config.get("ga.population"),
            generations=config.get("ga.generations"),
            crossover_rate=config.get("ga.crossover_rate"),
            mutation_rate=config.get("ga.mutation_rate"),
            mutation_std=config.get("ga.mutation_std"),
            tournament_size=config.get("ga.tournament_size"),
            elitism=config.get("ga.elitism"),
            seed=seed,
            discrete=config.get("ga.discrete"),
        )


@dataclass(frozen=True)
class DpConfig:
    """
    Nastavení dynamického programování.

    V přesném režimu běží zpětná indukce nad množinou stavů nabití dosažitelných
    z výchozího stavu třemi akcemi. Mřížka o `resolution` bodech se použije,
    když je přesný režim vypnutý nebo dosažitelná množina přesáhne `max_nodes`.
    """

    resolution: int = DP_RESOLUTION
    exact: bool = DP_EXACT
    max_nodes: int = DP_MAX_NODES

    def __post_init__(self):
        if self.resolution < 2:
            raise ArgumentError(f"Rozlišení mřížky musí být alespoň 2, je {self.resolution}")
        if self.max_nodes < 1:
            raise ArgumentError(f"max_nodes musí být kladné, je {self.max_nodes}")

    @classmethod
    def from_config(cls, config):
        """Vytvoří nastavení z klíčů `dp.*`."""
        return cls(
            resolution=config.get("dp.resolution"),
            exact=config.get("dp.exact"),
            max_nodes=config.get("dp.max_nodes"),
        )


def evaluate_sequences(soc, sequences, prices, params):
    """
    Odměna posloupností akcí na skutečném modelu baterie (s bezpečnostní vrstvou).

    Args:
        soc (float): Počáteční stav nabití
        sequences: Matice populace × horizont
        prices: Ceny v horizontu
        params (BatteryParams): Parametry baterie

    Returns:
        np.ndarray: Celková odměna každé posloupnosti
    """
    sequences = np.atleast_2d(np.asarray(sequences, dtype=np.float64))
    state = np.full(len(sequences), float(soc))
    total = np.zeros(len(sequences))
    for step, price in enumerate(prices):
        _, state, _, _, reward = simulate_step(state, sequences[:, step], price, params)
        total += reward
    return total


def tournament_select(population, fitness, size, rng):
    """Vrací nejlepšího z `size` náhodně vybraných jedinců (bez opakování)."""
    contestants = rng.choice(len(population), size=size, replace=False)
    return population[contestants[int(np.argmax(fitness[contestants]))]]


def one_point_crossover(first, second, rng):
    """Prohodí konce dvou rodičů za náhodným bodem řezu."""
    if len(first) < 2:
        return first.copy(), second.copy()
    cut = int(rng.integers(1, len(first)))
    return (np.concatenate([first[:cut], second[cut:]]),
            np.concatenate([second[:cut], first[cut:]]))


def gaussian_mutate(sequence, config, rng, params, action_table=None):
    """
    Mutace: geny vybrané s pravděpodobností mutation_rate dostanou normální šum
    (v diskrétním režimu se znovu vylosují z tabulky akcí); výsledek se ořízne
    na [p_min, p_max].
    """
    sequence = np.asarray(sequence, dtype=np.float64)
    selected = rng.random(len(sequence)) < config.mutation_rate
    if config.discrete and action_table is not None:
        replacement = rng.choice(action_table, size=len(sequence))
    else:
        replacement = sequence + rng.normal(0.0, 1.0, len(sequence)) * config.mutation_std
    mutated = np.where(selected, replacement, sequence)
    return np.clip(mutated, params.p_min, params.p_max)


def _initial_population(horizon, config, rng, params, action_table, warm_start):
    seeds = [np.full(horizon, params.p_min), np.zeros(horizon), np.full(horizon, params.p_max)]
    if warm_start is not None:
        seeds.append(np.asarray(warm_start, dtype=np.float64)[:horizon])
    seeds = seeds[:config.population]
    count = config.population - len(seeds)
    if config.discrete:
        random_part = rng.choice(action_table, size=(count, horizon))
    else:
        random_part = rng.uniform(params.p_min, params.p_max, size=(count, horizon))
    return np.vstack([np.asarray(seeds), random_part]) if count else np.asarray(seeds)


def ga_optimize(prices, soc, params, config, rng, warm_start=None):
    """
    Optimalizuje posloupnost akcí nad horizontem cen genetickým algoritmem.

    Počáteční populace obsahuje konstantní posloupnosti p_min, 0, p_max
    a případně posunuté nejlepší řešení z předchozího kroku.

    Args:
        prices: Ceny v horizontu
        soc (float): Počáteční stav nabití
        params (BatteryParams): Parametry baterie
        config (GaConfig): Nastavení
        rng (np.random.Generator): Generátor náhodných čísel
        warm_start: Počáteční kandidát

    Returns:
        tuple: (nejlepší posloupnost, její odměna)
    """
    prices = np.asarray(prices, dtype=np.float64)
    horizon = len(prices)
    action_table = discretize_actions(params)
    population = _initial_population(horizon, config, rng, params, action_table, warm_start)

    best_sequence, best_fitness = None, -np.inf
    for generation in range(config.generations + 1):
        fitness = evaluate_sequences(soc, population, prices, params)
        leader = int(np.argmax(fitness))
        if fitness[leader] > best_fitness:
            best_fitness = float(fitness[leader])
            best_sequence = population[leader].copy()
        if generation == config.generations:
            break

        order = np.argsort(-fitness, kind="stable")
        offspring = [population[i].copy() for i in order[:config.elitism]]
        while len(offspring) < config.population:
            first = tournament_select(population, fitness, config.tournament_size, rng)
            second = tournament_select(population, fitness, config.tournament_size, rng)
            if rng.random() < config.crossover_rate:
                first, second = one_point_crossover(first, second, rng)
            offspring.append(gaussian_mutate(first, config, rng, params, action_table))
            if len(offspring) < config.population:
                offspring.append(gaussian_mutate(second, config, rng, params, action_table))
        population = np.asarray(offspring)

    return best_sequence, best_fitness


class MpcGaOracle(QObject):
    """
    Dispečink s posuvným horizontem: v každém kroku GA optimalizuje
    `horizon` hodin dopředu se skutečnými cenami a provede první akci.
    Po každém kroku vysílá step_finished(krok, plánovaná odměna).
    """

    step_finished = Signal(int, float)

    def __init__(self, config=None):
        """
        Inicializace orákula.

        Args:
            config (GaConfig, optional): Nastavení genetického algoritmu
        """
        super().__init__()
        self.config = config or GaConfig()

    def dispatch(self, env):
        """
        Odehraje celou epizodu prostředí.

        Args:
            env (BatteryEnv): Prostředí, jehož ceny jsou známé dopředu

        Returns:
            EpisodeResult: Odměna, aktivity a průběh epizody
        """
        base = env.unwrapped
        rng = np.random.default_rng(self.config.seed)
        prices = base.prices
        memory = {"step": 0, "warm": None}

        def policy(observation):
            step = memory["step"]
            window = prices[step:min(step + self.config.horizon, len(prices))]
            warm = memory["warm"]
            if warm is not None:
                warm = np.append(warm[1:], warm[-1])[:len(window)]
            sequence, planned = ga_optimize(window, observation.soc, base.params,
                                            self.config, rng, warm)
            memory["warm"] = sequence
            memory["step"] = step + 1
            self.step_finished.emit(step, planned)
            return float(sequence[0])

        return rollout_policy(env, policy)


def mpc_ga_dispatch(env, config=None):
    """Dispečink MPC-GA nad celou epizodou prostředí."""
    return MpcGaOracle(config).dispatch(env)


@dataclass(frozen=True)
class DpResult:
    """Výsledek dynamického programování."""

    reward: float
    schedule: tuple
    soc_path: tuple
    layers: tuple
    policy: tuple
    exact: bool


def soc_grid(params, resolution):
    """Rovnoměrná mřížka stavu nabití na [soc_min, soc_max]."""
    return np.linspace(params.soc_min, params.soc_max, resolution)


def _nearest(states, soc):
    """Index nejbližšího stavu ve vzestupně seřazeném poli."""
    soc = np.asarray(soc, dtype=np.float64)
    if len(states) == 1:
        return np.zeros(soc.shape, dtype=np.int64)
    right = np.clip(np.searchsorted(states, soc), 1, len(states) - 1)
    left = right - 1
    return np.where(soc - states[left] <= states[right] - soc, left, right)


def _merge(values, tolerance):
    ordered = np.sort(np.ravel(values))
    keep = np.concatenate(([True], np.diff(ordered) > tolerance))
    return ordered[keep]


def reachable_states(initial_soc, steps, params, tolerance=DP_MERGE_TOLERANCE, max_nodes=None):
    """
    Množiny stavů nabití dosažitelné z `initial_soc` třemi diskrétními akcemi.

    Args:
        initial_soc (float): Výchozí stav nabití
        steps (int): Počet kroků
        params (BatteryParams): Parametry baterie
        tolerance (float): Stavy bližší než tato mez se sloučí
        max_nodes (int, optional): Horní mez celkového počtu stavů

    Returns:
        list: Seřazená pole stavů pro kroky 0..steps, nebo None při překročení `max_nodes`
    """
    actions = discretize_actions(params)
    layers = [np.array([float(initial_soc)])]
    total = 1
    for _ in range(steps):
        _, soc_next, _, _, _ = simulate_step(layers[-1][:, None], actions[None, :], 0.0, params)
        layer = _merge(soc_next, tolerance)
        total += len(layer)
        if max_nodes is not None and total > max_nodes:
            return None
        layers.append(layer)
    return layers


def dp_optimal(prices, params, config=None, initial_soc=None):
    """
    Optimální rozvrh třemi diskrétními akcemi zpětnou indukcí.

    V přesném režimu jsou uzly právě dosažitelné stavy nabití, takže hodnota
    se rovná optimu úplného výčtu všech 3^T posloupností. V mřížkovém režimu
    se nový stav čte v nejbližším bodě mřížky a výchozí stav je bod mřížky
    nejbližší `initial_soc`.

    Args:
        prices: Ceny epizody
        params (BatteryParams): Parametry baterie
        config (DpConfig, optional): Režim a rozlišení mřížky
        initial_soc (float, optional): Výchozí stav nabití (jinak střed intervalu)

    Returns:
        DpResult: Hodnota, rozvrh (MW), dráha stavu, uzly a tabulka politiky
    """
    config = config or DpConfig()
    prices = np.asarray(prices, dtype=np.float64)
    steps = len(prices)
    actions = discretize_actions(params)
    if initial_soc is None:
        initial_soc = 0.5 * (params.soc_min + params.soc_max)

    layers = None
    if config.exact:
        layers = reachable_states(initial_soc, steps, params, max_nodes=config.max_nodes)
        if layers is None:
            logger.warning("Dosažitelných stavů je víc než %d, DP přechází na mřížku %d bodů",
                           config.max_nodes, config.resolution)
    exact = layers is not None
    if not exact:
        layers = [soc_grid(params, config.resolution)] * (steps + 1)

    policy = [None] * steps
    value = np.zeros(len(layers[-1]))
    for t in range(steps - 1, -1, -1):
        corrected, soc_next, _, degradation, _ = simulate_step(layers[t][:, None], actions[None, :], 0.0, params)
        q = corrected * prices[t] * params.dt - degradation + value[_nearest(layers[t + 1], soc_next)]
        policy[t] = np.argmax(q, axis=1).astype(np.int8)
        value = q[np.arange(len(layers[t])), policy[t]]

    index = int(_nearest(layers[0], initial_soc))
    start_value = float(value[index])

    schedule, path = [], [float(layers[0][index])]
    for t in range(steps):
        soc = layers[t][index]
        corrected, soc_next, _, _, _ = simulate_step(soc, actions[policy[t][index]], prices[t], params)
        schedule.append(float(corrected))
        path.append(float(soc_next))
        index = int(_nearest(layers[t + 1], soc_next))

    logger.debug("DP (%s): %d kroků, %d uzlů, hodnota %.2f", "přesně" if exact else "mřížka",
                 steps, sum(len(layer) for layer in layers), start_value)
    return DpResult(start_value, tuple(schedule), tuple(path), tuple(layers), tuple(policy), exact)


def dp_dispatch(env, config=None):
    """
    Přehraje optimální politiku DP ve skutečném prostředí.
    Akce se v každém kroku volí podle uzlu nejbližšího skutečnému stavu nabití.

    Returns:
        tuple: (EpisodeResult, DpResult)
    """
    base = env.unwrapped
    solution = dp_optimal(base.prices, base.params, config, base.initial_soc)
    actions = discretize_actions(base.params)
    memory = {"step": 0}

    def policy(observation):
        step = memory["step"]
        memory["step"] = step + 1
        index = int(_nearest(solution.layers[step], observation.soc))
        return float(actions[solution.policy[step][index]])

    return rollout_policy(env, policy), solution
