#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Metoda křížové entropie jako dolní mez pro učení posilováním.
Parametry malé politické sítě se vzorkují z diagonálního normálního
rozdělení, které se po každé iteraci přizpůsobí elitním kandidátům.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from PySide6.QtCore import QObject, Qt, Signal

from config import (
    CEM_ELITE_FRACTION, CEM_HIDDEN_WIDTHS, CEM_INITIAL_STD, CEM_ITERATIONS,
    CEM_POPULATION, CEM_STD_FLOOR, DQN_ACTION_COUNT,
)
from model.battery_env import encode_observation, rollout_policy
from model.neural_core import forward, init_net
from utils.errors import ArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CemConfig:
    """Nastavení metody křížové entropie."""

    population: int = CEM_POPULATION
    elite_fraction: float = CEM_ELITE_FRACTION
    iterations: int = CEM_ITERATIONS
    initial_std: float = CEM_INITIAL_STD
    std_floor: float = CEM_STD_FLOOR
    hidden_widths: tuple = tuple(CEM_HIDDEN_WIDTHS)
    seed: int = 0

    def __post_init__(self):
        if self.population < 1 or self.iterations < 1:
            raise ArgumentError("population i iterations musí být alespoň 1")
        if not 0.0 < self.elite_fraction <= 1.0:
            raise ArgumentError(f"elite_fraction musí ležet v (0, 1], je {self.elite_fraction}")
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))

    @property
    def elite_count(self):
        return max(1, int(round(self.elite_fraction * self.population)))

    @classmethod
    def from_config(cls, config, seed=0):
        """Vytvoří nastavení z klíčů `cem.*`."""
        return cls(
            population=config.get("cem.population"),
            elite_fraction=config.get("cem.elite_fraction"),
            iterations=config.get("cem.iterations"),
            initial_std=config.get("cem.initial_std"),
            hidden_widths=config.get("cem.hidden_widths"),
            seed=seed,
        )


@dataclass
class CemResult:
    """Nejlepší nalezené parametry a statistiky iterací."""

    best_parameters: np.ndarray
    best_score: float
    mean: np.ndarray
    std: np.ndarray
    stats: list = field(default_factory=list)


class CrossEntropyOptimizer(QObject):
    """
    Vzorkovač ve stylu ask/tell: ask() vrací populaci, tell() přizpůsobí rozdělení.
    Po každé iteraci vysílá iteration_finished(iterace, nejlepší, průměr, odchylka).
    """

    iteration_finished = Signal(int, float, float, float)

    def __init__(self, dimension, config=None, initial_mean=None):
        """
        Inicializace optimalizátoru.

        Args:
            dimension (int): Počet optimalizovaných parametrů
            config (CemConfig, optional): Nastavení
            initial_mean: Počáteční střed rozdělení (jinak nuly)
        """
        super().__init__()
        self.config = config or CemConfig()
        self.dimension = int(dimension)
        self.mean = (np.zeros(self.dimension) if initial_mean is None
                     else np.asarray(initial_mean, dtype=np.float64).copy())
        self.std = np.full(self.dimension, float(self.config.initial_std))
        self.rng = np.random.default_rng(self.config.seed)
        self.iteration = 0
        self.best_score = -np.inf
        self.best_parameters = self.mean.copy()
        self.stats = []
        self._samples = None

    def ask(self):
        """Navzorkuje populaci kandidátů (population × dimension)."""
        noise = self.rng.standard_normal((self.config.population, self.dimension))
        self._samples = self.mean + self.std * noise
        return self._samples

    def tell(self, scores):
        """
        Přizpůsobí rozdělení elitním kandidátům poslední populace.
        Kandidáti s nekonečným nebo chybějícím skóre se vyřadí.

        Args:
            scores: Skóre kandidátů v pořadí z ask()
        """
        scores = np.asarray(scores, dtype=np.float64)
        self.iteration += 1
        finite = np.isfinite(scores)
        if not finite.all():
            logger.warning("Iterace %d: vyřazeno %d kandidátů s nekonečným skóre",
                           self.iteration, int((~finite).sum()))
        if not finite.any():
            self.stats.append({"iteration": self.iteration, "best": self.best_score,
                               "mean": float("nan"), "std": float("nan")})
            return

        samples = self._samples[finite]
        valid = scores[finite]
        order = np.argsort(-valid, kind="stable")
        elite = samples[order[:min(self.config.elite_count, len(valid))]]
        self.mean = elite.mean(axis=0)
        self.std = np.maximum(elite.std(axis=0), self.config.std_floor)

        if valid[order[0]] > self.best_score:
            self.best_score = float(valid[order[0]])
            self.best_parameters = samples[order[0]].copy()

        self.stats.append({"iteration": self.iteration, "best": self.best_score,
                           "mean": float(valid.mean()), "std": float(valid.std())})
        self.iteration_finished.emit(self.iteration, self.best_score, float(valid.mean()), float(valid.std()))


def cem_optimize(objective, dimension, config=None, initial_mean=None, on_iteration=None):
    """
    Maximalizuje objective metodou křížové entropie.

    Args:
        objective: Funkce vektor parametrů -> skóre
        dimension (int): Počet parametrů
        config (CemConfig, optional): Nastavení
        initial_mean: Počáteční střed rozdělení
        on_iteration: Volitelný příjemce signálu iteration_finished

    Returns:
        CemResult: Nejlepší parametry za celý běh a statistiky iterací
    """
    optimizer = CrossEntropyOptimizer(dimension, config, initial_mean)
    if on_iteration is not None:
        optimizer.iteration_finished.connect(on_iteration, Qt.ConnectionType.DirectConnection)

    for _ in range(optimizer.config.iterations):
        candidates = optimizer.ask()
        optimizer.tell([objective(candidate) for candidate in candidates])

    return CemResult(optimizer.best_parameters, optimizer.best_score,
                     optimizer.mean, optimizer.std, optimizer.stats)


def policy_widths(state_width, hidden_widths=CEM_HIDDEN_WIDTHS):
    """Šířky politické sítě: stav -> skryté vrstvy -> 3 akce."""
    return [int(state_width), *hidden_widths, DQN_ACTION_COUNT]


def policy_parameter_count(state_width, hidden_widths=CEM_HIDDEN_WIDTHS):
    """Počet parametrů politické sítě."""
    widths = policy_widths(state_width, hidden_widths)
    return sum(fan_out * fan_in + fan_out for fan_in, fan_out in zip(widths, widths[1:]))


def build_policy_net(parameters, state_width, hidden_widths=CEM_HIDDEN_WIDTHS):
    """Sestaví politickou síť z vektoru parametrů."""
    widths = policy_widths(state_width, hidden_widths)
    activations = ["tanh"] * len(hidden_widths) + ["identity"]
    return init_net(widths, activations, seed=0).set_flat_parameters(parameters)


def cem_policy_eval(parameters, env, action_table, state_width, hidden_widths=CEM_HIDDEN_WIDTHS,
                    price_scaler=None, full_result=False):
    """
    Odehraje epizodu s greedy politikou danou parametry sítě.

    Args:
        parameters: Vektor parametrů politické sítě
        env: Prostředí (BatteryEnv nebo obal)
        action_table: Výkony odpovídající třem akcím
        state_width (int): Šířka stavu
        hidden_widths (list): Skryté vrstvy politiky
        price_scaler (ScalerParams, optional): Škálování cen ve stavu
        full_result (bool): Vrátit celý EpisodeResult místo odměny

    Returns:
        float: Nediskontovaná odměna epizody (nebo EpisodeResult)
    """
    net = build_policy_net(parameters, state_width, hidden_widths)
    action_table = np.asarray(action_table, dtype=np.float64)

    def policy(observation):
        logits = forward(net, encode_observation(observation, price_scaler))
        return float(action_table[int(np.argmax(logits))])

    result = rollout_policy(env, policy)
    return result if full_result else result.reward
