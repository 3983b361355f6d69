#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Obal prostředí, který k pozorování přidává prognózy ceny.
Režimy: none (bez prognóz), perfect (skutečné budoucí ceny)
a predicted (výstupy zmrazených prognostických modelů).
"""

import dataclasses
import logging
from dataclasses import dataclass, field

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from config import DEFAULT_WINDOW_SIZE, FORECAST_HORIZONS, HORIZON_GROUPS, WRAPPER_MODES
from utils.errors import ArgumentError, ConfigurationError

logger = logging.getLogger(__name__)


def resolve_horizons(values):
    """
    Převede zápis horizontů na seřazenou n-tici.
    Přijímá čísla i názvy skupin (short, middle, long, all).

    Args:
        values: Seznam čísel nebo názvů skupin

    Returns:
        tuple: Horizonty v pořadí zápisu bez duplicit
    """
    horizons = []
    for value in values or []:
        text = str(value).strip()
        expanded = HORIZON_GROUPS.get(text)
        if expanded is None:
            try:
                expanded = [int(text)]
            except ValueError as e:
                raise ConfigurationError(f"Neznámý horizont nebo skupina: {text}") from e
        for horizon in expanded:
            if horizon not in FORECAST_HORIZONS:
                raise ConfigurationError(f"Horizont {horizon} není mezi {FORECAST_HORIZONS}")
            if horizon not in horizons:
                horizons.append(horizon)
    return tuple(horizons)


@dataclass(frozen=True)
class WrapperConfig:
    """Režim obalu, horizonty a prognostické modely."""

    mode: str = "none"
    horizons: tuple = ()
    forecasters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in WRAPPER_MODES:
            raise ConfigurationError(f"Neznámý režim obalu: {self.mode}")
        horizons = resolve_horizons(self.horizons) if self.mode != "none" else ()
        if self.mode != "none" and not horizons:
            raise ConfigurationError(f"Režim {self.mode} vyžaduje alespoň jeden horizont")
        if self.mode == "predicted":
            missing = [h for h in horizons if h not in self.forecasters]
            if missing:
                raise ConfigurationError(f"Chybí prognostické modely pro horizonty {missing}")
            for horizon in horizons:
                if self.forecasters[horizon].horizon != horizon:
                    raise ConfigurationError(
                        f"Model pro horizont {horizon} předpovídá na {self.forecasters[horizon].horizon} h"
                    )
        object.__setattr__(self, "horizons", horizons)

    @property
    def observation_width(self):
        return 2 + len(self.horizons)


@dataclass(frozen=True)
class WarmupHistory:
    """Indexy záznamů tvořících počáteční okno a příznak výplně."""

    indices: np.ndarray
    padded: bool
    padding: int = 0


def warmup_policy(env, window_size=DEFAULT_WINDOW_SIZE):
    """
    Připraví historii před začátkem epizody.
    Chybějící záznamy se nahradí opakováním prvního záznamu řady.

    Args:
        env: BatteryEnv nebo jeho obal
        window_size (int): Délka okna

    Returns:
        WarmupHistory: Indexy historie a příznak výplně
    """
    start = env.unwrapped.start
    available = min(start, window_size)
    padding = window_size - available
    indices = np.concatenate([np.zeros(padding, dtype=np.int64),
                              np.arange(start - available, start, dtype=np.int64)])
    return WarmupHistory(indices, padding > 0, padding)


def wrap_observation(base, index, config, prices, episode_end, predictions=None):
    """
    Přidá k pozorování hodnoty pro nakonfigurované horizonty.

    Args:
        base (EnvObservation): Pozorování prostředí
        index (int): Absolutní index aktuální hodiny
        config (WrapperConfig): Nastavení obalu
        prices: Ceny celé řady
        episode_end (int): Absolutní index za koncem epizody
        predictions (dict, optional): horizont -> prognóza pro tuto hodinu

    Returns:
        EnvObservation: Rozšířené pozorování
    """
    if config.mode == "none":
        return base
    if config.mode == "perfect":
        # Za koncem epizody se opakuje poslední známá cena
        last = episode_end - 1
        values = tuple(float(prices[min(index + h, last)]) for h in config.horizons)
    else:
        values = tuple(float(predictions[h]) for h in config.horizons)
    return dataclasses.replace(base, forecasts=values)


class ForecastWrapper(gym.Wrapper):
    """Obal prostředí přidávající prognózy do pozorování."""

    def __init__(self, env, config):
        """
        Inicializace obalu.

        Args:
            env (BatteryEnv): Obalované prostředí
            config (WrapperConfig): Režim, horizonty a modely
        """
        super().__init__(env)
        if not isinstance(config, WrapperConfig):
            raise ArgumentError("config musí být WrapperConfig")
        self.config = config
        width = config.observation_width
        base = env.unwrapped
        self.observation_space = spaces.Box(
            low=np.array([base.params.soc_min] + [-np.inf] * (width - 1)),
            high=np.array([base.params.soc_max] + [np.inf] * (width - 1)),
            dtype=np.float64,
        )
        self.warmup = None
        self._cache = {}

    @property
    def window_size(self):
        sizes = [f.window_size for f in self.config.forecasters.values()]
        return max(sizes) if self.config.mode == "predicted" and sizes else DEFAULT_WINDOW_SIZE

    def _predictions_at(self, index):
        if self.config.mode != "predicted":
            return None
        return {h: self._cache[h][index - self.env.unwrapped.start] for h in self.config.horizons}

    def _precompute(self):
        """Prognózy pro všechny hodiny epizody; každá používá jen záznamy ≤ t."""
        base = self.env.unwrapped
        if self.config.mode != "predicted" or self._cache:
            return
        indices = np.arange(base.start, base.end)
        for horizon in self.config.horizons:
            self._cache[horizon] = self.config.forecasters[horizon].predict_indices(base.series, indices)

    def _wrap(self, observation):
        base = self.env.unwrapped
        index = base.absolute_index
        return wrap_observation(observation, index, self.config, base.series.prices, base.end,
                                self._predictions_at(index))

    def reset(self, *, seed=None, options=None):
        """Zahájí epizodu a vrátí rozšířené pozorování."""
        _, info = self.env.reset(seed=seed, options=options)
        self.warmup = warmup_policy(self.env, self.window_size)
        if self.warmup.padded and self.config.mode == "predicted":
            logger.warning("Okno prognóz doplněno %d opakováními prvního záznamu", self.warmup.padding)
        self._precompute()
        observation = self._wrap(info["observation"])
        return observation.as_array(), {**info, "observation": observation}

    def step(self, action):
        """Provede krok a vrátí rozšířené pozorování."""
        _, reward, terminated, truncated, info = self.env.step(action)
        observation = self._wrap(info["observation"])
        outcome = dataclasses.replace(info["outcome"], observation=observation)
        return observation.as_array(), reward, terminated, truncated, {
            **info, "observation": observation, "outcome": outcome,
        }

    def metadata_entry(self):
        """Metadata běhu pro `trace.meta.json`."""
        return {
            "wrapper_mode": self.config.mode,
            "horizons": list(self.config.horizons),
            "warmup_padded": bool(self.warmup.padded) if self.warmup else False,
            "warmup_padding": int(self.warmup.padding) if self.warmup else 0,
        }
