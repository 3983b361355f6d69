#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy obalu s prognózami: horizonty, režimy a počáteční okno.
"""

import numpy as np
import pytest

from model.battery_env import BatteryEnv
from model.forecast_wrapper import ForecastWrapper, WrapperConfig, resolve_horizons, warmup_policy
from model.forecasting import Forecaster
from utils.errors import ArgumentError, ConfigurationError


# ── Horizonty a nastavení ────────────────────────────────────────────────────

def test_resolve_horizons_groups_and_numbers():
    """Skupiny se rozbalí, pořadí zápisu zůstane, duplicity zmizí."""
    assert resolve_horizons(["short"]) == (1, 2, 3)
    assert resolve_horizons(["24", "middle", 6]) == (24, 6, 12)
    assert resolve_horizons([]) == ()


def test_resolve_horizons_rejects_unknown():
    """Neznámá skupina i horizont mimo povolené hodnoty jsou chyba konfigurace."""
    with pytest.raises(ConfigurationError):
        resolve_horizons(["weekly"])
    with pytest.raises(ConfigurationError):
        resolve_horizons([5])


def test_wrapper_config_errors(series_factory):
    """Neznámý režim, chybějící horizonty nebo modely jsou chyby konfigurace."""
    with pytest.raises(ConfigurationError):
        WrapperConfig(mode="oracle")
    with pytest.raises(ConfigurationError):
        WrapperConfig(mode="perfect")
    with pytest.raises(ConfigurationError):
        WrapperConfig(mode="predicted", horizons=(1, 2), forecasters={1: Forecaster("persistence", 1)})
    with pytest.raises(ConfigurationError):
        WrapperConfig(mode="predicted", horizons=(2,), forecasters={2: Forecaster("persistence", 1)})
    with pytest.raises(ArgumentError):
        ForecastWrapper(BatteryEnv(series_factory([1.0, 2.0])), "perfect")


def test_mode_none_ignores_horizons():
    """Bez prognóz má pozorování šířku 2."""
    config = WrapperConfig(mode="none", horizons=(1, 2))
    assert config.horizons == ()
    assert config.observation_width == 2


# ── Režimy ───────────────────────────────────────────────────────────────────

def test_perfect_mode_appends_future_price(series_factory):
    """Dokonalá prognóza přidá skutečnou cenu za h hodin."""
    env = ForecastWrapper(BatteryEnv(series_factory([10.0, 20.0, 30.0])), WrapperConfig("perfect", (1,)))
    observation, info = env.reset()
    assert observation.tolist() == [0.5, 10.0, 20.0]
    assert info["observation"].forecasts == (20.0,)


def test_perfect_mode_repeats_last_price_at_episode_end(series_factory):
    """Za koncem epizody se opakuje její poslední cena."""
    series = series_factory([10.0, 20.0, 30.0, 40.0, 50.0])
    env = ForecastWrapper(BatteryEnv(series, start=1, end=4), WrapperConfig("perfect", (1, 2)))
    observation, _ = env.reset()
    assert observation[2:].tolist() == [30.0, 40.0]
    observation, _, _, _, info = env.step(0.0)
    assert observation[2:].tolist() == [40.0, 40.0]
    assert info["outcome"].observation.forecasts == (40.0, 40.0)
    assert env.observation_space.shape == (4,)


def test_predicted_mode_uses_forecasters(series_factory):
    """Předpovídaný režim přidá výstupy modelů; persistence vrací současnou cenu."""
    series = series_factory([10.0, 20.0, 30.0, 40.0])
    config = WrapperConfig("predicted", ("short",), {h: Forecaster("persistence", h, window_size=1)
                                                     for h in (1, 2, 3)})
    env = ForecastWrapper(BatteryEnv(series, start=1, end=4), config)
    observation, _ = env.reset()
    assert observation.tolist() == [0.5, 20.0, 20.0, 20.0, 20.0]
    observation, _, _, _, _ = env.step(0.0)
    assert observation[1:].tolist() == [30.0, 30.0, 30.0, 30.0]


# ── Počáteční okno ───────────────────────────────────────────────────────────

def test_warmup_uses_history_before_start(series_factory):
    """Okno se bere z hodin těsně před začátkem epizody."""
    env = BatteryEnv(series_factory(np.arange(10.0)), start=6, end=10)
    warmup = warmup_policy(env, window_size=4)
    assert warmup.indices.tolist() == [2, 3, 4, 5]
    assert not warmup.padded


def test_warmup_pads_with_first_record(series_factory):
    """Chybějící historie se doplní prvním záznamem a zapíše do metadat."""
    env = ForecastWrapper(BatteryEnv(series_factory(np.arange(10.0)), start=2, end=10),
                          WrapperConfig("perfect", (1,)))
    warmup = warmup_policy(env, window_size=5)
    assert warmup.indices.tolist() == [0, 0, 0, 0, 1]
    assert warmup.padding == 3

    env.reset()
    entry = env.metadata_entry()
    assert entry["wrapper_mode"] == "perfect"
    assert entry["horizons"] == [1]
    assert entry["warmup_padded"] is True
    assert entry["warmup_padding"] == 22
