#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy metody křížové entropie a politické sítě.
"""

import math

import numpy as np
import pytest

from model.battery_env import BatteryEnv, BatteryParams, discretize_actions
from model.cem import (
    CemConfig, CrossEntropyOptimizer, cem_optimize, cem_policy_eval,
    policy_parameter_count,
)
from utils.errors import ArgumentError


def test_ask_returns_population():
    """ask() vrací populaci × dimenzi kandidátů."""
    optimizer = CrossEntropyOptimizer(5, CemConfig(population=12))
    assert optimizer.ask().shape == (12, 5)


def test_tell_fits_elite():
    """Nový střed je průměr elitních kandidátů."""
    config = CemConfig(population=10, elite_fraction=0.2, initial_std=1.0, std_floor=0.0)
    optimizer = CrossEntropyOptimizer(2, config)
    samples = optimizer.ask()
    scores = samples[:, 0]
    optimizer.tell(scores)
    elite = samples[np.argsort(-scores)[:2]]
    np.testing.assert_allclose(optimizer.mean, elite.mean(axis=0))
    np.testing.assert_allclose(optimizer.std, elite.std(axis=0))
    assert optimizer.best_score == pytest.approx(scores.max())


def test_std_floor():
    """Odchylka neklesne pod spodní mez."""
    config = CemConfig(population=4, elite_fraction=0.25, std_floor=0.3)
    optimizer = CrossEntropyOptimizer(3, config)
    optimizer.ask()
    optimizer.tell([1.0, 2.0, 3.0, 4.0])
    assert np.all(optimizer.std == 0.3)


def test_non_finite_scores_are_dropped():
    """Nekonečná skóre se vyřadí; populace bez konečných skóre rozdělení nezmění."""
    optimizer = CrossEntropyOptimizer(2, CemConfig(population=3, elite_fraction=0.34))
    samples = optimizer.ask()
    optimizer.tell([np.nan, 5.0, np.inf])
    np.testing.assert_array_equal(optimizer.best_parameters, samples[1])
    assert optimizer.best_score == 5.0

    mean = optimizer.mean.copy()
    optimizer.ask()
    optimizer.tell([np.nan, np.nan, -np.inf])
    np.testing.assert_array_equal(optimizer.mean, mean)
    assert math.isnan(optimizer.stats[-1]["mean"])
    assert optimizer.best_score == 5.0


def test_config_validation():
    """Neplatný podíl elit nebo populace je chyba argumentu."""
    with pytest.raises(ArgumentError):
        CemConfig(elite_fraction=0.0)
    with pytest.raises(ArgumentError):
        CemConfig(population=0)


def test_optimize_finds_quadratic_maximum():
    """Na kvadratické funkci se střed přiblíží maximu a signál přijde po každé iteraci."""
    config = CemConfig(population=60, elite_fraction=0.2, iterations=40, initial_std=2.0, seed=1)
    received = []
    result = cem_optimize(lambda x: -np.sum((x - 3.0) ** 2), 2, config,
                          on_iteration=lambda *args: received.append(args))
    np.testing.assert_allclose(result.mean, [3.0, 3.0], atol=0.1)
    assert result.best_score > -0.05
    assert len(received) == 40
    assert [entry["iteration"] for entry in result.stats] == list(range(1, 41))


def test_optimize_is_deterministic():
    """Stejné semínko dává stejný výsledek."""
    config = CemConfig(population=8, iterations=3, seed=5)
    first = cem_optimize(lambda x: -np.sum(x ** 2), 4, config)
    second = cem_optimize(lambda x: -np.sum(x ** 2), 4, config)
    np.testing.assert_array_equal(first.best_parameters, second.best_parameters)


def test_policy_parameter_count():
    """Počet parametrů politiky odpovídá vrstvám stav -> 8 -> 3."""
    assert policy_parameter_count(2, (8,)) == 2 * 8 + 8 + 8 * 3 + 3


def test_zero_policy_at_full_battery_earns_nothing(series_factory):
    """Nulové parametry volí nabíjení, které plná baterie neprovede: odměna 0."""
    params = BatteryParams()
    env = BatteryEnv(series_factory([40.0, 60.0, 80.0]), params, initial_soc=params.soc_max)
    result = cem_policy_eval(np.zeros(policy_parameter_count(2, (8,))), env, discretize_actions(params),
                             2, (8,), full_result=True)
    assert result.reward == 0.0
    assert result.activity == 0
