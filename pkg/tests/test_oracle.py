#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy orákul: dynamické programování proti úplnému výčtu,
operátory genetického algoritmu a dispečink s posuvným horizontem.
"""

import itertools

import numpy as np
import pytest

from model.battery_env import BatteryEnv, BatteryParams, discretize_actions, simulate_step
from model.market_data import generate_synthetic
from model.oracle import (
    DpConfig, GaConfig, MpcGaOracle, dp_dispatch, dp_optimal, evaluate_sequences,
    ga_optimize, gaussian_mutate, mpc_ga_dispatch, one_point_crossover, tournament_select,
)
from utils.errors import ArgumentError

LOSSLESS = BatteryParams(eta_charge=1.0, eta_discharge=1.0)


def _brute_force(prices, soc, params):
    actions = discretize_actions(params)
    sequences = np.array(list(itertools.product(actions, repeat=len(prices))))
    return float(evaluate_sequences(soc, sequences, prices, params).max())


# ── Dynamické programování ───────────────────────────────────────────────────

def test_dp_matches_enumeration_lossless():
    """Bezztrátová baterie: DP dává přesné optimum úplného výčtu."""
    prices = np.random.default_rng(0).uniform(-20.0, 150.0, 6)
    solution = dp_optimal(prices, LOSSLESS, DpConfig(resolution=13), initial_soc=0.5)
    assert solution.reward == pytest.approx(_brute_force(prices, 0.5, LOSSLESS), abs=1e-6)
    assert len(solution.schedule) == 6
    assert len(solution.soc_path) == 7


def test_dp_matches_enumeration_with_default_battery():
    """S výchozí baterií leží kroky stavu mimo mřížku, DP je přesto přesné pro T = 8."""
    params = BatteryParams()
    for seed in range(10):
        prices = np.random.default_rng(seed).uniform(-20.0, 200.0, 8)
        solution = dp_optimal(prices, params, DpConfig(resolution=601), initial_soc=0.5)
        assert solution.exact
        assert solution.reward == pytest.approx(_brute_force(prices, 0.5, params), abs=1e-6)
        replayed = evaluate_sequences(0.5, [solution.schedule], prices, params)[0]
        assert replayed == pytest.approx(solution.reward, abs=1e-6)


def test_dp_buy_low_sell_high():
    """Ceny [10, 10, 200] od dolní meze: levně nakoupit a na konci prodat."""
    params = BatteryParams()
    prices = [10.0, 10.0, 200.0]
    solution = dp_optimal(prices, params, DpConfig(resolution=601), initial_soc=0.2)
    assert solution.reward == pytest.approx(_brute_force(prices, 0.2, params), abs=1e-6)
    assert min(solution.schedule[:2]) == -2.5
    assert solution.schedule[2] > 0.0


def test_dp_idles_at_zero_price():
    """Při nulové ceně se každá akce jen opotřebí: optimum je nečinnost."""
    solution = dp_optimal([0.0] * 5, LOSSLESS, DpConfig(resolution=13), initial_soc=0.5)
    assert solution.schedule == (0.0,) * 5
    assert solution.reward == 0.0


def test_dp_dispatch_replays_solution(series_factory):
    """Přehrání politiky v prostředí dá hodnotu DP."""
    prices = [30.0, 5.0, 90.0, 120.0, 10.0, 140.0]
    env = BatteryEnv(series_factory(prices), LOSSLESS, initial_soc=0.5)
    result, solution = dp_dispatch(env, DpConfig(resolution=13))
    assert result.reward == pytest.approx(solution.reward, abs=1e-6)
    assert result.steps == len(prices)


def test_dp_resolution_validation():
    """Mřížka potřebuje alespoň dva body a mez uzlů musí být kladná."""
    with pytest.raises(ArgumentError):
        DpConfig(resolution=1)
    with pytest.raises(ArgumentError):
        DpConfig(max_nodes=0)


def test_dp_falls_back_to_grid():
    """Po překročení meze uzlů nebo bez přesného režimu počítá DP na mřížce."""
    prices = [30.0, 5.0, 90.0, 120.0]
    capped = dp_optimal(prices, BatteryParams(), DpConfig(resolution=601, max_nodes=5), initial_soc=0.5)
    assert not capped.exact
    assert len(capped.layers[0]) == 601
    gridded = dp_optimal(prices, BatteryParams(), DpConfig(resolution=601, exact=False), initial_soc=0.5)
    assert gridded.reward == capped.reward
    assert len(gridded.schedule) == 4


# ── Genetický algoritmus ─────────────────────────────────────────────────────

def test_crossover_swaps_tails():
    """Potomci skládají geny rodičů po pozicích."""
    first = np.array([1.0, 1.0, 1.0, 1.0])
    second = np.array([2.0, 2.0, 2.0, 2.0])
    left, right = one_point_crossover(first, second, np.random.default_rng(0))
    np.testing.assert_array_equal(left + right, first + second)
    assert left[0] == 1.0 and left[-1] == 2.0


def test_mutation_respects_bounds():
    """Mutace zůstává v mezích výkonu; diskrétní mutace jen z tabulky akcí."""
    params = BatteryParams()
    rng = np.random.default_rng(1)
    sequence = np.full(200, 2.4)
    mutated = gaussian_mutate(sequence, GaConfig(mutation_rate=1.0, mutation_std=3.0), rng, params)
    assert mutated.min() >= params.p_min and mutated.max() <= params.p_max

    discrete = GaConfig(mutation_rate=1.0, discrete=True)
    mutated = gaussian_mutate(sequence, discrete, rng, params, discretize_actions(params))
    assert set(mutated.tolist()) <= {-2.5, 0.0, 2.5}

    untouched = gaussian_mutate(sequence, GaConfig(mutation_rate=0.0), rng, params)
    np.testing.assert_array_equal(untouched, sequence)


def test_tournament_over_whole_population_picks_best():
    """Turnaj přes celou populaci vrací nejlepšího jedince."""
    population = np.arange(5.0)[:, None]
    fitness = np.array([3.0, 9.0, 1.0, 4.0, 2.0])
    assert tournament_select(population, fitness, 5, np.random.default_rng(0))[0] == 1.0


def test_ga_never_worse_than_constant_plans():
    """Výsledek GA není horší než konstantní plány z počáteční populace."""
    params = BatteryParams()
    prices = np.array([20.0, 15.0, 180.0, 200.0])
    config = GaConfig(horizon=4, population=20, generations=10, seed=0)
    _, fitness = ga_optimize(prices, 0.5, params, config, np.random.default_rng(0))
    constants = np.vstack([np.full(4, params.p_min), np.zeros(4), np.full(4, params.p_max)])
    assert fitness >= evaluate_sequences(0.5, constants, prices, params).max()


def test_ga_config_validation():
    """Elitismus musí být menší než populace."""
    with pytest.raises(ArgumentError):
        GaConfig(population=4, elitism=4)
    with pytest.raises(ArgumentError):
        GaConfig(horizon=0)


# ── Posuvný horizont ─────────────────────────────────────────────────────────

def test_dp_dominates_discrete_mpc_ga():
    """Na deseti 72hodinových úsecích není diskrétní MPC-GA nikdy lepší než DP."""
    series = generate_synthetic(720, seed=102, spike_rate=0.02)
    params = BatteryParams()
    config = GaConfig(horizon=6, population=20, generations=10, discrete=True, seed=0)
    for start in range(0, 720, 72):
        ga = mpc_ga_dispatch(BatteryEnv(series, params, start, start + 72), config)
        replay, solution = dp_dispatch(BatteryEnv(series, params, start, start + 72))
        assert solution.exact
        assert replay.reward == pytest.approx(solution.reward, abs=1e-6)
        assert solution.reward >= ga.reward - 1e-6


def test_horizon_one_equals_greedy(series_factory):
    """S horizontem 1 a diskrétními akcemi je MPC-GA hladový dispečink."""
    params = BatteryParams()
    prices = [40.0, 250.0, 10.0, 5.0, 300.0, 90.0]
    config = GaConfig(horizon=1, population=3, generations=0, tournament_size=2, elitism=0, discrete=True)

    soc, expected = 0.5, 0.0
    actions = discretize_actions(params)
    for price in prices:
        _, soc_next, _, _, rewards = simulate_step(soc, actions, price, params)
        best = int(np.argmax(rewards))
        expected += float(rewards[best])
        soc = float(soc_next[best])

    result = mpc_ga_dispatch(BatteryEnv(series_factory(prices), params), config)
    assert result.reward == pytest.approx(expected, rel=1e-9)


def test_mpc_emits_step_signal(series_factory):
    """Po každém kroku přijde signál s plánovanou odměnou."""
    oracle = MpcGaOracle(GaConfig(horizon=2, population=6, generations=2, seed=3))
    steps = []
    oracle.step_finished.connect(lambda step, planned: steps.append(step))
    result = oracle.dispatch(BatteryEnv(series_factory([50.0, 10.0, 200.0, 60.0]), BatteryParams()))
    assert steps == [0, 1, 2, 3]
    assert result.steps == 4
