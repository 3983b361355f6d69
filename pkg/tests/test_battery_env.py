#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testy prostředí baterie: vývoj stavu nabití, degradace, bezpečnostní vrstva
a epizodické krokování.
"""

import json

import numpy as np
import pandas as pd
import pytest

from config import TRACE_COLUMNS
from model.battery_env import (
    BatteryEnv, BatteryParams, BatteryState, clamp_action, degradation_cost,
    discretize_actions, episode_return, rollout_policy, simulate_step, soc_transition,
)
from utils.errors import ArgumentError, StateError, ValidationError

PARAMS = BatteryParams()


# ── Rovnice baterie ──────────────────────────────────────────────────────────

def test_charge_golden_values():
    """Nabíjení 2.5 MW z 0.5: stav 0.73, degradace 57.245, nákup 250."""
    corrected, soc, revenue, degradation, reward = simulate_step(0.5, -2.5, 100.0, PARAMS)
    assert float(corrected) == -2.5
    assert float(soc) == pytest.approx(0.73, rel=1e-6)
    assert float(degradation) == pytest.approx(57.245, abs=0.01)
    assert float(revenue) == pytest.approx(-250.0, rel=1e-6)
    assert float(reward) == pytest.approx(-250.0 - float(degradation), rel=1e-9)


def test_discharge_golden_values():
    """Vybíjení 2.5 MW z 0.5 za 100 CAD/MWh: výnos 250, stav 0.228261."""
    corrected, soc, revenue, degradation, reward = simulate_step(0.5, 2.5, 100.0, PARAMS)
    assert float(corrected) == 2.5
    assert float(revenue) == pytest.approx(250.0, rel=1e-6)
    assert float(soc) == pytest.approx(0.5 - 0.25 / 0.92, rel=1e-6)
    assert float(soc) == pytest.approx(0.228261, abs=1e-6)
    assert float(degradation) == pytest.approx(72.62, abs=0.05)
    assert float(reward) == pytest.approx(250.0 - float(degradation), rel=1e-9)


def test_idle_step_has_no_cost():
    """Nečinnost nemění stav a nic nestojí."""
    _, soc, revenue, degradation, reward = simulate_step(0.5, 0.0, 80.0, PARAMS)
    assert float(soc) == 0.5
    assert float(revenue) == 0.0
    assert float(degradation) == 0.0
    assert float(reward) == 0.0


def test_self_discharge():
    """Samovybíjení 1 % sníží stav 0.5 na 0.495."""
    params = BatteryParams(self_discharge=0.01)
    assert float(soc_transition(0.5, 0.0, params)) == pytest.approx(0.495)


def test_degradation_is_symmetric():
    """Degradace závisí jen na velikosti změny hloubky vybití."""
    assert float(degradation_cost(0.3, 0.6, PARAMS)) == pytest.approx(float(degradation_cost(0.6, 0.3, PARAMS)))


def test_round_trip_loses_money():
    """Nabití a vybití zpět na stejný stav při stejné ceně je vždy ztrátové."""
    for soc in (0.25, 0.4, 0.55):
        for price in (0.0, 50.0, 300.0):
            _, charged, _, _, first = simulate_step(soc, PARAMS.p_min, price, PARAMS)
            back = -PARAMS.p_min * PARAMS.eta_charge / PARAMS.eta_discharge
            _, restored, _, _, second = simulate_step(charged, back, price, PARAMS)
            assert float(restored) == pytest.approx(soc, abs=1e-12)
            assert float(first) + float(second) < 0.0


def test_invalid_params():
    """Neplatné meze jsou chyba validace."""
    with pytest.raises(ValidationError):
        BatteryParams(soc_min=0.9, soc_max=0.1)
    with pytest.raises(ValidationError):
        BatteryParams(eta_charge=1.2)


# ── Bezpečnostní vrstva ──────────────────────────────────────────────────────

def test_clamp_at_bounds():
    """Na dolní mezi nelze vybíjet, na horní nabíjet."""
    assert clamp_action(2.5, BatteryState(soc=0.2), PARAMS) == 0.0
    assert clamp_action(-2.5, BatteryState(soc=0.8), PARAMS) == 0.0


def test_clamp_partial_headroom():
    """Zbývající rezerva se dělí účinností, nový stav skončí přesně na mezi."""
    corrected = clamp_action(2.5, 0.25, PARAMS)
    assert corrected == pytest.approx(0.05 * 10.0 * 0.92)
    assert float(soc_transition(0.25, corrected, PARAMS)) == pytest.approx(0.2)


def test_clamp_keeps_soc_in_bounds():
    """Pro náhodné stavy a akce zůstane stav v mezích a korekce nezmění směr."""
    rng = np.random.default_rng(0)
    soc = rng.uniform(PARAMS.soc_min, PARAMS.soc_max, 5000)
    actions = rng.uniform(-6.0, 6.0, 5000)
    corrected = clamp_action(actions, soc, PARAMS)
    soc_next = soc_transition(soc, corrected, PARAMS)
    assert np.all(soc_next >= PARAMS.soc_min - 1e-12)
    assert np.all(soc_next <= PARAMS.soc_max + 1e-12)
    assert np.all(np.abs(corrected) <= np.minimum(np.abs(actions), PARAMS.p_max) + 1e-12)
    assert np.all(corrected * actions >= 0.0)


def test_clamp_is_idempotent():
    """Opravená akce se druhým průchodem bezpečnostní vrstvou nezmění."""
    rng = np.random.default_rng(1)
    soc = rng.uniform(PARAMS.soc_min, PARAMS.soc_max, 10_000)
    corrected = clamp_action(rng.uniform(-6.0, 6.0, 10_000), soc, PARAMS)
    np.testing.assert_array_equal(clamp_action(corrected, soc, PARAMS), corrected)


def test_clamp_keeps_feasible_actions():
    """Přípustná akce projde bezpečnostní vrstvou beze změny."""
    rng = np.random.default_rng(2)
    soc = rng.uniform(PARAMS.soc_min, PARAMS.soc_max, 10_000)
    discharge_cap = np.minimum(PARAMS.p_max, (soc - PARAMS.soc_min) * PARAMS.capacity / PARAMS.eta_discharge)
    charge_cap = np.maximum(PARAMS.p_min, (soc - PARAMS.soc_max) * PARAMS.capacity / PARAMS.eta_charge)
    actions = np.where(rng.random(10_000) < 0.5, charge_cap, discharge_cap) * rng.uniform(0.0, 0.999, 10_000)
    np.testing.assert_array_equal(clamp_action(actions, soc, PARAMS), actions)
    soc_next = soc_transition(soc, actions, PARAMS)
    assert np.all((soc_next >= PARAMS.soc_min) & (soc_next <= PARAMS.soc_max))


def test_discretize_actions():
    """Tři akce: plné nabíjení, nečinnost, plné vybíjení."""
    assert discretize_actions(PARAMS).tolist() == [-2.5, 0.0, 2.5]


def test_episode_return():
    """Diskontovaný součet a kontrola γ."""
    assert episode_return([1.0, 1.0, 1.0], 0.5) == pytest.approx(1.75)
    assert episode_return([], 0.9) == 0.0
    with pytest.raises(ArgumentError):
        episode_return([1.0], 1.5)


# ── Epizody ──────────────────────────────────────────────────────────────────

def test_episode_length_and_state_error(series_factory):
    """Epizoda má tolik kroků jako úsek; další krok je chyba stavu."""
    env = BatteryEnv(series_factory([50.0] * 10), PARAMS, start=2, end=7)
    env.reset_episode()
    steps = 0
    done = False
    while not done:
        done = env.apply(0.0).done
        steps += 1
    assert steps == 5
    with pytest.raises(StateError):
        env.apply(0.0)


def test_step_before_reset(series_factory):
    """Krok bez zahájení epizody je chyba stavu."""
    env = BatteryEnv(series_factory([50.0] * 3))
    with pytest.raises(StateError):
        env.apply(1.0)


def test_reset_rejects_soc_out_of_bounds(series_factory):
    """Výchozí stav mimo meze je chyba argumentu."""
    env = BatteryEnv(series_factory([50.0] * 3))
    with pytest.raises(ArgumentError):
        env.reset_episode(0.95)


def test_gym_interface(series_factory):
    """reset a step vracejí tvary podle rozhraní gymnasium."""
    env = BatteryEnv(series_factory([20.0, 40.0, 60.0]))
    observation, info = env.reset(seed=0)
    assert observation.tolist() == [0.5, 20.0]
    assert info["observation"].current_price == 20.0
    observation, reward, terminated, truncated, info = env.step(np.array([1.0]))
    assert observation.shape == (2,)
    assert observation[1] == 40.0
    assert terminated is False and truncated is False
    assert info["outcome"].corrected_action == 1.0
    assert reward == pytest.approx(info["outcome"].grid_revenue - info["outcome"].degradation_cost)


def test_random_episode_stays_feasible(series_factory):
    """10 000 kroků s náhodnými akcemi: stav v mezích, výkon v limitech, odměny konečné."""
    rng = np.random.default_rng(5)
    env = BatteryEnv(series_factory(rng.uniform(-50.0, 500.0, 10_000)), PARAMS, record_trace=False)
    env.reset(seed=0)
    steps, terminated = 0, False
    while not terminated:
        observation, reward, terminated, truncated, info = env.step(np.array([rng.uniform(-6.0, 6.0)]))
        steps += 1
        assert PARAMS.soc_min <= observation[0] <= PARAMS.soc_max
        assert PARAMS.p_min <= info["outcome"].corrected_action <= PARAMS.p_max
        assert np.isfinite(reward) and not truncated
    assert steps == 10_000


def test_rollout_accounting(series_factory):
    """Nákup za nízkou a prodej za vysokou cenu: dvě aktivity, nákupy 25, prodeje 250."""
    env = BatteryEnv(series_factory([10.0, 100.0]), PARAMS)
    plan = iter([-2.5, 2.5])
    result = rollout_policy(env, lambda observation: next(plan))
    assert result.steps == 2
    assert result.activity == 2
    assert result.purchases == pytest.approx(25.0)
    assert result.sales == pytest.approx(250.0)
    assert result.reward == pytest.approx(result.trace["reward"].sum())


def test_trace_export(series_factory, tmp_path):
    """Průběh epizody se uloží do CSV s metadaty vedle."""
    env = BatteryEnv(series_factory([30.0, 35.0, 40.0]), PARAMS)
    env.reset_episode()
    for action in (-2.5, 0.0, 2.5):
        env.apply(action)
    path = env.export_trace(str(tmp_path / "trace.csv"), {"wrapper_mode": "none"})

    frame = pd.read_csv(path)
    assert list(frame.columns) == TRACE_COLUMNS
    assert frame["step"].tolist() == [0, 1, 2]
    assert frame["corrected_action"].tolist() == [-2.5, 0.0, 2.5]
    meta = json.loads((tmp_path / "trace.meta.json").read_text(encoding="utf-8"))
    assert meta["steps"] == 3
    assert meta["wrapper_mode"] == "none"
