#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Prostředí bateriového úložiště připojeného k síti.
Obsahuje fyzikální parametry baterie, vývoj stavu nabití, náklady na degradaci,
bezpečnostní vrstvu korigující akce a epizodické krokování nad řadou cen
s rozhraním gymnasium.
"""

import logging
from dataclasses import dataclass, field

import gymnasium as gym
import numpy as np
import pandas as pd
from gymnasium import spaces

from config import (
    BATTERY_CAPACITY_MWH, BATTERY_CYCLES_TO_FAILURE, BATTERY_DT_HOURS,
    BATTERY_ETA_CHARGE, BATTERY_ETA_DISCHARGE, BATTERY_INVEST_COST,
    BATTERY_P_MAX_MW, BATTERY_P_MIN_MW, BATTERY_PEUKERT, BATTERY_SELF_DISCHARGE,
    BATTERY_SOC_MAX, BATTERY_SOC_MIN, INITIAL_SOC, TRACE_COLUMNS,
)
from utils.csv_io import write_csv
from utils.errors import ArgumentError, StateError, ValidationError
from utils.json_handler import save_to_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatteryParams:
    """Fyzikální a ekonomické parametry baterie."""

    capacity: float = BATTERY_CAPACITY_MWH
    soc_min: float = BATTERY_SOC_MIN
    soc_max: float = BATTERY_SOC_MAX
    p_min: float = BATTERY_P_MIN_MW
    p_max: float = BATTERY_P_MAX_MW
    eta_charge: float = BATTERY_ETA_CHARGE
    eta_discharge: float = BATTERY_ETA_DISCHARGE
    self_discharge: float = BATTERY_SELF_DISCHARGE
    peukert: float = BATTERY_PEUKERT
    cycles_to_failure: float = BATTERY_CYCLES_TO_FAILURE
    invest_cost: float = BATTERY_INVEST_COST
    dt: float = BATTERY_DT_HOURS

    def __post_init__(self):
        if not 0.0 <= self.soc_min < self.soc_max <= 1.0:
            raise ValidationError(f"Musí platit 0 ≤ soc_min < soc_max ≤ 1 ({self.soc_min}, {self.soc_max})")
        if not self.p_min < 0.0 < self.p_max:
            raise ValidationError(f"Musí platit p_min < 0 < p_max ({self.p_min}, {self.p_max})")
        if not 0.0 < self.eta_charge <= 1.0:
            raise ValidationError(f"eta_charge musí ležet v (0, 1], je {self.eta_charge}")
        if self.eta_discharge < 1.0:
            raise ValidationError(f"eta_discharge musí být ≥ 1, je {self.eta_discharge}")
        if self.capacity <= 0.0 or self.dt <= 0.0:
            raise ValidationError("Kapacita i délka kroku musí být kladné")
        if not 0.0 <= self.self_discharge < 1.0:
            raise ValidationError(f"self_discharge musí ležet v [0, 1), je {self.self_discharge}")
        if self.cycles_to_failure <= 0:
            raise ValidationError("cycles_to_failure musí být kladné")

    @property
    def total_investment(self):
        """Celková investice: cena za MWh × kapacita."""
        return self.invest_cost * self.capacity

    @classmethod
    def from_config(cls, config):
        """
        Vytvoří parametry z konfigurace (klíče `battery.*`).

        Args:
            config (ConfigModel): Načtená konfigurace

        Returns:
            BatteryParams: Parametry baterie
        """
        return cls(
            capacity=config.get("battery.capacity_mwh"),
            soc_min=config.get("battery.soc_min"),
            soc_max=config.get("battery.soc_max"),
            p_min=config.get("battery.p_min"),
            p_max=config.get("battery.p_max"),
            eta_charge=config.get("battery.eta_charge"),
            eta_discharge=config.get("battery.eta_discharge"),
            self_discharge=config.get("battery.self_discharge"),
            peukert=config.get("battery.peukert"),
            cycles_to_failure=config.get("battery.cycles_to_failure"),
            invest_cost=config.get("battery.invest_cost"),
            dt=config.get("battery.dt"),
        )


@dataclass
class BatteryState:
    """Měnící se stav baterie během epizody."""

    soc: float
    step_index: int = 0


@dataclass(frozen=True)
class EnvObservation:
    """Pozorování agenta: stav nabití, aktuální cena a případné prognózy."""

    soc: float
    current_price: float
    forecasts: tuple = ()

    def as_array(self):
        """Vrací pozorování jako vektor [soc, cena, prognózy...]."""
        return np.array([self.soc, self.current_price, *self.forecasts], dtype=np.float64)


@dataclass(frozen=True)
class StepOutcome:
    """Výsledek jednoho kroku prostředí."""

    observation: EnvObservation
    reward: float
    corrected_action: float
    grid_revenue: float
    degradation_cost: float
    done: bool
    action: float = 0.0
    price: float = 0.0
    info: dict = field(default_factory=dict)


def clamp_action(action, state, params):
    """
    Bezpečnostní vrstva: omezí akci tak, aby stav nabití zůstal v mezích.

    Kladná akce je vybíjení (prodej), záporná nabíjení (nákup). Rezerva energie
    se dělí účinností, takže opravená akce je přípustná i po aplikaci účinnosti.

    Args:
        action: Požadovaný výkon v MW (skalár nebo pole)
        state: BatteryState nebo stav nabití (skalár nebo pole)
        params (BatteryParams): Parametry baterie

    Returns:
        Opravený výkon v MW (stejný tvar jako vstup)
    """
    soc = np.asarray(getattr(state, "soc", state), dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    leaked = soc * (1.0 - params.self_discharge)

    discharge_cap = (leaked - params.soc_min) * params.capacity / (params.eta_discharge * params.dt)
    charge_cap = (leaked - params.soc_max) * params.capacity / (params.eta_charge * params.dt)

    corrected = np.where(
        action >= 0.0,
        np.minimum(np.minimum(action, params.p_max), discharge_cap),
        np.maximum(np.maximum(action, params.p_min), charge_cap),
    )
    corrected = np.clip(corrected, params.p_min, params.p_max)
    return float(corrected) if corrected.ndim == 0 else corrected


def soc_transition(soc, action, params):
    """
    Nový stav nabití: soc·(1−σ) − η·a·Δt / C.
    η je účinnost vybíjení pro a > 0, nabíjení pro a < 0 a 1 pro a = 0.
    """
    soc = np.asarray(soc, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    eta = np.where(action > 0.0, params.eta_discharge,
                   np.where(action < 0.0, params.eta_charge, 1.0))
    return soc * (1.0 - params.self_discharge) - eta * action * params.dt / params.capacity


def degradation_cost(soc, soc_next, params):
    """
    Náklady na degradaci podle změny hloubky vybití:
    |(1−soc')^k − (1−soc)^k| / (2·N_fail) · celková investice.
    """
    soc = np.asarray(soc, dtype=np.float64)
    soc_next = np.asarray(soc_next, dtype=np.float64)
    wear = np.abs((1.0 - soc_next) ** params.peukert - (1.0 - soc) ** params.peukert)
    return wear / (2.0 * params.cycles_to_failure) * params.total_investment


def simulate_step(soc, action, price, params):
    """
    Jeden krok baterie bez vedlejších efektů, vektorizovaně přes populace i mřížky.

    Args:
        soc: Stav nabití před krokem
        action: Požadovaný výkon v MW
        price: Cena v CAD/MWh
        params (BatteryParams): Parametry baterie

    Returns:
        tuple: (opravená akce, nový soc, výnos, degradace, odměna)
    """
    corrected = np.asarray(clamp_action(action, soc, params), dtype=np.float64)
    # Ořez odstraní jen zaokrouhlovací chybu na hranici
    soc_next = np.clip(soc_transition(soc, corrected, params), params.soc_min, params.soc_max)
    revenue = corrected * np.asarray(price, dtype=np.float64) * params.dt
    degradation = degradation_cost(soc, soc_next, params)
    return corrected, soc_next, revenue, degradation, revenue - degradation


def discretize_actions(params):
    """
    Tabulka tří diskrétních akcí [p_min, 0, p_max].

    Args:
        params (BatteryParams): Parametry baterie

    Returns:
        np.ndarray: Vzestupně seřazené akce
    """
    return np.array([params.p_min, 0.0, params.p_max], dtype=np.float64)


def episode_return(rewards, gamma):
    """
    Diskontovaný součet odměn Σ γ^k · r_k.

    Args:
        rewards: Posloupnost odměn
        gamma (float): Diskontní faktor v [0, 1]

    Returns:
        float: Diskontovaný výnos
    """
    if not 0.0 <= gamma <= 1.0:
        raise ArgumentError(f"gamma musí ležet v [0, 1], je {gamma}")
    rewards = np.asarray(rewards, dtype=np.float64)
    if len(rewards) == 0:
        return 0.0
    discounts = gamma ** np.arange(len(rewards), dtype=np.float64)
    return float(np.sum(discounts * rewards))


@dataclass(frozen=True)
class EpisodeResult:
    """Souhrn jedné vyhodnocovací epizody."""

    reward: float
    activity: int
    purchases: float
    sales: float
    steps: int
    trace: pd.DataFrame = None
    actions: tuple = ()


def encode_observation(observation, price_scaler=None):
    """
    Vstupní vektor agenta: stav nabití beze změny, cena a prognózy
    škálované trénovacím škálováním ceny.

    Args:
        observation (EnvObservation): Pozorování prostředí
        price_scaler (ScalerParams, optional): Škálování cenového příznaku

    Returns:
        np.ndarray: Vektor [soc, cena, prognózy...]
    """
    prices = np.array([observation.current_price, *observation.forecasts], dtype=np.float64)
    if price_scaler is not None:
        span = price_scaler.maximum[0] - price_scaler.minimum[0]
        prices = (2.0 * (prices - price_scaler.minimum[0]) / span - 1.0) if span > 0 else np.zeros_like(prices)
    return np.concatenate([[observation.soc], prices])


def rollout_policy(env, policy):
    """
    Odehraje celou epizodu s danou politikou.

    Args:
        env: BatteryEnv nebo jeho obal
        policy: Funkce EnvObservation -> výkon v MW

    Returns:
        EpisodeResult: Odměna, počet aktivit, nákupy, prodeje a průběh
    """
    _, info = env.reset()
    observation = info["observation"]
    total = purchases = sales = 0.0
    activity = steps = 0
    actions = []
    done = False
    while not done:
        _, reward, done, _, info = env.step(policy(observation))
        outcome = info["outcome"]
        observation = info["observation"]
        total += reward
        steps += 1
        actions.append(outcome.corrected_action)
        if outcome.corrected_action != 0.0:
            activity += 1
        if outcome.corrected_action < 0.0:
            purchases -= outcome.grid_revenue
        elif outcome.corrected_action > 0.0:
            sales += outcome.grid_revenue
    return EpisodeResult(total, activity, purchases, sales, steps,
                         env.unwrapped.trace_frame(), tuple(actions))


class BatteryEnv(gym.Env):
    """
    Epizodické prostředí arbitráže nad úsekem cenové řady.
    Epizoda má právě tolik kroků, kolik hodin obsahuje úsek.
    """

    metadata = {"render_modes": []}

    def __init__(self, series, params=None, start=0, end=None, initial_soc=INITIAL_SOC, record_trace=True):
        """
        Inicializace prostředí.

        Args:
            series (MarketSeries): Zdrojová řada
            params (BatteryParams, optional): Parametry baterie
            start (int): Absolutní index první hodiny epizody
            end (int, optional): Absolutní index za poslední hodinou epizody
            initial_soc (float): Výchozí stav nabití
            record_trace (bool): Ukládat průběh epizody pro export
        """
        super().__init__()
        self.series = series
        self.params = params or BatteryParams()
        self.start = int(start)
        self.end = len(series) if end is None else int(end)
        if not 0 <= self.start < self.end <= len(series):
            raise ArgumentError(f"Neplatný úsek epizody [{self.start}, {self.end}) pro řadu délky {len(series)}")

        self.initial_soc = initial_soc
        self.record_trace = record_trace
        self.prices = series.prices[self.start:self.end]
        self.timestamps = series.timestamps[self.start:self.end]

        self.action_space = spaces.Box(low=self.params.p_min, high=self.params.p_max,
                                       shape=(1,), dtype=np.float64)
        self.observation_space = spaces.Box(
            low=np.array([self.params.soc_min, -np.inf]),
            high=np.array([self.params.soc_max, np.inf]),
            dtype=np.float64,
        )

        self.state = None
        self.done = False
        self.trace = []

    @property
    def length(self):
        """Počet kroků epizody."""
        return self.end - self.start

    @property
    def absolute_index(self):
        """Absolutní index aktuální hodiny v celé řadě."""
        return self.start + min(self.state.step_index, self.length - 1)

    def _observe(self):
        price = float(self.prices[min(self.state.step_index, self.length - 1)])
        return EnvObservation(soc=float(self.state.soc), current_price=price)

    def reset_episode(self, initial_soc=None):
        """
        Zahájí novou epizodu.

        Args:
            initial_soc (float, optional): Výchozí stav nabití (jinak hodnota z konstruktoru)

        Returns:
            EnvObservation: První pozorování
        """
        soc = self.initial_soc if initial_soc is None else initial_soc
        if not self.params.soc_min <= soc <= self.params.soc_max:
            raise ArgumentError(
                f"Výchozí stav nabití {soc} leží mimo [{self.params.soc_min}, {self.params.soc_max}]"
            )
        self.state = BatteryState(soc=float(soc), step_index=0)
        self.done = False
        self.trace = []
        return self._observe()

    def apply(self, action):
        """
        Provede jeden krok s požadovaným výkonem.

        Args:
            action (float): Výkon v MW, kladný = vybíjení

        Returns:
            StepOutcome: Výsledek kroku

        Raises:
            StateError: Epizoda již skončila nebo nebyla zahájena
        """
        if self.state is None:
            raise StateError("Epizoda nebyla zahájena, zavolejte reset")
        if self.done:
            raise StateError("Epizoda skončila, krok není možný")

        action = float(np.asarray(action, dtype=np.float64).reshape(-1)[0])
        step = self.state.step_index
        price = float(self.prices[step])
        soc = self.state.soc

        corrected, soc_next, revenue, degradation, reward = (
            float(value) for value in simulate_step(soc, action, price, self.params)
        )

        self.state = BatteryState(soc=soc_next, step_index=step + 1)
        self.done = self.state.step_index >= self.length

        if self.record_trace:
            self.trace.append({
                "step": step,
                "timestamp": self.timestamps[step].isoformat(),
                "price": price,
                "action": action,
                "corrected_action": corrected,
                "soc": soc_next,
                "grid_revenue": revenue,
                "degradation": degradation,
                "reward": reward,
            })

        return StepOutcome(
            observation=self._observe(),
            reward=reward,
            corrected_action=corrected,
            grid_revenue=revenue,
            degradation_cost=degradation,
            done=self.done,
            action=action,
            price=price,
        )

    def reset(self, seed=None, options=None):
        """Rozhraní gymnasium: vrací (pozorování, info)."""
        super().reset(seed=seed)
        initial_soc = (options or {}).get("initial_soc")
        observation = self.reset_episode(initial_soc)
        return observation.as_array(), {"observation": observation}

    def step(self, action):
        """Rozhraní gymnasium: vrací (pozorování, odměna, konec, zkrácení, info)."""
        outcome = self.apply(action)
        info = {"outcome": outcome, "observation": outcome.observation}
        return outcome.observation.as_array(), outcome.reward, outcome.done, False, info

    def trace_frame(self):
        """Vrací průběh epizody jako DataFrame."""
        return pd.DataFrame(self.trace, columns=TRACE_COLUMNS)

    def export_trace(self, filename, metadata=None):
        """
        Uloží průběh epizody do CSV a metadata vedle něj (`*.meta.json`).

        Args:
            filename (str): Cesta k CSV souboru
            metadata (dict, optional): Doplňující metadata (režim obalu, výplň...)

        Returns:
            str: Cesta k CSV souboru
        """
        write_csv(self.trace_frame(), filename, TRACE_COLUMNS)
        meta = {
            "start": self.start,
            "end": self.end,
            "first_timestamp": self.timestamps[0].isoformat(),
            "initial_soc": self.initial_soc,
            "steps": len(self.trace),
        }
        meta.update(metadata or {})
        save_to_json(meta, filename[:-len(".csv")] + ".meta.json" if filename.endswith(".csv")
                     else filename + ".meta.json")
        return filename
