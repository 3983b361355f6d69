#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Agent DQN nad třemi diskrétními akcemi baterie.
Obsahuje zásobník zkušeností, ε-greedy průzkum, cílovou síť
a trénovací i vyhodnocovací smyčku nad epizodami prostředí.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from PySide6.QtCore import QObject, Qt, Signal

from config import (
    DQN_ACTION_COUNT, DQN_BATCH_SIZE, DQN_BUFFER_SIZE, DQN_EPSILON_DECAY_FRACTION,
    DQN_EPSILON_END, DQN_EPSILON_START, DQN_GAMMA, DQN_HIDDEN_WIDTHS,
    DQN_LEARNING_RATE, DQN_SYNC_INTERVAL, DQN_TRAIN_EVERY,
)
from model.battery_env import BatteryParams, discretize_actions, encode_observation, rollout_policy
from model.market_data import ScalerParams
from model.neural_core import (
    OptimizerState, backward, forward, init_net, net_from_dict, net_to_dict, optimize_step,
)
from utils.errors import ArgumentError, ValidationError
from utils.json_handler import load_from_json, save_to_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    """Jedna zkušenost (stav, akce, odměna, další stav, konec)."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayBuffer:
    """Kruhový zásobník zkušeností s rovnoměrným výběrem."""

    def __init__(self, capacity, state_width):
        """
        Inicializace zásobníku.

        Args:
            capacity (int): Maximální počet zkušeností
            state_width (int): Šířka stavového vektoru
        """
        if capacity < 1:
            raise ArgumentError(f"Kapacita zásobníku musí být alespoň 1, je {capacity}")
        self.capacity = int(capacity)
        self.state_width = int(state_width)
        self.states = np.zeros((self.capacity, self.state_width))
        self.actions = np.zeros(self.capacity, dtype=np.int64)
        self.rewards = np.zeros(self.capacity)
        self.next_states = np.zeros((self.capacity, self.state_width))
        self.dones = np.zeros(self.capacity)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, transition):
        """Vloží zkušenost; po zaplnění přepíše nejstarší."""
        state = np.asarray(transition.state, dtype=np.float64)
        if state.shape != (self.state_width,):
            raise ArgumentError(f"Stav má tvar {state.shape}, zásobník očekává ({self.state_width},)")
        self.states[self.cursor] = state
        self.actions[self.cursor] = transition.action
        self.rewards[self.cursor] = transition.reward
        self.next_states[self.cursor] = transition.next_state
        self.dones[self.cursor] = float(transition.done)
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        """
        Rovnoměrný výběr bez opakování.

        Returns:
            dict: Pole states, actions, rewards, next_states, dones
        """
        chosen = rng.choice(self.size, size=batch_size, replace=False)
        return {
            "states": self.states[chosen],
            "actions": self.actions[chosen],
            "rewards": self.rewards[chosen],
            "next_states": self.next_states[chosen],
            "dones": self.dones[chosen],
        }

    def contents(self):
        """Uložené zkušenosti od nejstarší po nejnovější."""
        start = self.cursor if self.size == self.capacity else 0
        order = [(start + offset) % self.capacity for offset in range(self.size)]
        return [Transition(self.states[i].copy(), int(self.actions[i]), float(self.rewards[i]),
                           self.next_states[i].copy(), bool(self.dones[i])) for i in order]


@dataclass(frozen=True)
class EpsilonSchedule:
    """Lineární pokles ε z `start` na `end` během `decay_steps` kroků."""

    start: float = DQN_EPSILON_START
    end: float = DQN_EPSILON_END
    decay_steps: int = 0

    def __post_init__(self):
        if not (0.0 <= self.end <= 1.0 and 0.0 <= self.start <= 1.0) or self.end > self.start:
            raise ArgumentError(f"Neplatný průběh ε: {self.start} -> {self.end}")

    def value(self, step):
        if self.decay_steps <= 0:
            return self.end
        fraction = min(step / self.decay_steps, 1.0)
        return self.start + fraction * (self.end - self.start)


@dataclass(frozen=True)
class DqnConfig:
    """Hyperparametry agenta DQN."""

    gamma: float = DQN_GAMMA
    learning_rate: float = DQN_LEARNING_RATE
    buffer_size: int = DQN_BUFFER_SIZE
    batch_size: int = DQN_BATCH_SIZE
    sync_interval: int = DQN_SYNC_INTERVAL
    epsilon_start: float = DQN_EPSILON_START
    epsilon_end: float = DQN_EPSILON_END
    epsilon_decay_fraction: float = DQN_EPSILON_DECAY_FRACTION
    hidden_widths: tuple = tuple(DQN_HIDDEN_WIDTHS)
    reward_scale: float = 1.0
    train_every: int = DQN_TRAIN_EVERY
    optimizer: str = "adam"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ArgumentError(f"gamma musí ležet v [0, 1], je {self.gamma}")
        if self.sync_interval < 1 or self.train_every < 1 or self.batch_size < 1:
            raise ArgumentError("sync_interval, train_every a batch_size musí být alespoň 1")
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))

    @classmethod
    def from_config(cls, config):
        """Vytvoří hyperparametry z klíčů `dqn.*`."""
        return cls(
            gamma=config.get("dqn.gamma"),
            learning_rate=config.get("dqn.learning_rate"),
            buffer_size=config.get("dqn.buffer_size"),
            batch_size=config.get("dqn.batch_size"),
            sync_interval=config.get("dqn.sync_interval"),
            epsilon_start=config.get("dqn.epsilon_start"),
            epsilon_end=config.get("dqn.epsilon_end"),
            epsilon_decay_fraction=config.get("dqn.epsilon_decay_fraction"),
            hidden_widths=config.get("dqn.hidden_widths"),
            reward_scale=config.get("dqn.reward_scale"),
            train_every=config.get("dqn.train_every"),
        )


class DqnAgent(QObject):
    """
    Agent DQN: Q-síť se třemi výstupy, cílová síť a zásobník zkušeností.
    Po každé trénovací epizodě vysílá signál episode_finished(seed, epizoda, odměna).
    """

    episode_finished = Signal(int, int, float)

    def __init__(self, state_width, config=None, seed=0, price_scaler=None, action_table=None):
        """
        Inicializace agenta.

        Args:
            state_width (int): Šířka stavu (2 + počet horizontů prognóz)
            config (DqnConfig, optional): Hyperparametry
            seed (int): Semínko sítě i náhodných voleb
            price_scaler (ScalerParams, optional): Škálování cen ve stavu
            action_table: Výkony odpovídající indexům akcí
        """
        super().__init__()
        self.config = config or DqnConfig()
        self.seed = int(seed)
        self.state_width = int(state_width)
        self.price_scaler = price_scaler
        self.action_table = (np.asarray(action_table, dtype=np.float64) if action_table is not None
                             else discretize_actions(BatteryParams()))

        widths = [self.state_width, *self.config.hidden_widths, DQN_ACTION_COUNT]
        activations = ["relu"] * len(self.config.hidden_widths) + ["identity"]
        self.q_net = init_net(widths, activations, self.seed)
        self.target_net = self.q_net.copy()
        self.optimizer = OptimizerState(self.q_net, self.config.optimizer, self.config.learning_rate)
        self.buffer = ReplayBuffer(self.config.buffer_size, self.state_width)
        self.schedule = EpsilonSchedule(self.config.epsilon_start, self.config.epsilon_end, 0)
        self.rng = np.random.default_rng(self.seed)
        self.steps = 0

    @property
    def gamma(self):
        return self.config.gamma

    def encode(self, observation):
        """Převede pozorování prostředí na vstup Q-sítě."""
        return encode_observation(observation, self.price_scaler)

    def greedy_action(self, observation):
        """Výkon v MW podle greedy politiky."""
        return float(self.action_table[select_action(self, self.encode(observation), 0.0, self.rng)])


def select_action(agent, state, epsilon, rng):
    """
    ε-greedy volba akce; shodu v argmax vyhrává nejnižší index.

    Args:
        agent (DqnAgent): Agent
        state: Vstupní vektor Q-sítě
        epsilon (float): Pravděpodobnost náhodné akce
        rng (np.random.Generator): Generátor náhodných čísel

    Returns:
        int: Index akce
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ArgumentError(f"ε musí ležet v [0, 1], je {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(DQN_ACTION_COUNT))
    return int(np.argmax(forward(agent.q_net, state)))


def bellman_targets(agent, batch):
    """
    Cíle r·s + γ·max_a' Q(s', a'; θ⁻)·(1 − konec), kde s je měřítko odměny.
    Počítá se jen z cílové sítě.

    Args:
        agent (DqnAgent): Agent
        batch (dict): Dávka ze zásobníku

    Returns:
        np.ndarray: Cílové hodnoty
    """
    rewards = np.asarray(batch["rewards"], dtype=np.float64)
    if len(rewards) == 0:
        raise ArgumentError("Dávka je prázdná")
    next_values = forward(agent.target_net, np.asarray(batch["next_states"], dtype=np.float64)).max(axis=1)
    dones = np.asarray(batch["dones"], dtype=np.float64)
    return agent.config.reward_scale * rewards + agent.gamma * next_values * (1.0 - dones)


def train_step(agent, rng, batch_size=None):
    """
    Jeden krok učení Q-sítě na náhodné dávce ze zásobníku.

    Args:
        agent (DqnAgent): Agent
        rng (np.random.Generator): Generátor pro výběr dávky
        batch_size (int, optional): Velikost dávky (jinak z konfigurace)

    Returns:
        float: Hodnota ztráty, nebo None při nedostatečně naplněném zásobníku
    """
    batch_size = batch_size or agent.config.batch_size
    if len(agent.buffer) < batch_size:
        return None

    batch = agent.buffer.sample(batch_size, rng)
    targets = bellman_targets(agent, batch)
    target_matrix = np.zeros((batch_size, DQN_ACTION_COUNT))
    mask = np.zeros((batch_size, DQN_ACTION_COUNT))
    rows = np.arange(batch_size)
    target_matrix[rows, batch["actions"]] = targets
    mask[rows, batch["actions"]] = 1.0

    gradients, loss = backward(agent.q_net, batch["states"], target_matrix, "mse", mask)
    optimize_step(agent.q_net, gradients, agent.optimizer)
    return loss


def sync_target(agent):
    """Zkopíruje parametry Q-sítě do cílové sítě."""
    agent.target_net = agent.q_net.copy()
    return agent


def run_training(agent, env, episodes):
    """
    Trénuje jednoho agenta zadaný počet epizod.

    ε klesá lineárně během prvních `epsilon_decay_fraction` všech kroků,
    cílová síť se synchronizuje každých `sync_interval` kroků.

    Args:
        agent (DqnAgent): Agent
        env: Trénovací prostředí (BatteryEnv nebo obal)
        episodes (int): Počet epizod

    Returns:
        list: Nediskontované odměny epizod
    """
    if episodes < 1:
        raise ArgumentError(f"Počet epizod musí být alespoň 1, je {episodes}")
    length = env.unwrapped.length
    decay_steps = int(round(agent.config.epsilon_decay_fraction * episodes * length))
    agent.schedule = EpsilonSchedule(agent.config.epsilon_start, agent.config.epsilon_end, decay_steps)

    rewards = []
    for episode in range(1, episodes + 1):
        _, info = env.reset(seed=agent.seed + episode)
        state = agent.encode(info["observation"])
        total = 0.0
        done = False
        while not done:
            action = select_action(agent, state, agent.schedule.value(agent.steps), agent.rng)
            _, reward, done, _, info = env.step(agent.action_table[action])
            next_state = agent.encode(info["observation"])
            agent.buffer.add(Transition(state, action, reward, next_state, done))
            agent.steps += 1
            if agent.steps % agent.config.train_every == 0:
                train_step(agent, agent.rng)
            if agent.steps % agent.config.sync_interval == 0:
                sync_target(agent)
            total += reward
            state = next_state

        rewards.append(total)
        agent.episode_finished.emit(agent.seed, episode, total)
    return rewards


@dataclass
class TrainingResult:
    """Výsledek tréninku přes více semínek."""

    agents: dict
    history: list = field(default_factory=list)
    mean_curve: np.ndarray = None
    std_curve: np.ndarray = None


def train_agent(env_factory, state_width, config, episodes, seeds, price_scaler=None,
                action_table=None, on_episode=None):
    """
    Natrénuje agenta pro každé semínko a spočítá průměrnou křivku odměn.

    Args:
        env_factory: Funkce bez argumentů vracející nové trénovací prostředí
        state_width (int): Šířka stavu
        config (DqnConfig): Hyperparametry
        episodes (int): Počet epizod na semínko
        seeds (list): Semínka
        price_scaler (ScalerParams, optional): Škálování cen ve stavu
        action_table: Tabulka akcí
        on_episode: Volitelný příjemce signálu episode_finished

    Returns:
        TrainingResult: Agenti, historie (epizoda, semínko, odměna), průměr a odchylka
    """
    if not seeds:
        raise ArgumentError("Seznam semínek je prázdný")
    agents = {}
    history = []
    curves = []
    for seed in seeds:
        agent = DqnAgent(state_width, config, seed, price_scaler, action_table)
        if on_episode is not None:
            agent.episode_finished.connect(on_episode, Qt.ConnectionType.DirectConnection)
        rewards = run_training(agent, env_factory(), episodes)
        agents[seed] = agent
        curves.append(rewards)
        history.extend({"episode": i + 1, "seed": seed, "reward": r} for i, r in enumerate(rewards))
    curves = np.asarray(curves)
    return TrainingResult(agents, history, curves.mean(axis=0), curves.std(axis=0))


def evaluate_policy(agent, env):
    """
    Vyhodnotí greedy politiku (ε = 0) na jedné celé epizodě; agent se nemění.

    Returns:
        EpisodeResult: Odměna, počet aktivit (kroků s nenulovou opravenou akcí),
        nákupy, prodeje a průběh epizody
    """
    rng = np.random.default_rng(0)

    def policy(observation):
        return float(agent.action_table[select_action(agent, agent.encode(observation), 0.0, rng)])

    return rollout_policy(env, policy)


def save_agent(agent, filename):
    """Uloží Q-síť agenta s metadaty stavu."""
    metadata = {
        "state_width": agent.state_width,
        "seed": agent.seed,
        "action_table": agent.action_table.tolist(),
        "price_scaler": agent.price_scaler.to_dict() if agent.price_scaler is not None else None,
    }
    return save_to_json(net_to_dict(agent.q_net, metadata), filename)


def load_agent(filename, config=None):
    """Načte agenta uloženého funkcí save_agent."""
    data, error = load_from_json(filename)
    if error:
        raise ValidationError(error)
    metadata = data.get("metadata", {})
    scaler = metadata.get("price_scaler")
    agent = DqnAgent(metadata["state_width"], config, metadata.get("seed", 0),
                     ScalerParams.from_dict(scaler) if scaler else None, metadata.get("action_table"))
    agent.q_net = net_from_dict(data)
    sync_target(agent)
    return agent
