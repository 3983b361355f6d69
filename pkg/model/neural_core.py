#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Plně propojená neuronová síť v numpy.
Společný základ Q-sítě agenta DQN a neuronového prognostického modelu:
dopředný průchod, zpětné šíření chyby, optimalizátory SGD a Adam,
trénink s předčasným zastavením a ukládání kontrolních bodů.
"""

import copy
import logging
from dataclasses import dataclass

import numpy as np

from config import (
    ACTIVATIONS, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, CHECKPOINT_VERSION, LOSSES,
    OPTIMIZERS, TRAIN_BATCH_SIZE, TRAIN_LEARNING_RATE, TRAIN_MAX_EPOCHS,
    TRAIN_OPTIMIZER, TRAIN_PATIENCE, TRAIN_SEED,
)
from utils.errors import ArgumentError, ValidationError
from utils.json_handler import load_from_json, save_to_json

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "dense-net"


def _activate(tag, z):
    if tag == "relu":
        return np.maximum(z, 0.0)
    if tag == "tanh":
        return np.tanh(z)
    return z


def _activate_grad(tag, z, a):
    """Derivace aktivace podle vstupu z (pro tanh se použije výstup a)."""
    if tag == "relu":
        return (z > 0.0).astype(np.float64)
    if tag == "tanh":
        return 1.0 - a ** 2
    return np.ones_like(z)


@dataclass
class DenseLayer:
    """Vrstva sítě: váhy (výstup × vstup), bias a aktivace."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "identity"


@dataclass
class DenseNet:
    """Plně propojená síť jako posloupnost vrstev."""

    layers: list

    def __post_init__(self):
        for previous, current in zip(self.layers, self.layers[1:]):
            if previous.weights.shape[0] != current.weights.shape[1]:
                raise ArgumentError("Šířky sousedních vrstev si neodpovídají")
        for layer in self.layers:
            if layer.activation not in ACTIVATIONS:
                raise ArgumentError(f"Neznámá aktivace: {layer.activation}")

    @property
    def input_width(self):
        return self.layers[0].weights.shape[1]

    @property
    def output_width(self):
        return self.layers[-1].weights.shape[0]

    @property
    def widths(self):
        return [self.input_width] + [layer.weights.shape[0] for layer in self.layers]

    @property
    def activations(self):
        return [layer.activation for layer in self.layers]

    @property
    def parameter_count(self):
        return sum(layer.weights.size + layer.bias.size for layer in self.layers)

    def copy(self):
        """Hluboká kopie sítě."""
        return copy.deepcopy(self)

    def flat_parameters(self):
        """Parametry jako jeden vektor: po vrstvách, W po řádcích, pak b."""
        return np.concatenate([np.concatenate([layer.weights.ravel(), layer.bias.ravel()])
                               for layer in self.layers])

    def set_flat_parameters(self, vector):
        """
        Nastaví parametry z vektoru v pořadí flat_parameters.

        Args:
            vector: Vektor délky parameter_count
        """
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != self.parameter_count:
            raise ArgumentError(f"Vektor má {vector.size} hodnot, síť {self.parameter_count} parametrů")
        offset = 0
        for layer in self.layers:
            size = layer.weights.size
            layer.weights = vector[offset:offset + size].reshape(layer.weights.shape).copy()
            offset += size
            size = layer.bias.size
            layer.bias = vector[offset:offset + size].copy()
            offset += size
        return self


@dataclass(frozen=True)
class TrainConfig:
    """Nastavení tréninku sítě."""

    learning_rate: float = TRAIN_LEARNING_RATE
    batch_size: int = TRAIN_BATCH_SIZE
    max_epochs: int = TRAIN_MAX_EPOCHS
    patience: int = TRAIN_PATIENCE
    optimizer: str = TRAIN_OPTIMIZER
    seed: int = TRAIN_SEED
    loss: str = "rmse"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ArgumentError(f"learning_rate musí být kladné, je {self.learning_rate}")
        if self.patience < 1:
            raise ArgumentError(f"patience musí být alespoň 1, je {self.patience}")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ArgumentError("batch_size i max_epochs musí být alespoň 1")
        if self.optimizer not in OPTIMIZERS:
            raise ArgumentError(f"Neznámý optimalizátor: {self.optimizer}")
        if self.loss not in LOSSES:
            raise ArgumentError(f"Neznámá ztrátová funkce: {self.loss}")

    @classmethod
    def from_config(cls, config):
        """Vytvoří nastavení z klíčů `train.*`."""
        return cls(
            learning_rate=config.get("train.learning_rate"),
            batch_size=config.get("train.batch_size"),
            max_epochs=config.get("train.max_epochs"),
            patience=config.get("train.patience"),
            optimizer=config.get("train.optimizer"),
            seed=config.get("train.seed"),
        )


def init_net(widths, activations, seed):
    """
    Vytvoří síť s váhami z rovnoměrného rozdělení ±sqrt(1/fan_in) a nulovými biasy.

    Args:
        widths (list): Šířky vrstev včetně vstupu, např. [4, 8, 1]
        activations (list): Aktivace každé vrstvy (o jednu méně než šířek)
        seed (int): Semínko generátoru

    Returns:
        DenseNet: Inicializovaná síť
    """
    widths = [int(width) for width in widths]
    if len(widths) < 2 or len(activations) != len(widths) - 1:
        raise ArgumentError(
            f"Nesouhlasí počet šířek ({len(widths)}) a aktivací ({len(activations)})"
        )
    if min(widths) < 1:
        raise ArgumentError("Šířky vrstev musí být kladné")

    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, activation in zip(widths, widths[1:], activations):
        scale = np.sqrt(1.0 / fan_in)
        weights = rng.uniform(-scale, scale, size=(fan_out, fan_in))
        layers.append(DenseLayer(weights, np.zeros(fan_out), activation))
    return DenseNet(layers)


def _forward_cache(net, inputs):
    """Dopředný průchod dávkou (B × vstup), vrací výstup a mezivýsledky."""
    activation = inputs
    cache = []
    for layer in net.layers:
        z = activation @ layer.weights.T + layer.bias
        output = _activate(layer.activation, z)
        cache.append((activation, z, output))
        activation = output
    return activation, cache


def forward(net, inputs):
    """
    Dopředný průchod sítí.

    Args:
        net (DenseNet): Síť
        inputs: Vektor (vstup,) nebo dávka (B × vstup)

    Returns:
        np.ndarray: Výstup (výstup,) resp. (B × výstup)
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    single = inputs.ndim == 1
    batch = inputs[None, :] if single else inputs
    if batch.ndim != 2 or batch.shape[1] != net.input_width:
        raise ArgumentError(f"Vstup má šířku {batch.shape[-1]}, síť očekává {net.input_width}")
    output, _ = _forward_cache(net, batch)
    return output[0] if single else output


def backward(net, inputs, targets, loss="mse", mask=None):
    """
    Gradienty ztráty podle všech parametrů (zpětné šíření chyby).

    Ztráta mse je Σ m·(ŷ − y)² / Σ m, kde maska m vybírá započítané výstupy
    (DQN maskuje jen provedenou akci). Ztráta rmse je její odmocnina.

    Args:
        net (DenseNet): Síť
        inputs: Dávka vstupů (B × vstup)
        targets: Cílové hodnoty (B × výstup) nebo (B,) pro jednovýstupovou síť
        loss (str): mse nebo rmse
        mask: Volitelná maska tvaru targets

    Returns:
        tuple: (seznam dvojic (dW, db) po vrstvách, hodnota ztráty)
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or len(inputs) == 0:
        raise ArgumentError("Dávka musí být neprázdná matice")
    if loss not in LOSSES:
        raise ArgumentError(f"Neznámá ztrátová funkce: {loss}")
    targets = np.asarray(targets, dtype=np.float64).reshape(len(inputs), -1)
    weights = np.ones_like(targets) if mask is None else np.asarray(mask, dtype=np.float64).reshape(targets.shape)

    output, cache = _forward_cache(net, inputs)
    error = output - targets
    total = max(weights.sum(), 1e-12)
    mse = float(np.sum(weights * error ** 2) / total)

    grad_output = 2.0 * weights * error / total
    value = mse
    if loss == "rmse":
        value = float(np.sqrt(mse))
        grad_output = grad_output / (2.0 * value) if value > 0.0 else np.zeros_like(grad_output)

    gradients = [None] * len(net.layers)
    delta = grad_output
    for index in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[index]
        layer_input, z, activation = cache[index]
        delta = delta * _activate_grad(layer.activation, z, activation)
        gradients[index] = (delta.T @ layer_input, delta.sum(axis=0))
        delta = delta @ layer.weights
    return gradients, value


class OptimizerState:
    """Stav optimalizátoru (SGD nebo Adam) pro jednu síť."""

    def __init__(self, net, kind=TRAIN_OPTIMIZER, learning_rate=TRAIN_LEARNING_RATE):
        """
        Inicializace stavu.

        Args:
            net (DenseNet): Síť, jejíž parametry se budou aktualizovat
            kind (str): sgd nebo adam
            learning_rate (float): Krok učení
        """
        if kind not in OPTIMIZERS:
            raise ArgumentError(f"Neznámý optimalizátor: {kind}")
        self.kind = kind
        self.learning_rate = learning_rate
        self.step = 0
        self.first = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers]
        self.second = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers]


def optimize_step(net, gradients, state):
    """
    Jeden krok optimalizátoru, parametry sítě se mění na místě.

    Args:
        net (DenseNet): Síť
        gradients (list): Dvojice (dW, db) z backward
        state (OptimizerState): Stav optimalizátoru

    Returns:
        DenseNet: Tatáž síť s novými parametry
    """
    state.step += 1
    lr = state.learning_rate

    if state.kind == "sgd":
        for layer, (grad_w, grad_b) in zip(net.layers, gradients):
            layer.weights = layer.weights - lr * grad_w
            layer.bias = layer.bias - lr * grad_b
        return net

    correction1 = 1.0 - ADAM_BETA1 ** state.step
    correction2 = 1.0 - ADAM_BETA2 ** state.step
    for index, (layer, grads) in enumerate(zip(net.layers, gradients)):
        moments = []
        updated = []
        for param, grad, m, v in zip((layer.weights, layer.bias), grads,
                                     state.first[index], state.second[index]):
            m = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * grad
            v = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * grad ** 2
            step = lr * (m / correction1) / (np.sqrt(v / correction2) + ADAM_EPSILON)
            moments.append((m, v))
            updated.append(param - step)
        layer.weights, layer.bias = updated
        state.first[index] = (moments[0][0], moments[1][0])
        state.second[index] = (moments[0][1], moments[1][1])
    return net


def rmse(net, inputs, targets):
    """Odmocnina střední kvadratické chyby sítě na datech."""
    output = forward(net, np.asarray(inputs, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64).reshape(output.shape)
    return float(np.sqrt(np.mean((output - targets) ** 2)))


def train(net, inputs, targets, config=None, val_inputs=None, val_targets=None):
    """
    Trénuje síť po minidávkách s předčasným zastavením.

    Trénink skončí, když se validační RMSE nezlepší `patience` epoch po sobě.
    Vrácená síť má parametry z epochy s nejlepší validační chybou.
    Bez validačních dat se sleduje trénovací chyba.

    Args:
        net (DenseNet): Síť (mění se na místě)
        inputs: Trénovací vstupy (B × vstup)
        targets: Trénovací cíle
        config (TrainConfig, optional): Nastavení tréninku
        val_inputs: Validační vstupy
        val_targets: Validační cíle

    Returns:
        tuple: (natrénovaná síť, historie jako seznam slovníků)
    """
    config = config or TrainConfig()
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64).reshape(len(inputs), -1)
    if len(inputs) == 0:
        raise ArgumentError("Trénovací data jsou prázdná")
    has_validation = val_inputs is not None and len(val_inputs) > 0

    rng = np.random.default_rng(config.seed)
    optimizer = OptimizerState(net, config.optimizer, config.learning_rate)
    best_loss = np.inf
    best_params = net.flat_parameters()
    stale = 0
    history = []

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(inputs))
        for begin in range(0, len(inputs), config.batch_size):
            batch = order[begin:begin + config.batch_size]
            gradients, _ = backward(net, inputs[batch], targets[batch], config.loss)
            optimize_step(net, gradients, optimizer)

        train_loss = rmse(net, inputs, targets)
        val_loss = rmse(net, val_inputs, val_targets) if has_validation else train_loss
        history.append({"epoch": epoch, "train_rmse": train_loss, "val_rmse": val_loss})

        if not np.isfinite(val_loss):
            logger.warning("Validační chyba v epoše %d není konečná, trénink končí", epoch)
            break
        if val_loss < best_loss:
            best_loss = val_loss
            best_params = net.flat_parameters()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.debug("Předčasné zastavení po epoše %d (nejlepší RMSE %.6g)", epoch, best_loss)
                break

    net.set_flat_parameters(best_params)
    return net, history


def net_to_dict(net, metadata=None):
    """Převede síť na samopopisný slovník kontrolního bodu."""
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "widths": net.widths,
        "activations": net.activations,
        "params": net.flat_parameters().tolist(),
        "metadata": dict(metadata or {}),
    }


def net_from_dict(data):
    """
    Obnoví síť ze slovníku kontrolního bodu.

    Raises:
        ValidationError: Neznámý formát, verze nebo nesouhlasný počet parametrů
    """
    if data.get("format") != CHECKPOINT_FORMAT or data.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(
            f"Nepodporovaný kontrolní bod sítě: {data.get('format')} v{data.get('version')}"
        )
    net = init_net(data["widths"], data["activations"], seed=0)
    try:
        net.set_flat_parameters(data["params"])
    except ArgumentError as e:
        raise ValidationError(f"Poškozený kontrolní bod sítě: {e}") from e
    return net


def save_net(net, filename, metadata=None):
    """
    Uloží síť jako JSON kontrolní bod.

    Returns:
        bool: True, pokud se uložení podařilo
    """
    return save_to_json(net_to_dict(net, metadata), filename)


def load_net(filename):
    """
    Načte síť z JSON kontrolního bodu.

    Returns:
        tuple: (síť, metadata)
    """
    data, error = load_from_json(filename)
    if error:
        raise ValidationError(error)
    return net_from_dict(data), data.get("metadata", {})
