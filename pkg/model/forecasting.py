#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Prognózy ceny elektřiny pro jednotlivé horizonty.
Modely: persistence (poslední známá cena), autoregrese metodou nejmenších
čtverců s volitelnou diferencí a dopředná neuronová síť. Všechny modely
mají stejné rozhraní predikce, které používá obal prostředí.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from config import (
    AR_DIFFERENCE, AR_ORDER, AR_RIDGE, CHECKPOINT_VERSION, DEFAULT_FEATURES,
    DEFAULT_WINDOW_SIZE, FORECAST_HORIZONS, FORECASTER_ACTIVATION,
    FORECASTER_HIDDEN_WIDTHS, FORECASTER_KINDS, MAPE_EPSILON,
)
from model.market_data import (
    ScalerParams, apply_scaler, build_windows, feature_matrix, fit_scaler, invert_scaler,
)
from model.neural_core import TrainConfig, forward, init_net, net_from_dict, net_to_dict, train
from utils.errors import ArgumentError, StateError, ValidationError
from utils.json_handler import load_from_json, save_to_json

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "forecaster"


@dataclass(frozen=True)
class ForecastMetrics:
    """Chybové statistiky prognózy na vyhodnocovacím úseku."""

    rmse: float
    mae: float
    mape: float
    excluded: int = 0
    count: int = 0

    def to_row(self, horizon, kind, params):
        """Řádek pro `forecasters/metrics.csv`."""
        return {"horizon": horizon, "kind": kind, "rmse": self.rmse, "mae": self.mae,
                "mape": self.mape, "params": params}


@dataclass
class Forecaster:
    """Bodová prognóza ceny za `horizon` hodin."""

    kind: str
    horizon: int
    window_size: int = DEFAULT_WINDOW_SIZE
    features: tuple = tuple(DEFAULT_FEATURES)
    scaler: ScalerParams = None
    coefficients: np.ndarray = None
    net: object = None
    difference: int = 0
    smoothing_alpha: float = None
    target_mean: float = 0.0
    target_std: float = 1.0
    labels_scaled: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FORECASTER_KINDS:
            raise ArgumentError(f"Neznámý druh prognózy: {self.kind}")
        if self.horizon not in FORECAST_HORIZONS:
            raise ArgumentError(f"Horizont {self.horizon} není mezi {FORECAST_HORIZONS}")
        if self.window_size < 1:
            raise ArgumentError("window_size musí být alespoň 1")
        self.features = tuple(self.features)

    @property
    def parameter_count(self):
        if self.kind == "ar":
            return 0 if self.coefficients is None else int(len(self.coefficients))
        if self.kind == "neural":
            return 0 if self.net is None else int(self.net.parameter_count)
        return 0

    def predict_indices(self, series, indices):
        """
        Prognózy ceny v čase t + horizont pro každý index t.
        Použijí se jen záznamy s indexem ≤ t; chybějící historii na začátku
        řady nahradí opakování prvního záznamu.

        Args:
            series (MarketSeries): Řada s historií
            indices: Absolutní indexy okamžiků prognózy

        Returns:
            np.ndarray: Prognózované ceny
        """
        indices = np.asarray(indices, dtype=np.int64).reshape(-1)
        if self.kind == "persistence":
            return predict_persistence(series.prices[indices])
        if self.kind == "ar":
            if self.coefficients is None:
                raise StateError("Autoregresní model není nafitovaný")
            return ar_rollout(self.coefficients, series.prices, indices, self.horizon, self.difference)

        if self.net is None or self.scaler is None:
            raise StateError("Neuronová prognóza není natrénovaná")
        matrix = apply_scaler(self.scaler, feature_matrix(series, self.features, self.smoothing_alpha))
        offsets = np.arange(-self.window_size + 1, 1)
        rows = np.clip(indices[:, None] + offsets, 0, None)
        windows = matrix[rows].reshape(len(indices), self.window_size * len(self.features))
        output = forward(self.net, windows)[:, 0] * self.target_std + self.target_mean
        if self.labels_scaled:
            output = invert_scaler(self.scaler.column("price"), output[:, None])[:, 0]
        return output

    def predict(self, series, index):
        """Prognóza pro jediný okamžik."""
        return float(self.predict_indices(series, [index])[0])


def predict_persistence(current_price):
    """Naivní prognóza: budoucí cena je rovna současné."""
    return np.asarray(current_price, dtype=np.float64).copy()


def fit_ar(prices, order=AR_ORDER, difference=AR_DIFFERENCE, ridge=AR_RIDGE):
    """
    Odhadne autoregresní model metodou nejmenších čtverců.

    Koeficienty mají tvar [c, φ1, …, φp] a minimalizují jednokrokovou chybu
    x_t ≈ c + Σ φ_i · x_{t−i} na (případně diferencované) řadě x.

    Args:
        prices: Trénovací ceny
        order (int): Řád p
        difference (int): 0 nebo 1 (první diference)
        ridge (float): Regularizace při singulární soustavě

    Returns:
        np.ndarray: Vektor koeficientů délky p + 1
    """
    prices = np.asarray(prices, dtype=np.float64)
    if order < 1:
        raise ArgumentError(f"Řád autoregrese musí být alespoň 1, je {order}")
    if difference not in (0, 1):
        raise ArgumentError(f"Diference musí být 0 nebo 1, je {difference}")
    if len(prices) <= order + difference + 1:
        raise ArgumentError(
            f"Řada délky {len(prices)} je pro řád {order} a diferenci {difference} příliš krátká"
        )

    values = np.diff(prices) if difference else prices
    lags = np.lib.stride_tricks.sliding_window_view(values[:-1], order)[:, ::-1]
    design = np.column_stack([np.ones(len(lags)), lags])
    target = values[order:]

    normal = design.T @ design
    rhs = design.T @ target
    if np.linalg.matrix_rank(design) < design.shape[1]:
        logger.warning("Singulární normální rovnice autoregrese, použiji regularizaci %g", ridge)
        normal = normal + ridge * np.eye(len(normal))
    return np.linalg.solve(normal, rhs)


def ar_rollout(coefficients, prices, indices, horizon, difference=0):
    """
    Iterovaná vícekroková predikce autoregresního modelu.

    Args:
        coefficients: [c, φ1, …, φp]
        prices: Ceny celé řady
        indices: Okamžiky prognózy
        horizon (int): Počet kroků dopředu
        difference (int): 0 nebo 1

    Returns:
        np.ndarray: Prognózy ceny v čase t + horizon
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    prices = np.asarray(prices, dtype=np.float64)
    indices = np.asarray(indices, dtype=np.int64)
    intercept, phi = coefficients[0], coefficients[1:]

    values = np.diff(prices, prepend=prices[0]) if difference else prices
    history = values[np.clip(indices[:, None] - np.arange(len(phi)), 0, None)]

    level = prices[indices].copy()
    prediction = level
    for _ in range(horizon):
        step = intercept + history @ phi
        history = np.column_stack([step, history[:, :-1]])
        if difference:
            level = level + step
            prediction = level
        else:
            prediction = step
    return prediction


def compute_metrics(truth, predicted, epsilon=MAPE_EPSILON):
    """
    RMSE, MAE a MAPE (v procentech). MAPE zahrnuje jen vzorky s |skutečnost| > ε,
    počet vynechaných vzorků se vrací spolu s metrikami.

    Args:
        truth: Skutečné ceny
        predicted: Prognózované ceny
        epsilon (float): Práh jmenovatele MAPE

    Returns:
        ForecastMetrics: Metriky
    """
    truth = np.asarray(truth, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if len(truth) == 0:
        raise ArgumentError("Vyhodnocovací úsek je prázdný")
    error = predicted - truth
    included = np.abs(truth) > epsilon
    mape = (float(np.mean(np.abs(error[included]) / np.abs(truth[included])) * 100.0)
            if included.any() else float("nan"))
    return ForecastMetrics(
        rmse=float(np.sqrt(np.mean(error ** 2))),
        mae=float(np.mean(np.abs(error))),
        mape=mape,
        excluded=int((~included).sum()),
        count=len(truth),
    )


def evaluation_indices(series, forecaster, segment="validation"):
    """Okamžiky prognózy v úseku: celé okno i štítek leží uvnitř úseku."""
    start, end = series.segment(segment)
    first = start + forecaster.window_size - 1
    last = end - 1 - forecaster.horizon
    return np.arange(first, last + 1, dtype=np.int64)


def evaluate(forecaster, series, segment="validation", epsilon=MAPE_EPSILON):
    """
    Vyhodnotí prognózu na úseku řady.

    Args:
        forecaster (Forecaster): Prognostický model
        series (MarketSeries): Řada
        segment (str): train, validation, test nebo all
        epsilon (float): Práh jmenovatele MAPE

    Returns:
        ForecastMetrics: Metriky
    """
    indices = evaluation_indices(series, forecaster, segment)
    if len(indices) == 0:
        raise ArgumentError(f"Úsek {segment} je pro okno a horizont příliš krátký")
    predicted = forecaster.predict_indices(series, indices)
    truth = series.prices[indices + forecaster.horizon]
    return compute_metrics(truth, predicted, epsilon)


def train_neural_forecaster(dataset, config=None, widths=FORECASTER_HIDDEN_WIDTHS,
                            activation=FORECASTER_ACTIVATION, validation=None, horizon=None,
                            scaler=None, smoothing_alpha=None):
    """
    Natrénuje neuronovou prognózu s jedním výstupem.

    Cíle se pro trénink standardizují průměrem a odchylkou trénovacích štítků,
    predikce se vrací v jednotkách štítků.

    Args:
        dataset (WindowedDataset): Trénovací okna
        config (TrainConfig, optional): Nastavení tréninku
        widths (list): Šířky skrytých vrstev
        activation (str): Aktivace skrytých vrstev
        validation (WindowedDataset, optional): Validační okna pro předčasné zastavení
        horizon (int, optional): Horizont prognózy (musí odpovídat datům)
        scaler (ScalerParams, optional): Škálování použité při tvorbě oken
        smoothing_alpha (float, optional): Vyhlazení použité při tvorbě oken

    Returns:
        Forecaster: Natrénovaný model
    """
    horizon = dataset.horizon if horizon is None else horizon
    if dataset.horizon != horizon:
        raise ArgumentError(f"Okna mají horizont {dataset.horizon}, prognóza {horizon}")
    if validation is not None and validation.horizon != horizon:
        raise ArgumentError(f"Validační okna mají horizont {validation.horizon}, prognóza {horizon}")
    if len(dataset) == 0:
        raise ArgumentError("Trénovací okna jsou prázdná")
    config = config or TrainConfig()

    target_mean = float(np.mean(dataset.labels))
    target_std = float(np.std(dataset.labels)) or 1.0

    widths = [dataset.features.shape[1], *widths, 1]
    activations = [activation] * (len(widths) - 2) + ["identity"]
    net = init_net(widths, activations, config.seed)

    val_inputs = val_targets = None
    if validation is not None and len(validation):
        val_inputs = validation.features
        val_targets = (validation.labels - target_mean) / target_std
    net, history = train(net, dataset.features, (dataset.labels - target_mean) / target_std,
                         config, val_inputs, val_targets)

    forecaster = Forecaster(
        kind="neural",
        horizon=horizon,
        window_size=dataset.window_size,
        features=dataset.feature_names,
        scaler=scaler,
        net=net,
        smoothing_alpha=smoothing_alpha,
        target_mean=target_mean,
        target_std=target_std,
        labels_scaled=bool(dataset.metadata.get("labels_scaled", False)),
        metadata={"epochs": len(history)},
    )
    logger.info("Neuronová prognóza h=%d: %d epoch, %d parametrů",
                horizon, len(history), forecaster.parameter_count)
    return forecaster


def fit_forecaster(kind, series, horizon, window_size=DEFAULT_WINDOW_SIZE, features=DEFAULT_FEATURES,
                   smoothing_alpha=None, ar_order=AR_ORDER, ar_difference=AR_DIFFERENCE,
                   hidden_widths=FORECASTER_HIDDEN_WIDTHS, activation=FORECASTER_ACTIVATION,
                   train_config=None):
    """
    Vytvoří prognózu daného druhu jen z trénovací (a u sítě validační) části řady.

    Args:
        kind (str): persistence, ar nebo neural
        series (MarketSeries): Řada s dělením
        horizon (int): Horizont v hodinách
        window_size (int): Délka okna
        features (list): Příznaky neuronové prognózy
        smoothing_alpha (float, optional): Vyhlazení cenového vstupu
        ar_order (int): Řád autoregrese
        ar_difference (int): Diference autoregrese
        hidden_widths (list): Skryté vrstvy sítě
        activation (str): Aktivace skrytých vrstev
        train_config (TrainConfig, optional): Nastavení tréninku sítě

    Returns:
        Forecaster: Model připravený k predikci
    """
    smoothing_alpha = smoothing_alpha or None
    if kind == "persistence":
        return Forecaster("persistence", horizon, window_size, features)

    if kind == "ar":
        start, end = series.segment("train")
        coefficients = fit_ar(series.prices[start:end], ar_order, ar_difference)
        return Forecaster("ar", horizon, window_size, features, coefficients=coefficients,
                          difference=ar_difference)

    if kind != "neural":
        raise ArgumentError(f"Neznámý druh prognózy: {kind}")
    scaler = fit_scaler(series, features, smoothing_alpha)
    training = build_windows(series, features, window_size, horizon, scaler, "train", smoothing_alpha)
    validation = None
    start, end = series.segment("validation")
    if end - start >= window_size + horizon:
        validation = build_windows(series, features, window_size, horizon, scaler,
                                   "validation", smoothing_alpha)
    return train_neural_forecaster(training, train_config, hidden_widths, activation, validation,
                                   horizon, scaler, smoothing_alpha)


def select_best(candidates):
    """
    Vybere pro každý horizont prognózu s nejmenší validační RMSE.
    Shodu rozhodne menší počet parametrů, potom pořadí persistence < ar < neural.

    Args:
        candidates (dict): horizont -> seznam dvojic (Forecaster, ForecastMetrics)

    Returns:
        dict: horizont -> Forecaster
    """
    selected = {}
    for horizon, entries in candidates.items():
        if not entries:
            raise ArgumentError(f"Pro horizont {horizon} není žádný kandidát")

        def rank(entry):
            forecaster, metrics = entry
            rmse = metrics.rmse if np.isfinite(metrics.rmse) else np.inf
            return rmse, forecaster.parameter_count, FORECASTER_KINDS.index(forecaster.kind)

        selected[horizon] = min(entries, key=rank)[0]
    return selected


def forecaster_to_dict(forecaster, metrics=None):
    """Převede prognózu na slovník kontrolního bodu."""
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": forecaster.kind,
        "horizon": forecaster.horizon,
        "window_size": forecaster.window_size,
        "features": list(forecaster.features),
        "smoothing_alpha": forecaster.smoothing_alpha,
        "scaler": forecaster.scaler.to_dict() if forecaster.scaler is not None else None,
        "coefficients": None if forecaster.coefficients is None else list(forecaster.coefficients),
        "difference": forecaster.difference,
        "target_mean": forecaster.target_mean,
        "target_std": forecaster.target_std,
        "labels_scaled": forecaster.labels_scaled,
        "net": net_to_dict(forecaster.net) if forecaster.net is not None else None,
        "metrics": None if metrics is None else {
            "rmse": metrics.rmse, "mae": metrics.mae, "mape": metrics.mape,
            "excluded": metrics.excluded,
        },
    }


def forecaster_from_dict(data):
    """Obnoví prognózu ze slovníku kontrolního bodu."""
    if data.get("format") != CHECKPOINT_FORMAT or data.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(
            f"Nepodporovaný kontrolní bod prognózy: {data.get('format')} v{data.get('version')}"
        )
    return Forecaster(
        kind=data["kind"],
        horizon=int(data["horizon"]),
        window_size=int(data["window_size"]),
        features=tuple(data["features"]),
        scaler=ScalerParams.from_dict(data["scaler"]) if data.get("scaler") else None,
        coefficients=None if data.get("coefficients") is None else np.asarray(data["coefficients"]),
        net=net_from_dict(data["net"]) if data.get("net") else None,
        difference=int(data.get("difference", 0)),
        smoothing_alpha=data.get("smoothing_alpha"),
        target_mean=float(data.get("target_mean", 0.0)),
        target_std=float(data.get("target_std", 1.0)),
        labels_scaled=bool(data.get("labels_scaled", False)),
    )


def save_forecaster(forecaster, filename, metrics=None):
    """Uloží prognózu jako JSON kontrolní bod."""
    return save_to_json(forecaster_to_dict(forecaster, metrics), filename)


def load_forecaster(filename):
    """
    Načte prognózu z kontrolního bodu.

    Raises:
        ValidationError: Soubor chybí nebo má neplatný formát
    """
    data, error = load_from_json(filename)
    if error:
        raise ValidationError(error)
    return forecaster_from_dict(data)
