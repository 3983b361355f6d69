#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Datový model tržních řad.
Načítání hodinových cen a spotřeby z CSV, syntetický generátor, chronologické
dělení, min-max škálování, vyhlazování a tvorba klouzavých oken pro prognózy.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
import pandas as pd

from config import (
    AVAILABLE_FEATURES, CSV_COLUMNS, DEFAULT_SPLIT_FRACTIONS,
    SYNTHETIC_AMPLITUDE, SYNTHETIC_BASE_PRICE, SYNTHETIC_DEMAND_AMPLITUDE,
    SYNTHETIC_DEMAND_BASE, SYNTHETIC_DEMAND_NOISE, SYNTHETIC_NOISE_CLIP,
    SYNTHETIC_NOISE_PERSISTENCE, SYNTHETIC_NOISE_SCALE, SYNTHETIC_SPIKE_MAX,
    SYNTHETIC_SPIKE_MIN, SYNTHETIC_START,
)
from utils.errors import ArgumentError, ParseError, StateError, ValidationError

logger = logging.getLogger(__name__)

ONE_HOUR = pd.Timedelta(hours=1)
SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class MarketRecord:
    """Jedno hodinové pozorování trhu."""

    timestamp: pd.Timestamp
    price: float
    demand: float


def make_split(length, train_end=None, val_end=None):
    """
    Vytvoří chronologické dělení řady na trénovací, validační a testovací část.

    Args:
        length (int): Délka řady
        train_end (int, optional): Index prvního záznamu za trénovací částí
        val_end (int, optional): Index prvního záznamu za validační částí

    Returns:
        dict: název -> (začátek, konec), polouzavřené intervaly
    """
    if train_end is None:
        train_end = int(round(DEFAULT_SPLIT_FRACTIONS[0] * length))
    if val_end is None:
        val_end = int(round(DEFAULT_SPLIT_FRACTIONS[1] * length))
    if not 0 <= train_end <= val_end <= length:
        raise ValidationError(
            f"Neplatné dělení řady: train_end={train_end}, val_end={val_end}, délka={length}"
        )
    return {"train": (0, train_end), "validation": (train_end, val_end), "test": (val_end, length)}


@dataclass(frozen=True)
class MarketSeries:
    """
    Hodinová řada cen a spotřeby s chronologickým dělením.
    Pole jsou po vytvoření jen pro čtení.
    """

    timestamps: pd.DatetimeIndex
    prices: np.ndarray
    demand: np.ndarray
    split: dict = field(default_factory=dict)
    spikes: np.ndarray = None

    def __post_init__(self):
        prices = np.array(self.prices, dtype=np.float64)
        demand = np.array(self.demand, dtype=np.float64)
        timestamps = pd.DatetimeIndex(self.timestamps)
        if timestamps.tz is None:
            timestamps = timestamps.tz_localize("UTC")

        if not (len(timestamps) == len(prices) == len(demand)):
            raise ValidationError("Časy, ceny a spotřeba musí mít stejnou délku")
        if len(prices) and not (np.all(np.isfinite(prices)) and np.all(np.isfinite(demand))):
            raise ValidationError("Ceny a spotřeba musí být konečná čísla")
        if len(timestamps) > 1 and not (timestamps[1:] - timestamps[:-1] == ONE_HOUR).all():
            raise ValidationError("Časové značky musí postupovat přesně po jedné hodině")

        split = dict(self.split) if self.split else make_split(len(prices))
        _validate_split(split, len(prices))

        prices.setflags(write=False)
        demand.setflags(write=False)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "split", MappingProxyType(split))

        if self.spikes is not None:
            spikes = np.array(self.spikes, dtype=bool)
            spikes.setflags(write=False)
            object.__setattr__(self, "spikes", spikes)

    def __len__(self):
        return len(self.prices)

    @property
    def records(self):
        """Záznamy řady jako n-tice MarketRecord."""
        return tuple(
            MarketRecord(timestamp, float(price), float(demand))
            for timestamp, price, demand in zip(self.timestamps, self.prices, self.demand)
        )

    def segment(self, name):
        """
        Vrací hranice pojmenované části řady.

        Args:
            name (str): train, validation, test nebo all

        Returns:
            tuple: (začátek, konec)
        """
        if name == "all":
            return 0, len(self)
        if name not in self.split:
            raise ArgumentError(f"Neznámá část řady: {name}")
        return self.split[name]

    def with_split(self, train_end, val_end):
        """Vrací kopii řady s jiným dělením."""
        return MarketSeries(self.timestamps, self.prices, self.demand,
                            make_split(len(self), train_end, val_end), self.spikes)

    def with_prices(self, prices):
        """Vrací kopii řady s nahrazenými cenami (např. pro testy kauzality)."""
        return MarketSeries(self.timestamps, prices, self.demand, dict(self.split), self.spikes)


def _validate_split(split, length):
    """Ověří, že dělení je souvislé, chronologické a pokrývá celou řadu."""
    if set(split) != set(SPLIT_NAMES):
        raise ValidationError(f"Dělení musí obsahovat právě {SPLIT_NAMES}")
    cursor = 0
    for name in SPLIT_NAMES:
        start, end = split[name]
        if start != cursor or end < start:
            raise ValidationError(f"Část {name} = {split[name]} navazuje nesouvisle")
        cursor = end
    if cursor != length:
        raise ValidationError(f"Dělení pokrývá {cursor} záznamů místo {length}")


def resolve_split_bounds(timestamps, splits):
    """
    Převede hodnoty `data.splits` (indexy nebo ISO časy) na indexy.

    Args:
        timestamps (pd.DatetimeIndex): Časové značky řady
        splits (list): Dvě hodnoty [train_end, val_end] nebo prázdný seznam

    Returns:
        tuple: (train_end, val_end), případně (None, None)
    """
    if not splits:
        return None, None
    if len(splits) != 2:
        raise ValidationError(f"data.splits musí mít dvě hodnoty, má {len(splits)}")

    bounds = []
    for value in splits:
        text = str(value).strip()
        if text.lstrip("-").isdigit():
            bounds.append(int(text))
            continue
        moment = pd.Timestamp(text)
        if moment.tzinfo is None:
            moment = moment.tz_localize("UTC")
        bounds.append(int(timestamps.searchsorted(moment)))
    return bounds[0], bounds[1]


def ingest_csv(path, schema=None, fill_gaps=False, splits=None):
    """
    Načte hodinová tržní data z CSV souboru.

    Args:
        path (str): Cesta k souboru s hlavičkou `timestamp,price,demand`
        schema (dict, optional): Mapování logický sloupec -> sloupec v souboru
        fill_gaps (bool): Chybějící hodiny doplnit předchozí hodnotou místo chyby
        splits (list, optional): Hranice dělení [train_end, val_end]

    Returns:
        MarketSeries: Ověřená řada

    Raises:
        ParseError: Chybný řádek (s číslem řádku)
        ValidationError: Duplicitní časová značka nebo mezera bez doplňování
    """
    if not os.path.isfile(path):
        raise ValidationError(f"Soubor {path} neexistuje")

    schema = dict(schema or {})
    columns = {name: schema.get(name, name) for name in CSV_COLUMNS}

    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [source for source in columns.values() if source not in raw.columns]
    if missing:
        raise ParseError(f"Chybí sloupce {missing}", line=1)

    timestamps = pd.to_datetime(raw[columns["timestamp"]].str.strip(), utc=True,
                                errors="coerce", format="ISO8601")
    prices = pd.to_numeric(raw[columns["price"]].str.strip(), errors="coerce")
    demand = pd.to_numeric(raw[columns["demand"]].str.strip(), errors="coerce")

    # První vadný řádek (hlavička je řádek 1)
    bad = timestamps.isna() | ~np.isfinite(prices) | ~np.isfinite(demand)
    if bad.any():
        position = int(np.flatnonzero(bad.to_numpy())[0])
        row = raw.iloc[position].to_dict()
        raise ParseError(f"Nelze přečíst záznam {row}", line=position + 2)

    frame = pd.DataFrame({"price": prices.to_numpy(dtype=float),
                          "demand": demand.to_numpy(dtype=float)},
                         index=pd.DatetimeIndex(timestamps))
    frame = frame.sort_index(kind="mergesort")

    duplicated = frame.index.duplicated()
    if duplicated.any():
        raise ValidationError(f"Duplicitní časová značka {frame.index[duplicated][0].isoformat()}")
    if len(frame) == 0:
        raise ValidationError(f"Soubor {path} neobsahuje žádná data")

    full_index = pd.date_range(frame.index[0], frame.index[-1], freq=ONE_HOUR)
    if not frame.index.isin(full_index).all():
        raise ValidationError("Časové značky neleží na hodinové mřížce")
    if len(full_index) != len(frame):
        gaps = full_index.difference(frame.index)
        if not fill_gaps:
            raise ValidationError(
                f"V datech chybí {len(gaps)} hodin, první {gaps[0].isoformat()} (data.fill_gaps je vypnuto)"
            )
        logger.warning("Doplňuji %d chybějících hodin předchozí hodnotou", len(gaps))
        frame = frame.reindex(full_index).ffill()

    train_end, val_end = resolve_split_bounds(frame.index, splits)
    series = MarketSeries(frame.index, frame["price"].to_numpy(), frame["demand"].to_numpy(),
                          make_split(len(frame), train_end, val_end))
    logger.info("Načteno %d hodinových záznamů z %s", len(series), path)
    return series


@dataclass(frozen=True)
class SyntheticParams:
    """Parametry syntetického generátoru cen."""

    base_price: float = SYNTHETIC_BASE_PRICE
    amplitude: float = SYNTHETIC_AMPLITUDE
    noise_scale: float = SYNTHETIC_NOISE_SCALE
    noise_persistence: float = SYNTHETIC_NOISE_PERSISTENCE
    noise_clip: float = SYNTHETIC_NOISE_CLIP
    spike_min: float = SYNTHETIC_SPIKE_MIN
    spike_max: float = SYNTHETIC_SPIKE_MAX
    demand_base: float = SYNTHETIC_DEMAND_BASE
    demand_amplitude: float = SYNTHETIC_DEMAND_AMPLITUDE
    demand_noise: float = SYNTHETIC_DEMAND_NOISE
    start: str = SYNTHETIC_START

    @property
    def noise_bound(self):
        """Maximální absolutní hodnota šumu po oříznutí."""
        stationary_std = self.noise_scale / math.sqrt(1.0 - self.noise_persistence ** 2)
        return self.noise_clip * stationary_std

    @property
    def price_bound(self):
        """Horní mez ceny bez cenových špiček."""
        return self.base_price + abs(self.amplitude) + self.noise_bound


def generate_synthetic(length_hours, seed, spike_rate, params=None):
    """
    Vygeneruje syntetickou hodinovou řadu: denní sinusoida + šum + náhodné špičky.

    Šum je proces AR(1) (vrací se ke střední hodnotě) oříznutý na `noise_bound`.
    S pravděpodobností `spike_rate` za hodinu se cena vynásobí náhodným
    faktorem z intervalu [spike_min, spike_max].

    Args:
        length_hours (int): Počet hodin
        seed (int): Semínko generátoru
        spike_rate (float): Pravděpodobnost špičky za hodinu
        params (SyntheticParams, optional): Parametry generátoru

    Returns:
        MarketSeries: Řada s příznaky špiček v atributu `spikes`
    """
    if length_hours < 1:
        raise ArgumentError(f"length_hours musí být alespoň 1, je {length_hours}")
    if not 0.0 <= spike_rate <= 1.0:
        raise ArgumentError(f"spike_rate musí ležet v [0, 1], je {spike_rate}")
    params = params or SyntheticParams()
    if not 0.0 <= params.noise_persistence < 1.0:
        raise ArgumentError("noise_persistence musí ležet v [0, 1)")

    rng = np.random.default_rng(seed)
    timestamps = pd.date_range(pd.Timestamp(params.start), periods=length_hours, freq=ONE_HOUR)
    if timestamps.tz is None:
        timestamps = timestamps.tz_localize("UTC")
    hours = timestamps.hour.to_numpy()
    phase = 2.0 * np.pi * (hours - 11) / 24.0  # maximum v 17 h

    # Šum AR(1), první hodnota ze stacionárního rozdělení
    innovations = rng.normal(0.0, params.noise_scale, length_hours)
    phi = params.noise_persistence
    noise = np.empty(length_hours)
    noise[0] = innovations[0] / math.sqrt(1.0 - phi ** 2)
    for t in range(1, length_hours):
        noise[t] = phi * noise[t - 1] + innovations[t]
    noise = np.clip(noise, -params.noise_bound, params.noise_bound)

    base = params.base_price + params.amplitude * np.sin(phase) + noise

    # Špičky se losují vždy, aby řada při stejném semínku nezávisela na spike_rate
    spike_draws = rng.random(length_hours)
    magnitudes = rng.uniform(params.spike_min, params.spike_max, length_hours)
    spikes = spike_draws < spike_rate
    prices = np.where(spikes, base * magnitudes, base)

    demand = (params.demand_base + params.demand_amplitude * np.sin(phase)
              + rng.normal(0.0, params.demand_noise, length_hours))

    logger.debug("Vygenerováno %d hodin, %d špiček (seed=%s)", length_hours, int(spikes.sum()), seed)
    return MarketSeries(timestamps, prices, demand, make_split(length_hours), spikes)


@dataclass(frozen=True)
class ScalerParams:
    """Minimum a maximum každého příznaku na trénovací části řady."""

    features: tuple
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        minimum = np.array(self.minimum, dtype=np.float64).reshape(-1)
        maximum = np.array(self.maximum, dtype=np.float64).reshape(-1)
        if not (len(self.features) == len(minimum) == len(maximum)):
            raise ArgumentError("Počet příznaků neodpovídá mezím škálování")
        if np.any(maximum < minimum):
            raise ArgumentError("Maximum příznaku je menší než minimum")
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "minimum", minimum)
        object.__setattr__(self, "maximum", maximum)

    def column(self, feature):
        """Vrací parametry jediného příznaku."""
        index = self.features.index(feature)
        return ScalerParams((feature,), self.minimum[index:index + 1], self.maximum[index:index + 1])

    def to_dict(self):
        """Převede parametry na slovník pro kontrolní bod."""
        return {"features": list(self.features), "minimum": self.minimum.tolist(),
                "maximum": self.maximum.tolist()}

    @classmethod
    def from_dict(cls, data):
        """Vytvoří parametry ze slovníku."""
        return cls(tuple(data["features"]), data["minimum"], data["maximum"])


def encode_hour(timestamp):
    """
    Zakóduje hodinu dne do dvojice (sin, cos) s periodou 24 h.

    Args:
        timestamp: Časová značka (pd.Timestamp nebo datetime)

    Returns:
        tuple: (sin, cos)
    """
    angle = 2.0 * math.pi * pd.Timestamp(timestamp).hour / 24.0
    return math.sin(angle), math.cos(angle)


def ewma_smooth(values, alpha):
    """
    Exponenciálně vážený klouzavý průměr: s_0 = x_0, s_t = α·x_t + (1−α)·s_{t−1}.

    Args:
        values: Posloupnost cen
        alpha (float): Vyhlazovací koeficient v (0, 1]

    Returns:
        np.ndarray: Vyhlazená posloupnost stejné délky
    """
    if not 0.0 < alpha <= 1.0:
        raise ArgumentError(f"alpha musí ležet v (0, 1], je {alpha}")
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        return values.copy()
    return pd.Series(values).ewm(alpha=alpha, adjust=False).mean().to_numpy()


def feature_matrix(series, features, smoothing_alpha=None):
    """
    Sestaví matici příznaků (N × F) v pořadí `features`.

    Args:
        series (MarketSeries): Zdrojová řada
        features (list): Názvy příznaků z AVAILABLE_FEATURES
        smoothing_alpha (float, optional): Vyhlazení cenového příznaku (None nebo 0 = vypnuto)

    Returns:
        np.ndarray: Matice příznaků
    """
    unknown = [name for name in features if name not in AVAILABLE_FEATURES]
    if unknown or not features:
        raise ArgumentError(f"Neznámé nebo chybějící příznaky: {unknown or features}")

    angle = 2.0 * np.pi * series.timestamps.hour.to_numpy() / 24.0
    prices = series.prices
    if smoothing_alpha:
        prices = ewma_smooth(prices, smoothing_alpha)

    columns = {
        "price": prices,
        "demand": series.demand,
        "hour_sin": np.sin(angle),
        "hour_cos": np.cos(angle),
    }
    return np.column_stack([columns[name] for name in features]).astype(np.float64)


def fit_scaler(series, features, smoothing_alpha=None):
    """
    Určí min-max parametry příznaků pouze z trénovací části řady.

    Args:
        series (MarketSeries): Zdrojová řada
        features (list): Názvy příznaků
        smoothing_alpha (float, optional): Vyhlazení cen jako při tvorbě oken

    Returns:
        ScalerParams: Parametry škálování
    """
    start, end = series.segment("train")
    if end <= start:
        raise ArgumentError("Trénovací část řady je prázdná, škálování nelze určit")
    matrix = feature_matrix(series, features, smoothing_alpha)[start:end]
    return ScalerParams(tuple(features), matrix.min(axis=0), matrix.max(axis=0))


def apply_scaler(scaler, values):
    """
    Převede hodnoty do intervalu [−1, 1] podle trénovacích mezí (bez ořezu).
    Příznak s max == min se zobrazí na 0.

    Args:
        scaler (ScalerParams): Parametry škálování
        values: Pole s posledním rozměrem odpovídajícím počtu příznaků

    Returns:
        np.ndarray: Škálované hodnoty
    """
    if scaler is None:
        raise StateError("Škálování není nafitované")
    values = np.asarray(values, dtype=np.float64)
    span = scaler.maximum - scaler.minimum
    safe_span = np.where(span > 0, span, 1.0)
    scaled = 2.0 * (values - scaler.minimum) / safe_span - 1.0
    return np.where(span > 0, scaled, 0.0)


def invert_scaler(scaler, scaled):
    """
    Inverze k apply_scaler.

    Args:
        scaler (ScalerParams): Parametry škálování
        scaled: Škálované hodnoty

    Returns:
        np.ndarray: Hodnoty v původních jednotkách
    """
    if scaler is None:
        raise StateError("Škálování není nafitované")
    scaled = np.asarray(scaled, dtype=np.float64)
    span = scaler.maximum - scaler.minimum
    return (scaled + 1.0) / 2.0 * span + scaler.minimum


@dataclass(frozen=True)
class WindowedDataset:
    """Dvojice (okno příznaků, budoucí cena) pro trénink prognóz."""

    features: np.ndarray
    labels: np.ndarray
    window_size: int
    horizon: int
    feature_names: tuple = ()
    label_index: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.labels)


def build_windows(series, features, window_size, horizon, scaler, segment=None,
                  smoothing_alpha=None, scale_labels=False):
    """
    Vytvoří klouzavá okna: vzorek i obsahuje řádky i … i+w−1 a jeho štítek
    je cena v čase i+w−1+h.

    Args:
        series (MarketSeries): Zdrojová řada
        features (list): Názvy příznaků
        window_size (int): Délka okna v hodinách
        horizon (int): Horizont štítku v hodinách
        scaler (ScalerParams): Parametry škálování příznaků
        segment (str, optional): Omezení na část řady (train, validation, test)
        smoothing_alpha (float, optional): Vyhlazení cenového příznaku
        scale_labels (bool): Škálovat i štítky (výchozí jsou ceny v CAD/MWh)

    Returns:
        WindowedDataset: N − w − h + 1 vzorků
    """
    if window_size < 1 or horizon < 1:
        raise ArgumentError(f"window_size a horizon musí být ≥ 1 ({window_size}, {horizon})")
    start, end = series.segment(segment) if segment else (0, len(series))
    length = end - start
    if length < window_size + horizon:
        raise ArgumentError(
            f"Řada délky {length} je kratší než okno {window_size} + horizont {horizon}"
        )

    matrix = apply_scaler(scaler, feature_matrix(series, features, smoothing_alpha)[start:end])
    count = length - window_size - horizon + 1
    windows = np.lib.stride_tricks.sliding_window_view(matrix, window_size, axis=0)[:count]
    # sliding_window_view dává (S, F, w), okno ukládáme po časových krocích
    flat = np.ascontiguousarray(windows.transpose(0, 2, 1)).reshape(count, window_size * len(features))

    label_index = np.arange(count) + start + window_size - 1 + horizon
    labels = series.prices[label_index].astype(np.float64)
    if scale_labels:
        labels = apply_scaler(scaler.column("price"), labels[:, None])[:, 0]

    return WindowedDataset(
        features=flat,
        labels=labels,
        window_size=window_size,
        horizon=horizon,
        feature_names=tuple(features),
        label_index=label_index,
        metadata={"labels_scaled": bool(scale_labels), "segment": segment or "all",
                  "smoothing_alpha": smoothing_alpha or None},
    )
