#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Sdílené fixtury testů.
"""

import numpy as np
import pandas as pd
import pytest

from model.market_data import MarketSeries, make_split


def build_series(prices, start="2022-01-01T00:00:00Z", demand=None, train_end=None, val_end=None):
    """Hodinová řada ze seznamu cen (spotřeba konstantní, pokud není zadána)."""
    prices = np.asarray(prices, dtype=np.float64)
    timestamps = pd.date_range(pd.Timestamp(start), periods=len(prices), freq=pd.Timedelta(hours=1))
    demand = np.full(len(prices), 1000.0) if demand is None else demand
    return MarketSeries(timestamps, prices, demand, make_split(len(prices), train_end, val_end))


@pytest.fixture
def series_factory():
    """Továrna na řady ze zadaných cen."""
    return build_series


@pytest.fixture(autouse=True)
def qt_application():
    """Jediná QCoreApplication pro testy, které používají QSettings a signály."""
    from PySide6.QtCore import QCoreApplication
    app = QCoreApplication.instance() or QCoreApplication(["tests"])
    yield app
