"""
Battery Arbitrage Lab - laboratoř pro řízení bateriového úložiště na trhu s elektřinou.
"""

__version__ = "1.0.0"
__author__ = "mastnacek"
