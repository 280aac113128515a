"""Realized volatility from 5-minute prices.

Daily realized variance is the sum of squared 5-minute log returns
(in percent). Because intraday bars miss overnight movement, realized
variance underestimates the variance of close-to-close returns; the
scale parameter

    lambda = mean(ret^2) / mean(rv)

rescales the series so that the adjusted values match the squared
daily returns in sample mean. Within a day the first bar serves as
the base price, so a day with b bars contributes b - 1 squared
returns.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EmptyMonth,
    InputError,
    InsufficientBars,
    LengthMismatch,
    MalformedRow,
    MissingFile,
    NonPositiveLambda,
    ZeroRvSum,
)
from .marketdata import Bar, IntradaySeries

RET_SCALE = 100.0


@dataclass
class RvSeries:
    """Per-day returns and realized variance for one instrument.

    The first trading day of the input has no previous close, so the
    series starts on the second day.
    """

    dates: list[str]
    ret: np.ndarray
    rv: np.ndarray
    rv_adj: np.ndarray
    lam: float

    @property
    def n_days(self) -> int:
        return len(self.dates)


def daily_return(price: float, prev_price: float) -> float:
    """Percent log return between consecutive daily prices."""
    if price <= 0 or prev_price <= 0:
        raise InputError("prices must be positive")
    return RET_SCALE * (math.log(price) - math.log(prev_price))


def intraday_returns(bars: Sequence[Bar]) -> np.ndarray:
    """Percent log returns between consecutive bars of a single day."""
    if len(bars) < 2:
        raise InsufficientBars(
            f"need at least 2 bars, got {len(bars)}"
            + (f" on {bars[0].date}" if bars else ""))
    prices = np.array([b.price for b in bars], dtype=float)
    if np.any(prices <= 0):
        raise InputError("prices must be positive")
    logp = np.log(prices)
    return RET_SCALE * np.diff(logp)


def realized_variance(bars: Sequence[Bar]) -> float:
    """Sum of squared intraday percent log returns for one day."""
    r = intraday_returns(bars)
    return float(np.sum(r * r))


def scale_parameter(daily_returns: np.ndarray, rv: np.ndarray) -> float:
    """Ratio of mean squared daily return to mean realized variance."""
    daily_returns = np.asarray(daily_returns, dtype=float)
    rv = np.asarray(rv, dtype=float)
    if daily_returns.shape != rv.shape or daily_returns.ndim != 1:
        raise LengthMismatch(
            f"returns {daily_returns.shape} vs rv {rv.shape}")
    if daily_returns.size == 0:
        raise LengthMismatch("empty series")
    rv_sum = float(np.sum(rv))
    if rv_sum <= 0:
        raise ZeroRvSum("realized variance sums to zero")
    lam = float(np.sum(daily_returns * daily_returns) / rv_sum)
    if lam <= 0:
        raise NonPositiveLambda(
            "all daily returns are zero, scale undefined")
    return lam


def adjust_rv(rv: np.ndarray, lam: float) -> np.ndarray:
    """Rescale realized variance by the scale parameter."""
    if lam <= 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    return np.asarray(rv, dtype=float) * lam


def monthly_rv(daily_returns: np.ndarray, month_index: np.ndarray) -> np.ndarray:
    """Sum squared daily returns within each month.

    ``month_index`` holds 0-based contiguous month ids per day; every
    id in ``0..max`` must occur at least once.
    """
    daily_returns = np.asarray(daily_returns, dtype=float)
    month_index = np.asarray(month_index, dtype=np.int64)
    if daily_returns.shape != month_index.shape or daily_returns.ndim != 1:
        raise LengthMismatch(
            f"returns {daily_returns.shape} vs month index {month_index.shape}")
    if daily_returns.size == 0:
        raise EmptyMonth("no days at all")
    n_months = int(month_index.max()) + 1
    counts = np.bincount(month_index, minlength=n_months)
    if np.any(counts == 0):
        missing = int(np.flatnonzero(counts == 0)[0])
        raise EmptyMonth(f"month id {missing} has no trading days")
    return np.bincount(month_index, weights=daily_returns * daily_returns,
                       minlength=n_months)


def compute_rv_series(series: IntradaySeries) -> RvSeries:
    """Full pipeline from validated bars to the adjusted RV series.

    Daily prices are the last bar of each day. Every day must carry at
    least two bars. The first day is dropped (no previous close).
    """
    days = series.days()
    if len(days) < 2:
        raise InsufficientBars("need at least 2 trading days")
    closes = []
    rvs = []
    for day_date, bars in days:
        if len(bars) < 2:
            raise InsufficientBars(
                f"day {day_date} has {len(bars)} bar(s), need at least 2")
        closes.append(bars[-1].price)
        rvs.append(realized_variance(bars))
    dates = [d for d, _ in days][1:]
    ret = np.array([
        daily_return(closes[i + 1], closes[i]) for i in range(len(closes) - 1)
    ])
    rv = np.array(rvs[1:])
    lam = scale_parameter(ret, rv)
    return RvSeries(dates=dates, ret=ret, rv=rv, rv_adj=adjust_rv(rv, lam),
                    lam=lam)


# ----------------------------------------------------------------------
# Persistence
# ----------------------------------------------------------------------

def write_rv(series: RvSeries, csv_path: str, sidecar_path: str) -> None:
    """Write ``date,ret,rv,rv_adj`` rows plus the lambda sidecar JSON."""
    with open(csv_path, "w", newline="") as fh:
        fh.write("date,ret,rv,rv_adj\n")
        for i, d in enumerate(series.dates):
            fh.write(f"{d},{float(series.ret[i])!r},{float(series.rv[i])!r},"
                     f"{float(series.rv_adj[i])!r}\n")
    with open(sidecar_path, "w") as fh:
        json.dump({"lambda": series.lam, "n_days": series.n_days}, fh)
        fh.write("\n")


def read_rv(csv_path: str, sidecar_path: str | None = None) -> RvSeries:
    """Read back a series written by :func:`write_rv`."""
    if not os.path.exists(csv_path):
        raise MissingFile(f"no such file: {csv_path}")
    dates: list[str] = []
    cols: dict[str, list[float]] = {"ret": [], "rv": [], "rv_adj": []}
    with open(csv_path) as fh:
        header = fh.readline().strip()
        if header != "date,ret,rv,rv_adj":
            raise MalformedRow(csv_path, 1, f"bad header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise MalformedRow(csv_path, line_no, "expected 4 fields")
            dates.append(parts[0])
            try:
                cols["ret"].append(float(parts[1]))
                cols["rv"].append(float(parts[2]))
                cols["rv_adj"].append(float(parts[3]))
            except ValueError:
                raise MalformedRow(csv_path, line_no, "bad number")
    lam = math.nan
    if sidecar_path is not None:
        if not os.path.exists(sidecar_path):
            raise MissingFile(f"no such file: {sidecar_path}")
        with open(sidecar_path) as fh:
            lam = float(json.load(fh)["lambda"])
    return RvSeries(
        dates=dates,
        ret=np.array(cols["ret"]),
        rv=np.array(cols["rv"]),
        rv_adj=np.array(cols["rv_adj"]),
        lam=lam,
    )
