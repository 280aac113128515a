"""GARCH-MIDAS: daily conditional variance with monthly drivers.

The daily return model is

    r_i = mu + sqrt(tau_{t(i)} * g_i) * eps_i,     eps_i ~ N(0, 1)

where ``t(i)`` is the month of day ``i``. The long-run component tau
moves at monthly frequency and loads K lagged monthly covariates
through a normalized beta-polynomial weight scheme; the short-run
component g is a unit-mean GARCH(1,1)-style recursion in the lagged
squared return innovation:

    g_i = (1 - alpha - beta) + alpha * (r_{i-1} - mu)^2 / tau_{t(i-1)}
          + beta * g_{i-1},        g_0 = 1.

Using the previous day's innovation keeps the filter causal. The
intercept is pinned to 1 - alpha - beta so that g has unconditional
mean one and the level of variance is carried by tau alone.

Two tau links are supported: ``exp`` of the affine combination (the
default for exogenous covariates, sign-unconstrained) and the identity
(classic realized-volatility windows, where positivity must hold).

Estimation is maximum likelihood over an unconstrained
reparameterization, optimized with Nelder-Mead simplex search from
several seeded starting points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import (
    BadParameter,
    BadSpec,
    DegenerateData,
    InsufficientLags,
    LengthMismatch,
    NoConvergence,
    NonFiniteLikelihood,
    NonPositiveTau,
)
from .realized_vol import monthly_rv

LOG_2PI = math.log(2.0 * math.pi)
PENALTY = 1e15
MIN_PERSISTENCE = 1e-12
MAX_PERSISTENCE = 1.0 - 1e-8


@dataclass(frozen=True)
class MidasSpec:
    """Structural choices of the model, fixed before estimation.

    ``mode`` selects the monthly covariates: "exogenous" takes them
    from the data container, "rv-window" builds them as within-month
    realized variance of the daily returns themselves. The identity
    tau link is only permitted in rv-window mode, where the covariate
    is nonnegative by construction.
    """

    n_lags: int = 12
    mode: str = "exogenous"
    n_covariates: int = 1
    tau_link: str = ""
    free_w1: bool = False

    def __post_init__(self):
        if self.mode not in ("exogenous", "rv-window"):
            raise BadSpec(f"unknown mode {self.mode!r}")
        if self.n_lags < 1:
            raise BadSpec(f"n_lags must be >= 1, got {self.n_lags}")
        if self.mode == "rv-window" and self.n_covariates != 1:
            raise BadSpec("rv-window mode implies a single covariate")
        if self.n_covariates < 1:
            raise BadSpec("need at least one covariate")
        link = self.tau_link or ("identity" if self.mode == "rv-window"
                                 else "log")
        if link not in ("log", "identity"):
            raise BadSpec(f"unknown tau link {link!r}")
        if link == "identity" and self.mode != "rv-window":
            raise BadSpec("identity tau link requires rv-window mode")
        object.__setattr__(self, "tau_link", link)


@dataclass
class MidasParams:
    """Parameter vector; ``theta``/``w2``/``w1`` hold one entry per covariate."""

    mu: float
    alpha: float
    beta: float
    m: float
    theta: np.ndarray
    w2: np.ndarray
    w1: np.ndarray | None = None

    def __post_init__(self):
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        self.w2 = np.atleast_1d(np.asarray(self.w2, dtype=float))
        if self.w1 is None:
            self.w1 = np.ones_like(self.w2)
        else:
            self.w1 = np.atleast_1d(np.asarray(self.w1, dtype=float))

    def validate(self, spec: MidasSpec | None = None) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise BadParameter("alpha and beta must be nonnegative")
        if self.alpha + self.beta >= 1:
            raise BadParameter(
                f"alpha + beta = {self.alpha + self.beta} must be < 1")
        if np.any(self.w1 < 1) or np.any(self.w2 < 1):
            raise BadParameter("weight shape parameters must be >= 1")
        J = len(self.theta)
        if len(self.w2) != J or len(self.w1) != J:
            raise BadParameter("theta, w1 and w2 must have equal length")
        if spec is not None:
            if J != spec.n_covariates:
                raise BadParameter(
                    f"expected {spec.n_covariates} covariates, got {J}")
            if spec.tau_link == "identity" and self.m <= 0:
                raise BadParameter(
                    "identity link requires a positive intercept m")

    def to_json(self) -> dict:
        return {
            "mu": self.mu, "alpha": self.alpha, "beta": self.beta,
            "m": self.m, "theta": self.theta.tolist(),
            "w1": self.w1.tolist(), "w2": self.w2.tolist(),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "MidasParams":
        return cls(mu=doc["mu"], alpha=doc["alpha"], beta=doc["beta"],
                   m=doc["m"], theta=np.array(doc["theta"]),
                   w2=np.array(doc["w2"]), w1=np.array(doc["w1"]))


@dataclass
class MidasData:
    """Daily returns with month structure and monthly covariates.

    ``month_index`` maps each day to a 0-based contiguous month id in
    chronological order. ``covariates`` has one row per month and is
    required in exogenous mode (ignored in rv-window mode).
    """

    returns: np.ndarray
    month_index: np.ndarray
    covariates: np.ndarray | None = None
    dates: list[str] | None = None

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        self.month_index = np.asarray(self.month_index, dtype=np.int64)
        if self.returns.shape != self.month_index.shape:
            raise LengthMismatch("returns and month_index differ in length")
        if self.returns.size == 0:
            raise DegenerateData("no days")
        steps = np.diff(self.month_index)
        if self.month_index[0] != 0 or np.any(steps < 0) or np.any(steps > 1):
            raise DegenerateData(
                "month_index must be 0-based, sorted and contiguous")
        if self.covariates is not None:
            self.covariates = np.atleast_2d(
                np.asarray(self.covariates, dtype=float))
            if self.covariates.shape[0] != self.n_months:
                raise LengthMismatch(
                    f"covariates have {self.covariates.shape[0]} rows, "
                    f"panel spans {self.n_months} months")

    @property
    def n_months(self) -> int:
        return int(self.month_index[-1]) + 1

    def prefix(self, n_days: int) -> "MidasData":
        """Restrict to the first ``n_days`` rows (for train-only fits)."""
        if not (0 < n_days <= len(self.returns)):
            raise LengthMismatch(f"n_days out of range: {n_days}")
        idx = self.month_index[:n_days]
        n_months = int(idx[-1]) + 1
        return MidasData(
            returns=self.returns[:n_days].copy(),
            month_index=idx.copy(),
            covariates=None if self.covariates is None
            else self.covariates[:n_months].copy(),
            dates=None if self.dates is None else self.dates[:n_days],
        )


@dataclass
class MidasFiltered:
    """Conditional components over the modeled days.

    Days in the first ``n_lags`` months are warm-up: they only feed
    covariate lags and carry no tau/g/h values.
    """

    day_slice: slice
    tau: np.ndarray
    g: np.ndarray
    h: np.ndarray
    tau_monthly: np.ndarray
    first_month: int


@dataclass
class MidasFit:
    spec: MidasSpec
    params: MidasParams
    log_lik: float
    filtered: MidasFiltered
    convergence: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# Weight scheme and components
# ----------------------------------------------------------------------

def beta_weights(n_lags: int, w1: float = 1.0, w2: float = 1.0) -> np.ndarray:
    """Normalized beta-polynomial lag weights.

    phi_k is proportional to (k/K)^(w1-1) * (1 - k/K)^(w2-1) for
    k = 1..K, rescaled to sum to one. With w1 = 1 the weights decay
    monotonically in the lag; larger w2 concentrates mass on the most
    recent month. A single lag always receives weight one.
    """
    if n_lags < 1:
        raise BadParameter(f"n_lags must be >= 1, got {n_lags}")
    if w1 < 1 or w2 < 1:
        raise BadParameter(f"need w1 >= 1 and w2 >= 1, got ({w1}, {w2})")
    if n_lags == 1:
        return np.ones(1)
    k = np.arange(1, n_lags + 1, dtype=float) / n_lags
    with np.errstate(divide="ignore"):
        raw = k ** (w1 - 1.0) * (1.0 - k) ** (w2 - 1.0)
    total = raw.sum()
    if not np.isfinite(total) or total <= 0:
        raise BadParameter(
            f"degenerate weights for (K={n_lags}, w1={w1}, w2={w2})")
    return raw / total


def lag_matrix(x: np.ndarray, n_lags: int) -> np.ndarray:
    """Row t holds [x_{t-1}, ..., x_{t-K}], NaN where t-k falls before
    the start of the series (so only rows K.. are complete)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise LengthMismatch("lag_matrix expects a 1-d series")
    if n_lags < 1:
        raise BadParameter(f"n_lags must be >= 1, got {n_lags}")
    M = len(x)
    out = np.full((M, n_lags), np.nan)
    for k in range(1, n_lags + 1):
        out[k:, k - 1] = x[:M - k]
    return out


def _stacked_lags(covariates: np.ndarray, n_lags: int) -> np.ndarray:
    """(n_modeled_months, K, J) lag block for months K..M-1."""
    M, J = covariates.shape
    if M <= n_lags:
        raise InsufficientLags(
            f"{M} months cannot support {n_lags} lags")
    return np.stack(
        [covariates[n_lags - k: M - k, :] for k in range(1, n_lags + 1)],
        axis=1)


def long_run_tau(spec: MidasSpec, params: MidasParams,
                 lagged: np.ndarray) -> np.ndarray:
    """Monthly long-run variance from covariate lags.

    ``lagged`` has shape (n_months, K, J) with lag 1 first. Under the
    identity link any non-positive tau raises
    :class:`NonPositiveTau`; the log link exponentiates instead.
    """
    params.validate(spec)
    lagged = np.asarray(lagged, dtype=float)
    if lagged.ndim == 2:
        lagged = lagged[:, :, None]
    if lagged.shape[1] != spec.n_lags or lagged.shape[2] != spec.n_covariates:
        raise LengthMismatch(
            f"lag block {lagged.shape} does not match "
            f"(K={spec.n_lags}, J={spec.n_covariates})")
    acc = np.full(lagged.shape[0], params.m)
    for j in range(spec.n_covariates):
        phi = beta_weights(spec.n_lags, float(params.w1[j]),
                           float(params.w2[j]))
        acc = acc + params.theta[j] * (lagged[:, :, j] @ phi)
    if spec.tau_link == "log":
        return np.exp(acc)
    if np.any(acc <= 0):
        bad = int(np.flatnonzero(acc <= 0)[0])
        raise NonPositiveTau(
            f"tau non-positive at modeled month {bad} ({acc[bad]:.6g})")
    return acc


def short_run_g(params: MidasParams, returns: np.ndarray,
                tau_daily: np.ndarray) -> np.ndarray:
    """Unit-mean short-run recursion over consecutive modeled days.

    g_0 = 1; afterwards the previous day's squared demeaned return,
    standardized by that day's tau, drives the update.
    """
    returns = np.asarray(returns, dtype=float)
    tau_daily = np.asarray(tau_daily, dtype=float)
    if returns.shape != tau_daily.shape or returns.ndim != 1:
        raise LengthMismatch("returns and tau_daily differ in shape")
    n = len(returns)
    g = np.empty(n)
    g[0] = 1.0
    if n > 1:
        omega = 1.0 - params.alpha - params.beta
        shocks = (returns - params.mu) ** 2 / tau_daily
        drive = omega + params.alpha * shocks[:-1]
        tail, _ = lfilter([1.0], [1.0, -params.beta], drive,
                          zi=np.array([params.beta * g[0]]))
        g[1:] = tail
    return g


def filter_volatility(spec: MidasSpec, params: MidasParams,
                      data: MidasData) -> MidasFiltered:
    """Run the full two-component filter over the modeled days."""
    params.validate(spec)
    X = _covariate_matrix(spec, data)
    lagged = _stacked_lags(X, spec.n_lags)
    tau_monthly = long_run_tau(spec, params, lagged)
    start = int(np.searchsorted(data.month_index, spec.n_lags))
    if start >= len(data.returns):
        raise InsufficientLags("no days left after the lag warm-up")
    day_slice = slice(start, len(data.returns))
    tau_daily = tau_monthly[data.month_index[day_slice] - spec.n_lags]
    g = short_run_g(params, data.returns[day_slice], tau_daily)
    return MidasFiltered(
        day_slice=day_slice,
        tau=tau_daily,
        g=g,
        h=tau_daily * g,
        tau_monthly=tau_monthly,
        first_month=spec.n_lags,
    )


def _covariate_matrix(spec: MidasSpec, data: MidasData) -> np.ndarray:
    if spec.mode == "rv-window":
        rv = monthly_rv(data.returns, data.month_index)
        return rv[:, None]
    if data.covariates is None:
        raise DegenerateData("exogenous mode needs a covariate matrix")
    if data.covariates.shape[1] != spec.n_covariates:
        raise LengthMismatch(
            f"data carries {data.covariates.shape[1]} covariates, "
            f"spec wants {spec.n_covariates}")
    return data.covariates


def log_likelihood(spec: MidasSpec, params: MidasParams,
                   data: MidasData) -> float:
    """Gaussian log likelihood summed over the modeled days."""
    filtered = filter_volatility(spec, params, data)
    r = data.returns[filtered.day_slice]
    h = filtered.h
    ll = -0.5 * np.sum(LOG_2PI + np.log(h) + (r - params.mu) ** 2 / h)
    ll = float(ll)
    if not math.isfinite(ll):
        raise NonFiniteLikelihood(f"log likelihood is {ll}")
    return ll


# ----------------------------------------------------------------------
# Estimation
# ----------------------------------------------------------------------

def _pack(params: MidasParams, spec: MidasSpec, theta_zero: bool) -> np.ndarray:
    p = params.alpha + params.beta
    p = min(max(p, MIN_PERSISTENCE), MAX_PERSISTENCE)
    share = params.alpha / p if p > 0 else 0.5
    share = min(max(share, MIN_PERSISTENCE), 1.0 - MIN_PERSISTENCE)
    u = [params.mu,
         math.log(p / (1.0 - p)),
         math.log(share / (1.0 - share)),
         math.log(params.m) if spec.tau_link == "identity" else params.m]
    if not theta_zero:
        u.extend(params.theta.tolist())
        u.extend(math.log(max(w2 - 1.0, 1e-10)) for w2 in params.w2)
        if spec.free_w1:
            u.extend(math.log(max(w1 - 1.0, 1e-10)) for w1 in params.w1)
    return np.array(u, dtype=float)


def _unpack(u: np.ndarray, spec: MidasSpec, theta_zero: bool) -> MidasParams:
    J = spec.n_covariates
    p = 1.0 / (1.0 + math.exp(-min(max(u[1], -40.0), 40.0)))
    p = min(max(p, MIN_PERSISTENCE), MAX_PERSISTENCE)
    share = 1.0 / (1.0 + math.exp(-min(max(u[2], -40.0), 40.0)))
    m = math.exp(min(u[3], 60.0)) if spec.tau_link == "identity" else u[3]
    if theta_zero:
        theta = np.zeros(J)
        w2 = np.ones(J)
        w1 = np.ones(J)
    else:
        theta = np.array(u[4:4 + J])
        w2 = 1.0 + np.exp(np.minimum(u[4 + J:4 + 2 * J], 30.0))
        if spec.free_w1:
            w1 = 1.0 + np.exp(np.minimum(u[4 + 2 * J:4 + 3 * J], 30.0))
        else:
            w1 = np.ones(J)
    return MidasParams(mu=float(u[0]), alpha=p * share, beta=p * (1 - share),
                       m=m, theta=theta, w2=w2, w1=w1)


def _default_init(spec: MidasSpec, data: MidasData) -> MidasParams:
    r = data.returns
    var = float(np.var(r))
    m = max(var, 1e-8) if spec.tau_link == "identity" else math.log(max(var, 1e-8))
    J = spec.n_covariates
    return MidasParams(mu=float(np.mean(r)), alpha=0.05, beta=0.90, m=m,
                       theta=np.full(J, 0.1), w2=np.full(J, 3.0))


def fit(spec: MidasSpec, data: MidasData, init: MidasParams | None = None,
        n_restarts: int = 5, seed: int = 0, max_iter: int = 5000,
        theta_zero: bool = False) -> MidasFit:
    """Maximum-likelihood estimation by seeded Nelder-Mead restarts.

    The first start is ``init`` (or a moment-based default); the
    remaining ``n_restarts - 1`` starts perturb it in the unconstrained
    space with a seeded generator. The best converged restart wins;
    ties go to the earlier restart. ``theta_zero`` pins the covariate
    slopes to zero, leaving a plain GARCH(1,1) with free level.

    Raises
    ------
    DegenerateData
        If the modeled returns have zero variance.
    NoConvergence
        If no restart converges to a finite optimum.
    """
    if float(np.ptp(data.returns)) == 0.0:
        raise DegenerateData("returns have zero variance")
    # surfaces InsufficientLags early, before any optimizer work
    _stacked_lags(_covariate_matrix(spec, data), spec.n_lags)

    start = _pack(init if init is not None else _default_init(spec, data),
                  spec, theta_zero)

    def objective(u: np.ndarray) -> float:
        try:
            params = _unpack(u, spec, theta_zero)
            return -log_likelihood(spec, params, data)
        except (BadParameter, NonPositiveTau, NonFiniteLikelihood,
                FloatingPointError, OverflowError):
            return PENALTY

    rng = np.random.default_rng(seed)
    scale = 0.25 * np.ones_like(start)
    scale[1:3] = 1.0
    results = []
    for r_idx in range(max(1, n_restarts)):
        u0 = start if r_idx == 0 else start + rng.normal(0.0, scale)
        res = minimize(
            objective, u0, method="Nelder-Mead",
            options={"maxiter": max_iter, "maxfev": 2 * max_iter,
                     "fatol": 1e-8, "xatol": 1e-8, "adaptive": False},
        )
        results.append((r_idx, res))

    usable = [(i, r) for i, r in results if r.success and r.fun < PENALTY / 2]
    if not usable:
        raise NoConvergence(
            "no Nelder-Mead restart converged to a finite optimum")
    best_idx, best = min(usable, key=lambda pair: (pair[1].fun, pair[0]))
    params = _unpack(best.x, spec, theta_zero)
    params.validate(spec)
    filtered = filter_volatility(spec, params, data)
    fsim = best.final_simplex[1]
    return MidasFit(
        spec=spec,
        params=params,
        log_lik=-float(best.fun),
        filtered=filtered,
        convergence={
            "restarts": len(results),
            "converged_restarts": len(usable),
            "best_restart": best_idx,
            "iterations": int(best.nit),
            "function_evals": int(best.nfev),
            "terminal_spread": float(np.max(np.abs(fsim - fsim[0]))),
        },
    )


# ----------------------------------------------------------------------
# Simulation
# ----------------------------------------------------------------------

@dataclass
class SimulatedMidas:
    """Output of :func:`simulate`.

    ``tau``/``g``/``h`` cover the modeled days only (after the warm-up
    months); ``returns``, ``month_index`` and ``day_variance`` span
    every day.
    """

    returns: np.ndarray
    month_index: np.ndarray
    covariates: np.ndarray
    modeled_start: int
    tau: np.ndarray
    g: np.ndarray
    h: np.ndarray
    day_variance: np.ndarray

    @property
    def modeled_returns(self) -> np.ndarray:
        return self.returns[self.modeled_start:]

    def to_data(self, spec: MidasSpec) -> MidasData:
        return MidasData(
            returns=self.returns,
            month_index=self.month_index,
            covariates=None if spec.mode == "rv-window" else self.covariates,
        )


def simulate(spec: MidasSpec, params: MidasParams, months: int,
             days_per_month: int = 21, seed: int = 0, cov_rho: float = 0.8,
             day_var_multiplier: np.ndarray | None = None) -> SimulatedMidas:
    """Draw a panel from the model.

    The first ``spec.n_lags`` months are warm-up: their returns are
    drawn at the covariate-free variance level (m, or exp(m) under the
    log link) and exist so that every modeled month has a full lag
    window. Exogenous covariates follow stationary AR(1) processes
    with coefficient ``cov_rho`` and unit variance; in rv-window mode
    the covariate is the realized within-month variance of the
    simulated returns themselves.

    ``day_var_multiplier`` scales the variance used to draw each day's
    return (length = total days). It models volatility sources outside
    the MIDAS system: the emitted tau/g/h remain the filter values
    implied by the realized returns, so refiltering the returns
    reproduces them exactly.
    """
    params.validate(spec)
    if months <= spec.n_lags:
        raise InsufficientLags(
            f"months must exceed n_lags={spec.n_lags}, got {months}")
    if days_per_month < 1:
        raise BadSpec("days_per_month must be >= 1")
    if not (-1.0 < cov_rho < 1.0):
        raise BadSpec(f"cov_rho must lie in (-1, 1), got {cov_rho}")

    rng = np.random.default_rng(seed)
    n_days = months * days_per_month
    month_index = np.repeat(np.arange(months), days_per_month)
    if day_var_multiplier is None:
        day_var_multiplier = np.ones(n_days)
    else:
        day_var_multiplier = np.asarray(day_var_multiplier, dtype=float)
        if day_var_multiplier.shape != (n_days,):
            raise LengthMismatch(
                f"multiplier must have length {n_days}")
        if np.any(day_var_multiplier <= 0):
            raise BadSpec("variance multipliers must be positive")

    J = spec.n_covariates
    if spec.mode == "exogenous":
        innov_sd = math.sqrt(1.0 - cov_rho ** 2)
        X = np.empty((months, J))
        X[0] = rng.standard_normal(J)
        for t in range(1, months):
            X[t] = cov_rho * X[t - 1] + innov_sd * rng.standard_normal(J)
    else:
        X = np.zeros((months, 1))

    eps = rng.standard_normal(n_days)
    base_var = params.m if spec.tau_link == "identity" else math.exp(params.m)
    K = spec.n_lags
    start = K * days_per_month
    returns = np.empty(n_days)

    # warm-up months: covariate-free variance, g pinned at its mean
    warm = slice(0, start)
    returns[warm] = params.mu + np.sqrt(
        base_var * day_var_multiplier[warm]) * eps[warm]

    if spec.mode == "rv-window":
        for t in range(K):
            day = slice(t * days_per_month, (t + 1) * days_per_month)
            X[t, 0] = float(np.sum((returns[day]) ** 2))

    omega = 1.0 - params.alpha - params.beta
    n_model = n_days - start
    tau = np.empty(n_model)
    g = np.empty(n_model)
    h = np.empty(n_model)
    day_var = np.empty(n_days)
    day_var[warm] = base_var * day_var_multiplier[warm]
    phi = [beta_weights(K, float(params.w1[j]), float(params.w2[j]))
           for j in range(J)]

    def tau_of_month(t: int) -> float:
        acc = params.m
        for j in range(J):
            lags = X[t - K:t, j][::-1]     # lag 1 first
            acc += params.theta[j] * float(lags @ phi[j])
        if spec.tau_link == "log":
            return math.exp(acc)
        if acc <= 0:
            raise NonPositiveTau(f"simulated tau non-positive in month {t}")
        return acc

    month_tau = np.empty(months)
    month_tau[:K] = np.nan
    for i in range(n_model):
        day = start + i
        t = int(month_index[day])
        if i == 0 or month_index[day - 1] != t:
            if spec.mode == "rv-window" and t > K:
                prev = slice((t - 1) * days_per_month, t * days_per_month)
                X[t - 1, 0] = float(np.sum(returns[prev] ** 2))
            month_tau[t] = tau_of_month(t)
        tau[i] = month_tau[t]
        if i == 0:
            g[i] = 1.0
        else:
            shock = (returns[day - 1] - params.mu) ** 2 / tau[i - 1]
            g[i] = omega + params.alpha * shock + params.beta * g[i - 1]
        h[i] = tau[i] * g[i]
        day_var[day] = h[i] * day_var_multiplier[day]
        returns[day] = params.mu + math.sqrt(day_var[day]) * eps[day]

    if spec.mode == "rv-window":
        last = slice((months - 1) * days_per_month, n_days)
        X[months - 1, 0] = float(np.sum(returns[last] ** 2))

    return SimulatedMidas(
        returns=returns,
        month_index=month_index,
        covariates=X,
        modeled_start=start,
        tau=tau,
        g=g,
        h=h,
        day_variance=day_var,
    )


# ----------------------------------------------------------------------
# Persistence
# ----------------------------------------------------------------------

def write_fit(fit_result: MidasFit, path: str) -> None:
    doc = {
        "spec": {
            "n_lags": fit_result.spec.n_lags,
            "mode": fit_result.spec.mode,
            "n_covariates": fit_result.spec.n_covariates,
            "tau_link": fit_result.spec.tau_link,
            "free_w1": fit_result.spec.free_w1,
        },
        "params": fit_result.params.to_json(),
        "log_likelihood": fit_result.log_lik,
        "convergence": fit_result.convergence,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def read_fit(path: str) -> tuple[MidasSpec, MidasParams, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    spec = MidasSpec(**doc["spec"])
    params = MidasParams.from_json(doc["params"])
    return spec, params, doc


def write_h(dates: list[str], filtered: MidasFiltered, path: str) -> None:
    """Write ``date,tau,g,h`` rows for the modeled days."""
    modeled_dates = dates[filtered.day_slice]
    with open(path, "w", newline="") as fh:
        fh.write("date,tau,g,h\n")
        for i, d in enumerate(modeled_dates):
            fh.write(f"{d},{float(filtered.tau[i])!r},{float(filtered.g[i])!r},"
                     f"{float(filtered.h[i])!r}\n")


def read_h(path: str) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    from .errors import MalformedRow, MissingFile
    import os

    if not os.path.exists(path):
        raise MissingFile(f"no such file: {path}")
    dates: list[str] = []
    tau, g, h = [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "date,tau,g,h":
            raise MalformedRow(path, 1, f"bad header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise MalformedRow(path, line_no, "expected 4 fields")
            dates.append(parts[0])
            try:
                tau.append(float(parts[1]))
                g.append(float(parts[2]))
                h.append(float(parts[3]))
            except ValueError:
                raise MalformedRow(path, line_no, "bad number")
    return dates, np.array(tau), np.array(g), np.array(h)
