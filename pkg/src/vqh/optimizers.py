"""Derivative-free minimizers driving the variational loop.

Every call of the cost function counts as one evaluation against the budget;
callers attach their own recording to the callable.  A non-finite cost value
aborts the run with a diagnostic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

OPTIMIZER_NAMES = ("cobyla", "spsa", "nft")

# SPSA gain schedule defaults; the stability constant defaults to 10% of the
# iteration count (budget // 2).
SPSA_A = 0.2
SPSA_C = 0.1
SPSA_ALPHA = 0.602
SPSA_GAMMA = 0.101

COBYLA_RHOBEG = 1.0
COBYLA_TOL = 1e-10


class _BudgetExhausted(Exception):
    pass


@dataclass
class MinimizeOutcome:
    params: np.ndarray
    value: float
    evaluations: int


class _Counter:
    """Budget guard around the cost function; tracks the best point seen."""

    def __init__(self, f: Callable, budget: int):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.f = f
        self.budget = budget
        self.spent = 0
        self.best_value = math.inf
        self.best_params: np.ndarray | None = None

    @property
    def remaining(self) -> int:
        return self.budget - self.spent

    def __call__(self, x) -> float:
        if self.spent >= self.budget:
            raise _BudgetExhausted
        self.spent += 1
        value = float(self.f(np.asarray(x, dtype=float)))
        if not math.isfinite(value):
            raise RuntimeError(
                f"cost returned non-finite value {value!r} at evaluation {self.spent}"
            )
        if value < self.best_value:
            self.best_value = value
            self.best_params = np.array(x, dtype=float)
        return value


def _wrap_angle(theta: float) -> float:
    # range (-pi, pi], so the canonical minimizer of cos stays at +pi
    return float(-((-theta + np.pi) % (2.0 * np.pi) - np.pi))


def nft_minimize(f: Callable, x0, budget: int) -> MinimizeOutcome:
    """Sequential per-parameter sinusoidal fits.

    Each parameter visit measures the cost at ±π/2 offsets, fits
    A·cos(θ+φ) + C through those points and the incumbent value, and jumps
    the parameter to the analytic minimizer.  Visits sweep the parameters
    cyclically; each visit closes with an on-path measurement so the record
    stream returns to the optimization trajectory.
    """
    counter = _Counter(f, budget)
    theta = np.asarray(x0, dtype=float).copy()
    dim = theta.shape[0]
    f_cur = counter(theta)
    k = 0
    while counter.remaining >= 2:
        i = k % dim
        k += 1
        probe = np.zeros(dim)
        probe[i] = np.pi / 2.0
        f_plus = counter(theta + probe)
        f_minus = counter(theta - probe)
        mean = 0.5 * (f_plus + f_minus)
        b1 = f_cur - mean
        b2 = 0.5 * (f_minus - f_plus)
        theta[i] = _wrap_angle(theta[i] + np.pi - math.atan2(b2, b1))
        if counter.remaining >= 1:
            f_cur = counter(theta)
        else:
            f_cur = mean - math.hypot(b1, b2)
    while counter.remaining >= 1:  # odd leftover: re-measure the incumbent
        f_cur = counter(theta)
    return MinimizeOutcome(theta, f_cur, counter.spent)


def spsa_minimize(
    f: Callable,
    x0,
    budget: int,
    seed: int = 0,
    a: float = SPSA_A,
    c: float = SPSA_C,
    stability: float | None = None,
) -> MinimizeOutcome:
    """Simultaneous perturbation with Rademacher directions.

    Gains follow a_k = a/(k+1+A)^0.602 and c_k = c/(k+1)^0.101.  The run
    opens with a baseline measurement at x0 so chained segments start with
    an on-path record.
    """
    counter = _Counter(f, budget)
    theta = np.asarray(x0, dtype=float).copy()
    dim = theta.shape[0]
    rng = np.random.default_rng(seed)
    big_a = stability if stability is not None else 0.1 * max(1, budget // 2)
    value = counter(theta)
    k = 0
    while counter.remaining >= 2:
        a_k = a / (k + 1 + big_a) ** SPSA_ALPHA
        c_k = c / (k + 1) ** SPSA_GAMMA
        delta = rng.integers(0, 2, size=dim) * 2.0 - 1.0
        f_plus = counter(theta + c_k * delta)
        f_minus = counter(theta - c_k * delta)
        gradient = (f_plus - f_minus) / (2.0 * c_k) * delta
        theta = theta - a_k * gradient
        k += 1
    if counter.remaining >= 1:
        value = counter(theta)
    else:
        value = counter.best_value
    return MinimizeOutcome(theta, value, counter.spent)


def cobyla_minimize(
    f: Callable,
    x0,
    budget: int,
    rhobeg: float = COBYLA_RHOBEG,
    tol: float = COBYLA_TOL,
) -> MinimizeOutcome:
    """Powell's linear-approximation trust-region method (scipy's port).

    Stops when the budget is spent or the trust region shrinks below tol;
    the returned point is the best one actually evaluated.
    """
    counter = _Counter(f, budget)
    x0 = np.asarray(x0, dtype=float)
    try:
        _scipy_minimize(
            counter,
            x0,
            method="COBYLA",
            options={"maxiter": budget, "rhobeg": rhobeg, "tol": tol},
        )
    except _BudgetExhausted:
        pass
    params = counter.best_params if counter.best_params is not None else x0
    return MinimizeOutcome(np.array(params), counter.best_value, counter.spent)


def run_minimizer(
    name: str,
    f: Callable,
    x0,
    budget: int,
    seed: int = 0,
    options: dict | None = None,
) -> MinimizeOutcome:
    options = dict(options or {})
    if name == "nft":
        return nft_minimize(f, x0, budget)
    if name == "spsa":
        return spsa_minimize(
            f,
            x0,
            budget,
            seed=seed,
            a=options.get("a", SPSA_A),
            c=options.get("c", SPSA_C),
            stability=options.get("stability"),
        )
    if name == "cobyla":
        return cobyla_minimize(
            f,
            x0,
            budget,
            rhobeg=options.get("rhobeg", COBYLA_RHOBEG),
            tol=options.get("tol", COBYLA_TOL),
        )
    raise ValueError(f"unknown optimizer {name!r}")
