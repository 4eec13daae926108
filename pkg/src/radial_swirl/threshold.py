"""Explicit smallness threshold for the 0 < beta < 1 regime.

K(a) is strictly increasing with K(0+) = -inf, so the threshold a0 solving
K(a0) = theta(0.99 (7 mu)^(1/beta)) is found by bracketed bisection in log a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

SHARP_FACTOR = 0.99
MAX_DOUBLINGS = 200

TERM_NAMES = ("theta_a", "theta_energy", "moment", "cap_energy", "mass_energy",
              "mass_power", "mass_times_energy")


@dataclass(frozen=True)
class ThresholdInputs:
    mu: float
    beta: float
    gamma: float
    R: float
    grad_u0_L2: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu!r}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must satisfy 0 < beta < 1, got {self.beta!r}")
        if not self.gamma > 1:
            raise ValueError(f"gamma must be > 1, got {self.gamma!r}")
        if not self.R > 0:
            raise ValueError(f"R must be > 0, got {self.R!r}")
        if not self.grad_u0_L2 >= 0:
            raise ValueError(f"grad_u0_L2 must be >= 0, got {self.grad_u0_L2!r}")

    @property
    def cap(self) -> float:
        return (7.0 * self.mu) ** (1.0 / self.beta)


@dataclass(frozen=True)
class ThresholdReport:
    a0: float
    cap: float
    sharp_cap: float
    target: float
    K_a0: float
    terms: Dict[str, float] = field(default_factory=dict)
    iterations: int = 0

    @property
    def residual(self) -> float:
        return abs(self.K_a0 - self.target) / max(1.0, abs(self.target))


def theta(mu: float, beta: float, a: float) -> float:
    return 2.0 * mu * math.log(a) + a ** beta / beta


def aux_functions(inputs: ThresholdInputs, a: float):
    """Return (theta(a), M~(a), E~(a), U~(a))."""
    if not a > 0:
        raise ValueError(f"a must be > 0, got {a!r}")
    mu, b, g, R, du = inputs.mu, inputs.beta, inputs.gamma, inputs.R, inputs.grad_u0_L2
    area = math.pi * R * R
    M = area * a
    E = area * a ** g / (g - 1.0) + 0.25 * R * R * du * du * a
    U = area / (2.0 * math.pi) ** 1.5 * du ** 3 * a
    return theta(mu, b, a), M, E, U


def K_terms(inputs: ThresholdInputs, a: float) -> Dict[str, float]:
    """The summands of K(a); the first two enter through their maximum."""
    mu, b, g, R = inputs.mu, inputs.beta, inputs.gamma, inputs.R
    th, M, E, U = aux_functions(inputs, a)
    area = math.pi * R * R
    # theta at ((g-1) E / area)^(1/g), evaluated through logs so that tiny a
    # (where a^g underflows) still gives the finite limit behaviour
    log_terms = [math.log(area / (g - 1.0)) + g * math.log(a)]
    if inputs.grad_u0_L2 > 0:
        log_terms.append(math.log(0.25 * R * R) + 2.0 * math.log(inputs.grad_u0_L2) + math.log(a))
    log_E = float(np.logaddexp.reduce(log_terms))
    log_aE = (math.log(g - 1.0) + log_E - math.log(area)) / g
    moment_const = 3.0 * math.sqrt(2.0) * 7.0 ** (g / b) * mu ** (g / b - 1.0) * R
    return {
        "theta_a": th,
        "theta_energy": 2.0 * mu * log_aE + math.exp(b * log_aE) / b,
        "moment": (2.0 ** (4.0 / 3.0) * R ** (1.0 / 3.0) * math.pi ** (-1.0 / 3.0)
                   * (7.0 * mu) ** (2.0 / (3.0 * b)) * (U + moment_const * E) ** (1.0 / 3.0)),
        "cap_energy": (7.0 * mu) ** (1.0 / b) * E / (2.0 * mu * math.pi),
        "mass_energy": (M + 2.0 * E) / (2.0 * math.pi * R),
        "mass_power": 2.0 * M ** b / (area ** b * (1.0 - b)),
        "mass_times_energy": M * E / (4.0 * mu * math.pi ** 2 * R * R),
    }


def K_of_a(inputs: ThresholdInputs, a: float) -> float:
    t = K_terms(inputs, a)
    rest = sum(t[k] for k in TERM_NAMES[2:])
    return max(t["theta_a"], t["theta_energy"]) + rest


def target_value(inputs: ThresholdInputs) -> float:
    return theta(inputs.mu, inputs.beta, SHARP_FACTOR * inputs.cap)


def solve_a0(inputs: ThresholdInputs, rtol: float = 1e-10) -> ThresholdReport:
    """Bisection for K(a0) = target, with the upper end doubled until bracketed."""
    target = target_value(inputs)
    tol = rtol * max(1.0, abs(target))
    hi = 1.0
    for _ in range(MAX_DOUBLINGS):
        if K_of_a(inputs, hi) > target:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("target not bracketed after doubling the upper end")
    lo = hi / 2.0
    while K_of_a(inputs, lo) >= target:
        lo /= 2.0
        if lo == 0.0:
            raise ArithmeticError("lower end underflowed while bracketing")
    # bisect in log a: K ranges over many decades of a near the root
    it = 0
    a = math.sqrt(lo * hi)
    Ka = K_of_a(inputs, a)
    while abs(Ka - target) > tol:
        it += 1
        if Ka > target:
            hi = a
        else:
            lo = a
        a = math.sqrt(lo * hi)
        if a in (lo, hi) or it > 10000:
            # no representable midpoint left; keep the closer end
            a = min((lo, hi), key=lambda x: abs(K_of_a(inputs, x) - target))
            Ka = K_of_a(inputs, a)
            break
        Ka = K_of_a(inputs, a)
    return ThresholdReport(a0=a, cap=inputs.cap, sharp_cap=SHARP_FACTOR * inputs.cap,
                           target=target, K_a0=Ka, terms=K_terms(inputs, a), iterations=it)


def is_strictly_increasing(inputs: ThresholdInputs, samples) -> bool:
    vals = [K_of_a(inputs, a) for a in sorted(samples)]
    return all(y > x for x, y in zip(vals, vals[1:]))


@dataclass(frozen=True)
class Verdict:
    admitted: bool
    rho0_sup: float
    a0: float
    cap: float
    sharp_cap: float

    @property
    def label(self) -> str:
        return "admitted" if self.admitted else "not_admitted"


def admissibility_verdict(inputs: ThresholdInputs, rho0_sup: float,
                          report: ThresholdReport = None) -> Verdict:
    if not rho0_sup >= 0:
        raise ValueError(f"rho0_sup must be >= 0, got {rho0_sup!r}")
    report = report if report is not None else solve_a0(inputs)
    return Verdict(admitted=rho0_sup <= report.a0, rho0_sup=float(rho0_sup), a0=report.a0,
                   cap=report.cap, sharp_cap=report.sharp_cap)
