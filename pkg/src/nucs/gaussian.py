"""Two-class Gaussian model of class-wise selection rates.

Class i is N(mu_i, sigma_i) and is kept at rate f_i with f0 + f1 = 2f. A
threshold t labels x <= t as class 0. The weighted error is

    E(t, f0) = f0 * Phi((mu0 - t) / sigma0) + (2f - f0) * Phi((t - mu1) / sigma1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .errors import ConfigError

_SQRT2 = math.sqrt(2.0)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_FEAS_TOL = 1e-12


def norm_cdf(x):
    """Standard normal CDF via erfc, accurate in both tails."""
    return 0.5 * erfc(-np.asarray(x, dtype=np.float64) / _SQRT2)


class NotInterior(ConfigError):
    """The unconstrained optimum asks for more than all of one class."""


@dataclass(frozen=True)
class GaussianTwoClassModel:
    """Class parameters are swapped on construction so that mu0 <= mu1."""

    mu0: float
    mu1: float
    sigma0: float
    sigma1: float
    f: float

    def __post_init__(self):
        if not (self.sigma0 > 0 and self.sigma1 > 0):
            raise ConfigError("class standard deviations must be positive")
        if not 0.0 < self.f <= 1.0:
            raise ConfigError(f"global selection rate must lie in (0, 1], got {self.f}")
        if self.mu0 > self.mu1:
            mu0, mu1, s0, s1 = self.mu1, self.mu0, self.sigma1, self.sigma0
            object.__setattr__(self, "mu0", mu0)
            object.__setattr__(self, "mu1", mu1)
            object.__setattr__(self, "sigma0", s0)
            object.__setattr__(self, "sigma1", s1)

    @property
    def f0_range(self) -> tuple[float, float]:
        return max(0.0, 2 * self.f - 1.0), min(1.0, 2 * self.f)

    def t_bounds(self, width: float = 12.0) -> tuple[float, float]:
        s = max(self.sigma0, self.sigma1)
        return self.mu0 - width * s, self.mu1 + width * s


class Optimum(NamedTuple):
    t: float
    f0: float
    f1: float
    regime: str


def class_errors(model: GaussianTwoClassModel, t):
    return (
        norm_cdf((model.mu0 - t) / model.sigma0),
        norm_cdf((t - model.mu1) / model.sigma1),
    )


def error_rate(model: GaussianTwoClassModel, t, f0: float):
    lo, hi = model.f0_range
    if not lo - _FEAS_TOL <= f0 <= hi + _FEAS_TOL:
        raise ConfigError(f"f0={f0} outside the feasible range [{lo}, {hi}]")
    e0, e1 = class_errors(model, t)
    out = f0 * e0 + (2 * model.f - f0) * e1
    return float(out) if np.ndim(out) == 0 else out


def optimal_interior(model: GaussianTwoClassModel) -> tuple[float, float, float]:
    """Stationary point of E: equal class errors, rates proportional to sigma."""
    s0, s1, f = model.sigma0, model.sigma1, model.f
    if 2 * f * s0 / (s0 + s1) > 1 or 2 * f * s1 / (s0 + s1) > 1:
        raise NotInterior("interior optimum infeasible; use optimal_constrained")
    t = (s1 * model.mu0 + s0 * model.mu1) / (s0 + s1)
    f0 = 2 * f * s0 / (s0 + s1)
    return t, f0, 2 * f - f0


def regime_of(model: GaussianTwoClassModel) -> str:
    s0, s1, f = model.sigma0, model.sigma1, model.f
    if 2 * f * s0 / (s0 + s1) > 1:
        return "cap0"
    if 2 * f * s1 / (s0 + s1) > 1:
        return "cap1"
    return "interior"


def golden_section(fn, a: float, b: float, tol: float = 1e-10, max_iter: int = 500) -> float:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return (a + b) / 2


def best_threshold(model: GaussianTwoClassModel, f0: float, n_scan: int = 2001) -> float:
    """Threshold minimizing E for a fixed allocation.

    E(t) need not be unimodal, so a coarse scan picks the basin first.
    """
    lo, hi = model.t_bounds()
    ts = np.linspace(lo, hi, n_scan)
    i = int(np.argmin(error_rate(model, ts, f0)))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, n_scan - 1)]
    return golden_section(lambda t: error_rate(model, t, f0), a, b)


def optimal_constrained(model: GaussianTwoClassModel) -> Optimum:
    """Allocation with rates clipped to [0, 1].

    A class whose proportional share exceeds 1 is kept whole and the other
    class gets the rest; the threshold is then re-fitted numerically.
    """
    regime = regime_of(model)
    if regime == "interior":
        t, f0, f1 = optimal_interior(model)
        return Optimum(t, f0, f1, regime)
    if regime == "cap0":
        f0 = 1.0
    else:
        f0 = 2 * model.f - 1.0
    return Optimum(best_threshold(model, f0), f0, 2 * model.f - f0, regime)


def monte_carlo_error(model: GaussianTwoClassModel, t: float, f0: float,
                      n_per_class: int, seed: int) -> float:
    """Sampled estimate of error_rate from round(f_i * n) draws per class."""
    if n_per_class < 1:
        raise ConfigError("n_per_class must be >= 1")
    lo, hi = model.f0_range
    if not lo - _FEAS_TOL <= f0 <= hi + _FEAS_TOL:
        raise ConfigError(f"f0={f0} outside the feasible range [{lo}, {hi}]")
    f1 = 2 * model.f - f0
    rng = np.random.default_rng(seed)
    n0 = int(round(f0 * n_per_class))
    n1 = int(round(f1 * n_per_class))
    x0 = rng.normal(model.mu0, model.sigma0, n0)
    x1 = rng.normal(model.mu1, model.sigma1, n1)
    err0 = np.count_nonzero(x0 > t) / n0 if n0 else 0.0
    err1 = np.count_nonzero(x1 <= t) / n1 if n1 else 0.0
    return float(f0 * err0 + f1 * err1)


def row_regime(model: GaussianTwoClassModel, f0: float) -> str:
    if f0 >= 1.0 - _FEAS_TOL:
        return "cap0"
    if 2 * model.f - f0 >= 1.0 - _FEAS_TOL:
        return "cap1"
    return "interior"


def sweep(model: GaussianTwoClassModel, n_points: int = 21, n_mc: int = 100_000, seed: int = 0):
    """Rows of (f0, t, E_closed, E_mc, regime) across the feasible f0 range.

    Each row uses the best threshold for its f0.
    """
    if n_points < 2:
        raise ConfigError("sweep needs at least 2 points")
    lo, hi = model.f0_range
    rows = []
    for i, f0 in enumerate(np.linspace(lo, hi, n_points)):
        f0 = float(f0)
        t = best_threshold(model, f0)
        rows.append(
            {
                "f0": f0,
                "t": t,
                "E_closed": error_rate(model, t, f0),
                "E_mc": monte_carlo_error(model, t, f0, n_mc, seed + i),
                "regime": row_regime(model, f0),
            }
        )
    return rows
