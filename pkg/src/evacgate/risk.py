"""Risk functionals over Monte Carlo delay samples.

AVaR (average value at risk, a.k.a. CVaR) at confidence alpha is the
expected value in the worst 100*(1-alpha)% of outcomes, computed as the
exact empirical minimizer of the Rockafellar-Uryasev expression

    AVaR_alpha[D] = inf_eta { eta + E[(D - eta)+] / (1 - alpha) }.

With sorted samples the minimizing eta is the empirical alpha-quantile and
the value is the tail average with fractional weighting of the quantile
atom, which is continuous in (alpha, sample size); the naive
ceil-count tail mean is not, and would destabilize optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DelaySamples", "avar", "objective"]


@dataclass(frozen=True)
class DelaySamples:
    """Per-scenario delay outcomes with seed provenance."""

    values: np.ndarray  # veh*h, one per scenario
    seeds: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("need a non-empty 1-D sample vector")
        if np.any(values < 0):
            raise ValueError("delays must be non-negative")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def _as_values(samples):
    if isinstance(samples, DelaySamples):
        return samples.values
    values = np.asarray(samples, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("need a non-empty 1-D sample vector")
    return values


def avar(samples, alpha):
    """Exact empirical average value at risk at confidence alpha in [0, 1).

    Equals the mean of the worst (1-alpha)*N samples when that count is an
    integer, and the sample mean at alpha = 0.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    x = np.sort(_as_values(samples))
    n = x.size
    if alpha == 0.0:
        return float(x.mean())
    tail = (1.0 - alpha) * n
    k = int(np.ceil(alpha * n - 1e-12))  # index of the quantile atom (1-based)
    if k >= n:
        return float(x[-1])
    # worst (n - k) samples fully, plus the fractional piece of the atom x[k-1]
    full = x[k:].sum()
    frac = (k - alpha * n) * x[k - 1] if k >= 1 else 0.0
    return float((full + frac) / tail)


def objective(samples, beta_risk, alpha):
    """Risk-averse objective mean + beta_risk * AVaR_alpha, veh*h."""
    if beta_risk < 0:
        raise ValueError("beta_risk must be non-negative")
    values = _as_values(samples)
    return float(values.mean() + beta_risk * avar(values, alpha))
