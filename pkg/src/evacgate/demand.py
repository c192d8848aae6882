"""Stochastic un-released demand surface over trip-length bins.

The waiting demand is discretized into trip-length bins; each bin's mass
evolves as an independent geometric Brownian motion. Space-time white noise
is discretized as per-bin noise with variance scaled by 1/(bin width), so
refining the bin grid preserves the variance of total mass. The exact
lognormal one-step update is used (no Euler error); masses stay
non-negative by construction.

Release under a gating policy drains whole bins into inflow cohorts (one
cohort at the bin midpoint distance); drained bins stop evolving. A policy
only needs to expose ``release_times(edges) -> per-bin release time``, so
any threshold or general release-time map can drive the surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GbmParams", "DemandSurface", "init_surface", "evolve", "release"]


@dataclass(frozen=True)
class GbmParams:
    """Geometric Brownian motion parameters: drift 1/h, volatility 1/sqrt(h)."""

    mu: float = 0.0
    sigma: float = 0.03

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


@dataclass(frozen=True)
class DemandSurface:
    """Per-bin waiting mass over trip-length bin edges."""

    edges: np.ndarray  # (n+1,) km, strictly increasing
    mass: np.ndarray  # (n,) veh, >= 0
    t: float = 0.0
    released: np.ndarray = field(default=None)  # (n,) bool, True once drained

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        mass = np.asarray(self.mass, dtype=float)
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if mass.shape != (edges.size - 1,):
            raise ValueError("mass must have one entry per bin")
        if np.any(mass < 0):
            raise ValueError("bin masses must be non-negative")
        released = self.released
        if released is None:
            released = np.zeros(mass.size, dtype=bool)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "released", np.asarray(released, dtype=bool))

    @property
    def total(self):
        """Total waiting mass, veh."""
        return float(self.mass.sum())

    @property
    def midpoints(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self):
        return np.diff(self.edges)

    def to_csv(self, path, metadata=None):
        import csv

        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["edge_lo_km", "edge_hi_km", "mass_veh", "released"])
            for lo, hi, m, r in zip(self.edges[:-1], self.edges[1:], self.mass, self.released):
                writer.writerow([f"{lo:.8g}", f"{hi:.8g}", f"{m:.10g}", int(r)])


def init_surface(n_total, dist, edges):
    """Bin a trip-length distribution into initial waiting masses.

    mass_k = n_total * (F(edge_{k+1}) - F(edge_k)). The bin grid must cover
    the distribution support so no mass is dropped.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = dist.support
    if edges[0] > lo + 1e-9 or edges[-1] < hi - 1e-9:
        raise ValueError(
            f"bins [{edges[0]}, {edges[-1]}] do not cover the support [{lo}, {hi}]"
        )
    cdf_vals = dist.cdf(edges)
    mass = n_total * np.diff(cdf_vals)
    return DemandSurface(edges, np.clip(mass, 0.0, None), t=0.0)


def gbm_step_factors(p, widths, dt, z):
    """Exact per-bin GBM update factors for one step of length dt."""
    sigma_eff = p.sigma / np.sqrt(widths)
    return np.exp((p.mu - 0.5 * sigma_eff**2) * dt + sigma_eff * np.sqrt(dt) * z)


def evolve(surface, p, dt, rng):
    """Advance the surface by dt with independent per-bin multiplicative noise.

    Bins already drained by a release stay at zero. A fixed rng seed makes
    the update bit-reproducible.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    z = rng.standard_normal(surface.mass.size)
    factors = gbm_step_factors(p, surface.widths, dt, z)
    mass = np.where(surface.released, 0.0, surface.mass * factors)
    return DemandSurface(surface.edges, mass, surface.t + dt, surface.released)


def release(surface, policy, t):
    """Drain all bins whose policy release time has arrived.

    Returns (inflow, new_surface) where inflow is a list of
    (count, trip_length) cohorts, one per drained bin at its midpoint.
    The drained-bin set is always a prefix extension: once released, a bin
    stays released, and threshold policies drain prefixes by distance.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    times = np.asarray(policy.release_times(surface.edges), dtype=float)
    if times.shape != surface.mass.shape:
        raise ValueError("policy release times must match the bin grid")
    due = (times <= t + 1e-12) & ~surface.released
    if not np.any(due):
        return [], surface
    mids = surface.midpoints
    inflow = [
        (float(surface.mass[k]), float(mids[k]))
        for k in np.flatnonzero(due)
        if surface.mass[k] > 0.0
    ]
    mass = surface.mass.copy()
    mass[due] = 0.0
    return inflow, DemandSurface(surface.edges, mass, surface.t, surface.released | due)
