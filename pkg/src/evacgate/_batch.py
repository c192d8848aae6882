"""Vectorized multi-scenario bathtub + demand engine.

Runs many demand scenarios of the same gating problem in lockstep: state
arrays are (n_scenarios, n_bins) and every outer step advances all
scenarios by dt with the same event-splitting semantics as
:mod:`evacgate.bathtub` (verified equivalent in the test suite). Used by
the Monte Carlo policy evaluator and the MPC loop, where a per-scenario
Python simulation would be orders of magnitude too slow.

Noise contract (common random numbers): the standard-normal matrix used by
the demand update at outer step j comes from ``noise_fn(j)`` and depends
only on j and the scenario set, never on the policy. Released bins carry
zero mass, so applying the update to the full matrix is a no-op for them
and two policies evaluated on the same set consume identical noise.
"""

from __future__ import annotations

import numpy as np

from .demand import gbm_step_factors

REM_TOL = 1e-9  # km
NEVER = np.iinfo(np.int64).max


def release_steps_from_times(times, dt, n_steps):
    """Map release times (h) to outer step indices; inf or > horizon => never."""
    times = np.asarray(times, dtype=float)
    steps = np.full(times.shape, NEVER, dtype=np.int64)
    finite = np.isfinite(times)
    k = np.ceil(times[finite] / dt - 1e-9).astype(np.int64)
    steps[finite] = np.where(k < n_steps, np.maximum(k, 0), NEVER)
    return steps


class BatchSim:
    """Lockstep simulation of n_scen scenarios over a trip-length bin grid.

    Parameters
    ----------
    model, lane_km : NFD and total lane length.
    edges : (B+1,) bin edges, km.
    surface0 : (B,) initial waiting mass per bin (shared by all scenarios).
    gbm : GbmParams for the waiting-demand evolution.
    dt : outer step, h.
    n_steps : horizon in steps; delay accrual stops there.
    n_scen : number of scenarios.
    noise_fn : callable j -> (n_scen, B) standard normals (or None if
        sigma == 0 and mu == 0).
    release_steps : (B,) int64 step index per bin (NEVER = withheld).
    extra_lengths, extra_masses : optional cohorts already in the network
        at t = 0 (shared initial state, e.g. an MPC measurement).
    """

    def __init__(self, model, lane_km, edges, surface0, gbm, dt, n_steps, n_scen,
                 noise_fn, release_steps, extra_lengths=None, extra_masses=None):
        self.model = model
        self.lane_km = float(lane_km)
        self.edges = np.asarray(edges, dtype=float)
        self.mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        self.widths = np.diff(self.edges)
        self.gbm = gbm
        self.dt = float(dt)
        self.n_steps = int(n_steps)
        self.n_scen = int(n_scen)
        self.noise_fn = noise_fn
        self.release_steps = np.asarray(release_steps, dtype=np.int64).copy()

        B = self.mids.size
        n_extra = 0 if extra_lengths is None else len(extra_lengths)
        self.n_extra = n_extra
        K = n_extra + B
        self.M = np.tile(np.asarray(surface0, dtype=float), (n_scen, 1))
        self.act = np.zeros((n_scen, K))
        self.rem = np.full((n_scen, K), np.inf)
        if n_extra:
            self.act[:, :n_extra] = np.asarray(extra_masses, dtype=float)[None, :]
            self.rem[:, :n_extra] = np.asarray(extra_lengths, dtype=float)[None, :]
        self.slot_of_bin = n_extra + np.arange(B)
        self.delay = np.zeros(n_scen)
        self.wait_int = np.zeros(n_scen)
        self.completed = np.zeros(n_scen)
        self.j = 0
        self._noisy = gbm.sigma > 0 or gbm.mu != 0.0

    @property
    def t(self):
        return self.j * self.dt

    def all_released(self):
        return bool(np.all(self.release_steps <= self.j) or not np.any(self.M))

    def _advance_traffic(self):
        act, rem = self.act, self.rem
        left = np.full(self.n_scen, self.dt)
        while True:
            total = act.sum(axis=1)
            v = np.asarray(self.model.speed(total / self.lane_km))
            busy = (total > 0.0) & (v > 0.0)
            rem_eff = np.where(act > 0.0, rem, np.inf)
            with np.errstate(divide="ignore", invalid="ignore"):
                tmin = rem_eff.min(axis=1) / v
            tmin = np.where(busy, tmin, np.inf)
            adv = np.minimum(left, tmin)
            np.maximum(adv, 0.0, out=adv)
            self.delay += total * adv
            move = (v * adv)[:, None]
            rem -= np.where(act > 0.0, move, 0.0)
            left -= adv
            done = (act > 0.0) & (rem <= REM_TOL)
            if done.any():
                self.completed += (act * done).sum(axis=1)
                act[done] = 0.0
            if np.all(left <= 1e-15):
                break

    def step(self):
        """One outer step: release due bins, advance traffic, evolve demand."""
        due = self.release_steps == self.j
        if due.any():
            cols = self.slot_of_bin[due]
            self.act[:, cols] = self.M[:, due]
            self.rem[:, cols] = self.mids[due][None, :]
            self.M[:, due] = 0.0
        self._advance_traffic()
        if np.any(self.M):
            self.wait_int += self.M.sum(axis=1) * self.dt
            if self._noisy:
                z = self.noise_fn(self.j)
                self.M *= gbm_step_factors(self.gbm, self.widths, self.dt, z)
        self.j += 1

    def run(self, until_step=None):
        """Advance to ``until_step`` (default: horizon), stopping early when
        every scenario is drained and idle."""
        stop = self.n_steps if until_step is None else min(until_step, self.n_steps)
        while self.j < stop:
            self.step()
            # waiting and network both empty: future releases can only move
            # zero mass, so the delay integral is final
            if not np.any(self.M) and not np.any(self.act):
                self.j = stop if until_step is not None else self.j
                break
        return self

    def delays(self):
        """Total delay D per scenario accumulated so far, veh*h."""
        return self.delay + self.wait_int

    def set_release_steps(self, new_steps):
        """Reschedule not-yet-due releases (MPC re-planning)."""
        new_steps = np.asarray(new_steps, dtype=np.int64)
        pending = self.release_steps > self.j - 1
        future_only = np.where(new_steps >= self.j, new_steps, self.j)
        self.release_steps = np.where(pending, future_only, self.release_steps)

    def snapshot(self, scen=0):
        """Measured state of one scenario: surface masses + active cohorts."""
        active = self.act[scen] > 0.0
        return {
            "surface": self.M[scen].copy(),
            "cohort_lengths": self.rem[scen][active].copy(),
            "cohort_masses": self.act[scen][active].copy(),
            "released": self.release_steps <= self.j - 1,
            "t": self.t,
        }
