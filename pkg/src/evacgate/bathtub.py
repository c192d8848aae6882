"""Generalized bathtub dynamics via Lagrangian cohorts.

State is a set of cohorts (vehicle count, remaining distance). All active
vehicles move at the common network speed V(delta / L); remaining distances
are transported exactly along characteristics, so the only discretization
artifact is the timing of injections. Completions inside a step are handled
by event splitting: the step is subdivided at the earliest completion and
the speed re-evaluated after mass exits, which makes constant-speed travel
times exact rather than O(dt).

The cumulative delay D integrates (active + waiting) vehicle count over
time ("area under queue"); the active part is summed exactly over the
piecewise-constant segments, the waiting part by the midpoint rule on the
same segments (exact for piecewise-constant waiting curves whose jumps
coincide with injection times).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NetworkParams",
    "CohortState",
    "SimulationTrace",
    "ExitRateReport",
    "step",
    "simulate",
    "exit_rate_check",
    "waiting_from_schedule",
]

REM_TOL = 1e-9  # km; remaining distance below this counts as completed


@dataclass(frozen=True)
class NetworkParams:
    """Reservoir parameters: total lane length, NFD, perimeter capacity, step."""

    lane_km: float
    model: object  # SpeedDensityModel
    exit_capacity: float = np.inf  # veh/h, diagnostic only
    dt: float = 10.0 / 3600.0  # h

    def __post_init__(self):
        if self.lane_km <= 0 or self.dt <= 0 or self.exit_capacity <= 0:
            raise ValueError("lane_km, dt and exit_capacity must be positive")


@dataclass(frozen=True)
class CohortState:
    """Active cohorts plus completion/injection bookkeeping."""

    counts: np.ndarray = field(default_factory=lambda: np.empty(0))
    remaining: np.ndarray = field(default_factory=lambda: np.empty(0))
    lengths: np.ndarray = field(default_factory=lambda: np.empty(0))
    inject_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    completed: float = 0.0
    injected: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        counts = np.atleast_1d(np.asarray(self.counts, dtype=float))
        remaining = np.atleast_1d(np.asarray(self.remaining, dtype=float))
        if counts.size and np.any(counts < 0):
            raise ValueError("cohort counts must be non-negative")
        if remaining.size and np.any(remaining <= 0):
            raise ValueError("remaining distances must be strictly positive")
        lengths = np.atleast_1d(np.asarray(self.lengths, dtype=float))
        if lengths.size == 0 and remaining.size:
            lengths = remaining.copy()
        inject = np.atleast_1d(np.asarray(self.inject_times, dtype=float))
        if inject.size == 0 and remaining.size:
            inject = np.full(remaining.size, self.t)
        injected = self.injected if self.injected > 0 else float(counts.sum()) + self.completed
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "remaining", remaining)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "inject_times", inject)
        object.__setattr__(self, "injected", injected)

    @property
    def total_active(self):
        return float(self.counts.sum())


@dataclass
class _Completion:
    inject_t: float
    length: float
    count: float
    complete_t: float

    @property
    def travel_time(self):
        return self.complete_t - self.inject_t


def _advance(counts, remaining, lengths, inject_times, params, t, dt):
    """Advance active cohorts by dt with event splitting.

    Returns updated arrays, completed mass, the list of completion records
    and the (t0, t1, active_count, speed) segments spanned.
    """
    segments = []
    completions = []
    completed_mass = 0.0
    left = dt
    while left > 1e-15:
        total = float(counts.sum())
        rho = total / params.lane_km
        v = float(params.model.speed(rho))
        if total <= 0.0 or v <= 0.0:
            # empty network or gridlock: nothing moves for the rest of the step
            segments.append((t, t + left, total, v))
            t += left
            left = 0.0
            break
        t_next = float(remaining.min()) / v
        adv = min(left, t_next)
        segments.append((t, t + adv, total, v))
        remaining = remaining - v * adv
        t += adv
        left -= adv
        done = remaining <= REM_TOL
        if np.any(done):
            for k in np.flatnonzero(done):
                completions.append(_Completion(inject_times[k], lengths[k], counts[k], t))
                completed_mass += float(counts[k])
            keep = ~done
            counts, remaining = counts[keep], remaining[keep]
            lengths, inject_times = lengths[keep], inject_times[keep]
    return counts, remaining, lengths, inject_times, completed_mass, completions, segments


def step(state, params, inflow=None, dt=None):
    """One conservation-law step: inject inflow, then advance by dt.

    ``inflow`` is a sequence of (count, trip_length) pairs appended before
    the speed is evaluated, so injection raises the density immediately.
    Returns (new_state, info) where info carries the active-delay increment,
    completion records and constant-speed segments.
    """
    dt = params.dt if dt is None else dt
    if dt <= 0 or dt > params.dt + 1e-12:
        raise ValueError("dt must be positive and no larger than params.dt")
    counts, remaining = state.counts, state.remaining
    lengths, inject_times = state.lengths, state.inject_times
    injected = state.injected
    if inflow:
        add_counts = np.array([c for c, _ in inflow], dtype=float)
        add_lengths = np.array([x for _, x in inflow], dtype=float)
        if np.any(add_counts < 0):
            raise ValueError("inflow counts must be non-negative")
        if np.any(add_lengths <= 0):
            raise ValueError("inflow trip lengths must be positive")
        keep = add_counts > 0
        counts = np.concatenate([counts, add_counts[keep]])
        remaining = np.concatenate([remaining, add_lengths[keep]])
        lengths = np.concatenate([lengths, add_lengths[keep]])
        inject_times = np.concatenate([inject_times, np.full(int(keep.sum()), state.t)])
        injected += float(add_counts.sum())

    counts, remaining, lengths, inject_times, done_mass, completions, segments = _advance(
        counts, remaining, lengths, inject_times, params, state.t, dt
    )
    new_state = CohortState(
        counts, remaining, lengths, inject_times,
        completed=state.completed + done_mass, injected=injected, t=state.t + dt,
    )
    delay_inc = sum(total * (t1 - t0) for t0, t1, total, _ in segments)
    info = {"delay_active": delay_inc, "completions": completions, "segments": segments}
    return new_state, info


@dataclass
class SimulationTrace:
    """Time series emitted at every step boundary and event split."""

    t: np.ndarray
    active: np.ndarray
    waiting: np.ndarray
    completed: np.ndarray
    injected: np.ndarray
    speed: np.ndarray
    delay_cum: np.ndarray
    completions: list

    @property
    def delay(self):
        """Total delay D in veh*h."""
        return float(self.delay_cum[-1])

    def to_csv(self, path, metadata=None):
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["t_h", "active", "waiting", "completed", "speed_kmh", "delay_cum"])
            for row in zip(self.t, self.active, self.waiting, self.completed,
                           self.speed, self.delay_cum):
                writer.writerow([f"{v:.10g}" for v in row])


def waiting_from_schedule(schedule):
    """Waiting curve implied by a deterministic inflow schedule.

    At time t the waiting count is the total mass of cohorts scheduled
    strictly later than t (vehicles are waiting until their release).
    """
    times = np.array([t for t, _ in schedule], dtype=float)
    masses = np.array([sum(c for c, _ in cohorts) for _, cohorts in schedule], dtype=float)

    def waiting(t):
        return float(masses[times > t + 1e-15].sum())

    return waiting


def simulate(initial, params, inflow_schedule=(), waiting_curve=None, horizon=None):
    """Run the bathtub over [t0, horizon] with scheduled injections.

    ``inflow_schedule`` is a sequence of (time, [(count, length), ...]) with
    non-decreasing times inside [t0, horizon]. The delay integrand is
    active + waiting; ``waiting_curve`` defaults to the curve implied by the
    schedule itself. Stops early once the network is empty and no further
    injections or waiting mass remain.
    """
    schedule = sorted(inflow_schedule, key=lambda item: item[0])
    times = [t for t, _ in inflow_schedule]
    if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("inflow schedule times must be non-decreasing")
    if horizon is None:
        horizon = max([t for t, _ in schedule], default=0.0) + 48.0
    if schedule and (schedule[0][0] < initial.t - 1e-12 or schedule[-1][0] > horizon + 1e-12):
        raise ValueError("schedule times must lie within [t0, horizon]")
    if waiting_curve is None:
        waiting_curve = waiting_from_schedule(schedule)

    state = initial
    pending = list(schedule)
    rows = []
    completions = []
    delay = 0.0

    def emit(t, active, waiting, completed, injected, v, d):
        rows.append((t, active, waiting, completed, injected, v, d))

    v0 = float(params.model.speed(state.total_active / params.lane_km))
    emit(state.t, state.total_active, waiting_curve(state.t), state.completed,
         state.injected, v0, delay)

    while state.t < horizon - 1e-12:
        inflow = []
        while pending and pending[0][0] <= state.t + 1e-12:
            inflow.extend(pending.pop(0)[1])
        t_stop = min(pending[0][0] if pending else horizon, horizon)
        dt = min(params.dt, max(t_stop - state.t, 0.0))
        if dt <= 0 and not inflow:
            break
        completed_running = state.completed
        state, info = step(state, params, inflow=inflow, dt=max(dt, 1e-15))
        delay += info["delay_active"]
        completions.extend(info["completions"])
        segments = info["segments"]
        comp_iter = list(info["completions"])
        j = 0
        for i, (t0, t1, total, v) in enumerate(segments):
            delay += waiting_curve(0.5 * (t0 + t1)) * (t1 - t0)
            while j < len(comp_iter) and comp_iter[j].complete_t <= t1 + 1e-15:
                completed_running += comp_iter[j].count
                j += 1
            # the row at a segment end reflects the post-event state
            active_after = segments[i + 1][2] if i + 1 < len(segments) else state.total_active
            emit(t1, active_after, waiting_curve(t1), completed_running,
                 state.injected, v, delay)
        if (not pending and state.total_active <= 0.0
                and waiting_curve(state.t) <= 0.0):
            break

    arr = np.array(rows, dtype=float)
    return SimulationTrace(
        t=arr[:, 0], active=arr[:, 1], waiting=arr[:, 2], completed=arr[:, 3],
        injected=arr[:, 4], speed=arr[:, 5], delay_cum=arr[:, 6],
        completions=completions,
    )


@dataclass(frozen=True)
class ExitRateReport:
    """Diagnostic comparison of trip-completion rate against exit capacity."""

    flagged: bool
    max_rate: float
    max_exceedance: float
    intervals: tuple
    clearance_time: float | None


def exit_rate_check(trace, c_exit):
    """Flag trace intervals whose completion rate exceeds the exit capacity.

    Purely diagnostic; the bathtub dynamics themselves are not capacity
    constrained (the case-study premise is that bridge queues do not spill
    back into the reservoir).
    """
    dt = np.diff(trace.t)
    dc = np.diff(trace.completed)
    ok = dt > 1e-12
    rates = np.zeros_like(dc)
    rates[ok] = dc[ok] / dt[ok]
    over = rates > c_exit * (1.0 + 1e-9)
    intervals = tuple(
        (float(trace.t[i]), float(trace.t[i + 1]), float(rates[i]))
        for i in np.flatnonzero(over)
    )
    completed_any = trace.completed[-1] > 0
    clearance = float(trace.completions[-1].complete_t) if (completed_any and trace.completions) else None
    max_rate = float(rates.max()) if rates.size else 0.0
    return ExitRateReport(
        flagged=bool(over.any()),
        max_rate=max_rate,
        max_exceedance=max(0.0, max_rate - c_exit),
        intervals=intervals,
        clearance_time=clearance,
    )
