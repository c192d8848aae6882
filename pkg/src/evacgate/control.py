"""Gating policies, Monte Carlo policy evaluation, bang-bang optimization,
structural-theorem oracles, costate diagnostics and the MPC loop.

Policies expose ``release_times(edges) -> per-bin release time (h)``; the
provably-optimal class under an IFR trip-length distribution is the
two-parameter :class:`BangBangPolicy` (release everything closer than x0 at
t = 0, hold the rest until the switch time). :class:`ReleaseTimeMap` covers
general staged schedules for evaluation and enumeration oracles.

Policy evaluation uses common random numbers: the same scenario noise is
replayed for every candidate policy, which makes the sampled objective a
deterministic function of (policy, scenario set) and lets derivative-free
pattern search converge cleanly.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import trapezoid

from ._batch import NEVER, BatchSim, release_steps_from_times
from .bathtub import CohortState
from .bathtub import simulate as bathtub_simulate
from .demand import GbmParams
from .risk import DelaySamples, objective

__all__ = [
    "BangBangPolicy",
    "ReleaseTimeMap",
    "ScenarioSet",
    "SearchConfig",
    "OptimizeResult",
    "BruteForceInstance",
    "BruteForceResult",
    "ControlDiagnostics",
    "CostateResult",
    "MpcResult",
    "evaluate_policy",
    "evaluate_policy_samples",
    "optimize_bangbang",
    "brute_force_optimal",
    "service_rate",
    "costate_trajectory",
    "mpc_run",
    "deterministic_trace",
]

_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class BangBangPolicy:
    """Two-parameter gating rule: cutoff distance x0 (km), switch time (h).

    Bins with upper edge <= x0 are released at t = 0; everything else at
    the switch time. x0 = inf (or beyond the support) and switch_time = 0
    both reduce to the no-control full release.
    """

    x0: float
    switch_time: float

    def __post_init__(self):
        if self.x0 < 0:
            raise ValueError("x0 must be non-negative")
        if self.switch_time < 0:
            raise ValueError("switch time must be non-negative")

    def release_times(self, edges):
        edges = np.asarray(edges, dtype=float)
        return np.where(edges[1:] <= self.x0 + _EDGE_TOL, 0.0, self.switch_time)


@dataclass(frozen=True)
class ReleaseTimeMap:
    """Piecewise-constant release-time map tau(x) on the demand bin grid.

    ``times`` may contain inf (never released). Optimal maps are
    non-decreasing in x; arbitrary maps are accepted so that enumeration
    oracles can evaluate them, and :meth:`is_isotone` reports the property.
    """

    edges: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        times = np.asarray(self.times, dtype=float)
        if times.shape != (edges.size - 1,):
            raise ValueError("need one release time per bin")
        if np.any(times[np.isfinite(times)] < 0):
            raise ValueError("release times must be non-negative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "times", times)

    def release_times(self, edges):
        edges = np.asarray(edges, dtype=float)
        if edges.shape != self.edges.shape or np.any(np.abs(edges - self.edges) > 1e-9):
            raise ValueError("release-time map is defined on a different bin grid")
        return self.times

    def is_isotone(self):
        t = np.where(np.isfinite(self.times), self.times, np.inf)
        return bool(np.all(np.diff(t) >= -1e-12))


@dataclass(frozen=True)
class ScenarioSet:
    """Monte Carlo evaluation context: bin grid, initial state, noise, horizon.

    ``surface0`` is the waiting mass per bin at t = 0 (the deterministic
    initial binning, or a measured surface inside MPC). ``extra_lengths`` /
    ``extra_masses`` describe cohorts already in the network. ``noise_tag``
    extends the seed so that branched sets (MPC updates) get independent
    but reproducible streams.
    """

    edges: np.ndarray
    surface0: np.ndarray
    gbm: GbmParams
    network: object  # NetworkParams
    horizon: float
    n_scenarios: int
    master_seed: int
    dt: float = None
    noise_tag: tuple = ()
    extra_lengths: np.ndarray = field(default_factory=lambda: np.empty(0))
    extra_masses: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.n_scenarios < 1:
            raise ValueError("need at least one scenario")
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=float))
        object.__setattr__(self, "surface0", np.asarray(self.surface0, dtype=float))
        if self.dt is None:
            object.__setattr__(self, "dt", self.network.dt)

    @classmethod
    def from_distribution(cls, dist, n_total, n_bins, gbm, network, horizon,
                          n_scenarios, master_seed, dt=None):
        from .demand import init_surface

        lo, hi = dist.support
        edges = np.linspace(lo, hi, n_bins + 1)
        surface = init_surface(n_total, dist, edges)
        return cls(edges, surface.mass, gbm, network, horizon, n_scenarios,
                   master_seed, dt=dt)

    @property
    def n_steps(self):
        return int(np.ceil(self.horizon / self.dt - 1e-9))

    @property
    def d_max(self):
        return float(self.edges[-1])

    def seeds(self):
        return tuple((self.master_seed, *self.noise_tag, s) for s in range(self.n_scenarios))

    def noise_fn(self):
        n_scen, n_bins = self.n_scenarios, self.edges.size - 1

        def fn(j):
            rng = np.random.default_rng((self.master_seed, 7919, *self.noise_tag, j))
            return rng.standard_normal((n_scen, n_bins))

        return fn

    def build_sim(self, policy):
        times = np.asarray(policy.release_times(self.edges), dtype=float)
        steps = release_steps_from_times(times, self.dt, self.n_steps)
        return BatchSim(
            self.network.model, self.network.lane_km, self.edges, self.surface0,
            self.gbm, self.dt, self.n_steps, self.n_scenarios, self.noise_fn(),
            steps,
            extra_lengths=self.extra_lengths if len(self.extra_lengths) else None,
            extra_masses=self.extra_masses if len(self.extra_masses) else None,
        )


def evaluate_policy_samples(policy, sset):
    """Per-scenario delays D under the policy (common random numbers)."""
    sim = sset.build_sim(policy).run()
    return DelaySamples(sim.delays(), seeds=sset.seeds())


def evaluate_policy(policy, sset, beta_risk, alpha):
    """Risk-averse objective and the underlying delay samples."""
    samples = evaluate_policy_samples(policy, sset)
    return objective(samples, beta_risk, alpha), samples


def deterministic_trace(policy, sset):
    """Exact single-run trace for sigma = 0, mu = 0 (event-split resolution).

    Builds the inflow schedule implied by the policy on the deterministic
    surface and integrates with the single-scenario bathtub, including the
    waiting term.
    """
    if sset.gbm.sigma != 0.0 or sset.gbm.mu != 0.0:
        raise ValueError("deterministic_trace requires sigma = 0 and mu = 0")
    times = np.asarray(policy.release_times(sset.edges), dtype=float)
    steps = release_steps_from_times(times, sset.dt, sset.n_steps)
    mids = 0.5 * (sset.edges[:-1] + sset.edges[1:])
    schedule = {}
    for k, s in enumerate(steps):
        if s == NEVER or sset.surface0[k] <= 0.0:
            continue
        schedule.setdefault(s * sset.dt, []).append((float(sset.surface0[k]), float(mids[k])))
    sched = sorted(schedule.items())
    init = CohortState(
        counts=np.asarray(sset.extra_masses, dtype=float),
        remaining=np.asarray(sset.extra_lengths, dtype=float),
    ) if len(sset.extra_masses) else CohortState()
    return bathtub_simulate(init, replace(sset.network, dt=sset.dt), sched,
                            horizon=sset.horizon)


@dataclass(frozen=True)
class SearchConfig:
    """Grid + compass pattern search settings for the bang-bang optimizer."""

    n_x0: int = 20
    n_tb: int = 20
    x0_range: tuple = None  # default (0, d_max)
    tb_range: tuple = None  # default (0, horizon)
    pattern_steps: int = 40
    min_step_frac: float = 1e-3


def _better(j_a, pol_a, j_b, pol_b):
    """Strict objective improvement, ties broken toward the earliest and
    widest release (smaller switch time, then larger cutoff)."""
    tol = 1e-9 * max(1.0, abs(j_b))
    if j_a < j_b - tol:
        return True
    if j_a > j_b + tol:
        return False
    if pol_a.switch_time < pol_b.switch_time - 1e-12:
        return True
    if pol_a.switch_time > pol_b.switch_time + 1e-12:
        return False
    return pol_a.x0 > pol_b.x0 + 1e-12


@dataclass
class OptimizeResult:
    policy: BangBangPolicy
    objective: float
    samples: DelaySamples
    n_evaluations: int
    grid: list  # (x0, tb, objective) coarse-grid records


def optimize_bangbang(sset, beta_risk, alpha, search=None, sample_cache=None,
                      extra_candidates=()):
    """Coarse grid over (x0, switch time) + compass pattern-search refinement.

    ``sample_cache`` maps (x0, tb) -> DelaySamples and may be shared across
    calls with different (beta_risk, alpha) on the same scenario set, since
    the delay samples do not depend on the risk parameters. Deterministic
    given the master seed (common random numbers). ``extra_candidates`` are
    (x0, tb) pairs evaluated alongside the grid; an MPC caller passes the
    shifted previous plan here so re-planning is anchored to it.
    """
    search = search or SearchConfig()
    x_lo, x_hi = search.x0_range or (0.0, sset.d_max)
    t_lo, t_hi = search.tb_range or (0.0, sset.horizon)
    xs = np.linspace(x_lo, x_hi, search.n_x0)
    ts = np.linspace(t_lo, t_hi, search.n_tb)
    cache = sample_cache if sample_cache is not None else {}
    n_eval = 0

    def eval_at(x0, tb):
        nonlocal n_eval
        key = (round(float(x0), 12), round(float(tb), 12))
        if key not in cache:
            cache[key] = evaluate_policy_samples(BangBangPolicy(*key), sset)
            n_eval += 1
        return objective(cache[key], beta_risk, alpha), cache[key]

    best_pol, best_j, best_samples = None, np.inf, None
    grid_records = []
    candidates = [(float(x0), float(tb)) for tb, x0 in itertools.product(ts, xs)]
    candidates.extend((float(np.clip(x0, x_lo, x_hi)), float(np.clip(tb, t_lo, t_hi)))
                      for x0, tb in extra_candidates)
    for x0, tb in candidates:
        j, smp = eval_at(x0, tb)
        grid_records.append((float(x0), float(tb), j))
        cand = BangBangPolicy(float(x0), float(tb))
        if best_pol is None or _better(j, cand, best_j, best_pol):
            best_pol, best_j, best_samples = cand, j, smp

    step_x = (xs[1] - xs[0]) if len(xs) > 1 else max(x_hi - x_lo, 1e-3)
    step_t = (ts[1] - ts[0]) if len(ts) > 1 else max(t_hi - t_lo, 1e-3)
    budget = search.pattern_steps
    while budget > 0 and (step_x > search.min_step_frac * max(x_hi - x_lo, 1e-12)
                          or step_t > search.min_step_frac * max(t_hi - t_lo, 1e-12)):
        moved = False
        for dx, dtb in ((step_x, 0.0), (-step_x, 0.0), (0.0, step_t), (0.0, -step_t)):
            if budget <= 0:
                break
            x0 = float(np.clip(best_pol.x0 + dx, x_lo, x_hi))
            tb = float(np.clip(best_pol.switch_time + dtb, t_lo, t_hi))
            cand = BangBangPolicy(x0, tb)
            if (x0, tb) == (best_pol.x0, best_pol.switch_time):
                continue
            j, smp = eval_at(x0, tb)
            budget -= 1
            if _better(j, cand, best_j, best_pol):
                best_pol, best_j, best_samples = cand, j, smp
                moved = True
        if not moved:
            step_x *= 0.5
            step_t *= 0.5
    return OptimizeResult(best_pol, best_j, best_samples, n_eval, grid_records)


@dataclass(frozen=True)
class BruteForceInstance:
    """Small instance for exhaustive binary-control enumeration.

    n_t release slots x n_x distance bins, deterministic demand. The control
    grid u(t_k, x_j) in {0,1} follows the once-released-stays-released
    convention: bin j enters at the first slot with u = 1 (or never).
    """

    slot_times: np.ndarray  # (n_t,), h
    lengths: np.ndarray  # (n_x,), km, strictly increasing
    masses: np.ndarray  # (n_x,), veh
    network: object  # NetworkParams
    horizon: float

    def __post_init__(self):
        if len(self.slot_times) * len(self.lengths) > 20:
            raise ValueError("instance too large for exhaustive enumeration (n_t*n_x > 20)")
        object.__setattr__(self, "slot_times", np.asarray(self.slot_times, dtype=float))
        object.__setattr__(self, "lengths", np.asarray(self.lengths, dtype=float))
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float))


@dataclass
class BruteForceResult:
    release_slots: np.ndarray  # (n_x,) slot index per bin, -1 = never released
    release_times: np.ndarray  # (n_x,) h, inf = never
    objective: float
    n_grids: int
    n_distinct: int

    def is_threshold_in_x(self):
        """Release sets are distance prefixes at every slot (tau non-decreasing)."""
        t = np.where(self.release_slots >= 0, self.release_times, np.inf)
        return bool(np.all(np.diff(t) >= -1e-12))

    def is_single_switch(self):
        """tau takes at most the two values {0, t_b} with the 0-block a prefix."""
        t = np.where(self.release_slots >= 0, self.release_times, np.inf)
        vals = np.unique(t)
        if vals.size > 2:
            return False
        if vals.size == 2 and vals[0] != 0.0:
            return False
        return bool(np.all(np.diff(t) >= -1e-12))


def _delay_for_slots(slots, inst):
    """Exact delay D for one release-slot assignment (active + waiting)."""
    schedule = {}
    waiting = 0.0
    for j, s in enumerate(slots):
        if s < 0:
            waiting += inst.masses[j] * inst.horizon
            continue
        t_rel = inst.slot_times[s]
        waiting += inst.masses[j] * t_rel
        schedule.setdefault(t_rel, []).append((float(inst.masses[j]), float(inst.lengths[j])))
    trace = bathtub_simulate(
        CohortState(), inst.network, sorted(schedule.items()),
        waiting_curve=lambda t: 0.0, horizon=inst.horizon,
    )
    return trace.delay + waiting


def brute_force_optimal(inst):
    """Exhaustively enumerate all 2^(n_t*n_x) binary release grids.

    Each grid maps to the canonical assignment "first slot with u = 1 per
    bin"; delays are memoized on that assignment, so the enumeration visits
    every grid while simulating each distinct control once. Returns the
    minimizer (ties resolved toward earlier release of shorter bins by the
    enumeration order).
    """
    n_t, n_x = len(inst.slot_times), len(inst.lengths)
    memo = {}
    best_slots, best_j = None, np.inf
    n_grids = 0
    for bits in itertools.product(range(2 ** n_t), repeat=n_x):
        n_grids += 1
        slots = tuple(
            _first_set_bit(b, n_t) for b in bits
        )
        if slots not in memo:
            memo[slots] = _delay_for_slots(slots, inst)
        j = memo[slots]
        if j < best_j - 1e-12:
            best_j, best_slots = j, slots
    slots_arr = np.array(best_slots, dtype=int)
    times = np.where(slots_arr >= 0, inst.slot_times[np.maximum(slots_arr, 0)], np.inf)
    return BruteForceResult(slots_arr, times, best_j, n_grids, len(memo))


def _first_set_bit(bits, n_t):
    for k in range(n_t):
        if bits & (1 << k):
            return k
    return -1


@dataclass
class ControlDiagnostics:
    """Headway-limited macroscopic service rate table and its derivative."""

    headway: float  # h
    delta: np.ndarray  # queue grid, veh
    S: np.ndarray  # service rate table
    Sprime: np.ndarray  # finite-difference derivative
    delta_star: float  # queue level with S'(delta) = 1, NaN if unattained

    def sprime_at(self, delta):
        return np.interp(delta, self.delta, self.Sprime)


def service_rate(dist, model, lane_km, n_total, headway=2.0 / 3600.0, delta_grid=None):
    """Tabulate S(Delta) = integral of min(V(Delta/L), l/T_h) dN(l).

    The speed-limited long trips move at V, trips shorter than T_h * V are
    served at their own pace l / T_h. Under an IFR trip-length distribution
    and a speed curve with non-positive curvature the table is concave.
    """
    if headway <= 0:
        raise ValueError("headway must be positive")
    if delta_grid is None:
        delta_grid = np.linspace(0.0, lane_km * model.rho_j, 200)
    delta_grid = np.asarray(delta_grid, dtype=float)
    if np.any(np.diff(delta_grid) <= 0):
        raise ValueError("queue grid must be strictly increasing")
    ell, f = dist.d, dist.f
    S = np.empty_like(delta_grid)
    for i, delta in enumerate(delta_grid):
        v = float(model.speed(delta / lane_km))
        S[i] = n_total * trapezoid(np.minimum(v, ell / headway) * f, ell)
    Sp = np.gradient(S, delta_grid)
    delta_star = np.nan
    crosses = np.flatnonzero(np.diff(np.signbit(Sp - 1.0)))
    if crosses.size:
        k = crosses[0]
        x0, x1 = delta_grid[k], delta_grid[k + 1]
        y0, y1 = Sp[k] - 1.0, Sp[k + 1] - 1.0
        delta_star = float(x0 - y0 * (x1 - x0) / (y1 - y0))
    return ControlDiagnostics(headway, delta_grid, S, Sp, delta_star)


@dataclass
class CostateResult:
    t: np.ndarray
    p: np.ndarray
    zero_crossings: int


def costate_trajectory(diag, delta_of_t, T, dt):
    """Integrate the lumped costate dp/dt = -1 + p S'(Delta(t)), p(T) = 0.

    Classic fixed-step RK4 backward from T. ``delta_of_t`` maps time to the
    queue level (callable or (t, delta) table). Reports the number of
    interior sign changes of p; at most one is expected when S is concave.
    """
    if callable(delta_of_t):
        delta_fn = delta_of_t
    else:
        t_tab, d_tab = delta_of_t
        delta_fn = lambda t: np.interp(t, t_tab, d_tab)

    def rhs(t, p):
        return -1.0 + p * float(diag.sprime_at(delta_fn(t)))

    n = max(int(np.ceil(T / dt)), 1)
    ts = np.linspace(0.0, T, n + 1)
    p = np.empty(n + 1)
    p[-1] = 0.0
    h = -(ts[1] - ts[0])
    for i in range(n, 0, -1):
        t = ts[i]
        y = p[i]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        p[i - 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    scale = np.max(np.abs(p)) if np.max(np.abs(p)) > 0 else 1.0
    signs = np.sign(p[np.abs(p) > 1e-9 * scale])
    crossings = int(np.count_nonzero(np.diff(signs) != 0))
    return CostateResult(ts, p, crossings)


@dataclass
class MpcResult:
    """Averaged receding-horizon trajectories over realizations.

    ``t_star``/``x_star`` are (n_updates,) means over all realizations with
    the convention that both are 0 once a realization has fully released.
    ``x_star_active`` averages only the realizations still gating (NaN once
    none are left). ``fraction_active`` tracks how many realizations still
    gate at each update.
    """

    times: np.ndarray
    t_star: np.ndarray
    x_star: np.ndarray
    x_star_active: np.ndarray
    fraction_active: np.ndarray
    active_mean: np.ndarray
    waiting_mean: np.ndarray
    n_realizations: int
    n_failed: int

    def to_csv(self, path, metadata=None):
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["k", "t_h", "t_star_h", "x_star_km", "x_star_active_km",
                             "fraction_active", "active_veh", "waiting_veh"])
            for k in range(self.times.size):
                writer.writerow([
                    k, f"{self.times[k]:.8g}", f"{self.t_star[k]:.8g}",
                    f"{self.x_star[k]:.8g}", f"{self.x_star_active[k]:.8g}",
                    f"{self.fraction_active[k]:.6g}", f"{self.active_mean[k]:.8g}",
                    f"{self.waiting_mean[k]:.8g}",
                ])


def mpc_run(dist, n_total, n_bins, gbm, network, *, horizon, update_step,
            n_updates, n_realizations, beta_risk, alpha, master_seed,
            horizon_pred=None, n_inner=16, inner_dt=None, inner_search=None,
            replan_search=None, outer_dt=None):
    """Receding-horizon control: measure, sample, optimize, apply, advance.

    At each update the controller optimizes a bang-bang continuation on
    ``n_inner`` demand branches from the measured state, applies the first
    action (immediate release of bins up to x0*, plus the full opening if
    the switch falls inside the update interval) and advances the
    realization one update step. Re-plans are warm-started with the shifted
    previous plan and may use the lighter ``replan_search``. After full
    release, (t*, x*) are recorded as 0 for the rest of that realization.
    """
    from .demand import init_surface

    lo, hi = dist.support
    edges = np.linspace(lo, hi, n_bins + 1)
    surface0 = init_surface(n_total, dist, edges).mass
    mids = 0.5 * (edges[:-1] + edges[1:])
    outer_dt = outer_dt or network.dt
    inner_dt = inner_dt or network.dt
    inner_search = inner_search or SearchConfig(n_x0=10, n_tb=10, pattern_steps=30)
    replan_search = replan_search or inner_search
    steps_per_update = max(int(round(update_step / outer_dt)), 1)
    n_outer_steps = int(np.ceil(horizon / outer_dt))

    t_star = np.zeros((n_realizations, n_updates))
    x_star = np.zeros((n_realizations, n_updates))
    gating = np.zeros((n_realizations, n_updates), dtype=bool)
    active_tr = np.zeros((n_realizations, n_updates))
    waiting_tr = np.zeros((n_realizations, n_updates))
    failed = np.zeros(n_realizations, dtype=bool)

    for r in range(n_realizations):
        noise = _realization_noise(master_seed, r, edges.size - 1)
        sim = BatchSim(network.model, network.lane_km, edges, surface0, gbm,
                       outer_dt, n_outer_steps, 1, noise,
                       np.full(edges.size - 1, NEVER, dtype=np.int64))
        fully_released = False
        prev_plan = None
        for k in range(n_updates):
            t_k = k * update_step
            active_tr[r, k] = float(sim.act.sum())
            waiting_tr[r, k] = float(sim.M.sum())
            if not fully_released:
                snap = sim.snapshot()
                h_pred = horizon_pred if horizon_pred is not None else max(horizon - t_k, update_step)
                inner = ScenarioSet(
                    edges, snap["surface"], gbm, network, h_pred, n_inner,
                    master_seed, dt=inner_dt, noise_tag=(101, r, k),
                    extra_lengths=snap["cohort_lengths"],
                    extra_masses=snap["cohort_masses"],
                )
                carried = ()
                if prev_plan is not None:
                    carried = ((prev_plan.x0, max(prev_plan.switch_time - update_step, 0.0)),)
                try:
                    res = optimize_bangbang(
                        inner, beta_risk, alpha,
                        inner_search if prev_plan is None else replan_search,
                        extra_candidates=carried,
                    )
                except Exception:
                    failed[r] = True
                    break
                pol = res.policy
                prev_plan = pol
                t_star[r, k] = pol.switch_time
                x_star[r, k] = pol.x0
                gating[r, k] = True
                # apply the first action on the realization's schedule
                rel_t = np.where(edges[1:] <= pol.x0 + _EDGE_TOL, t_k,
                                 t_k + pol.switch_time)
                sim.set_release_steps(release_steps_from_times(rel_t, outer_dt,
                                                               n_outer_steps))
                if pol.switch_time <= update_step + 1e-12:
                    fully_released = True
            sim.run(until_step=(k + 1) * steps_per_update)
            if not np.any(sim.M) and np.all(sim.release_steps <= sim.j):
                fully_released = True

    ok = ~failed
    frac = gating[ok].mean(axis=0)
    with np.errstate(invalid="ignore"):
        x_active = np.where(
            gating[ok].sum(axis=0) > 0,
            (x_star[ok] * gating[ok]).sum(axis=0) / np.maximum(gating[ok].sum(axis=0), 1),
            np.nan,
        )
    return MpcResult(
        times=np.arange(n_updates) * update_step,
        t_star=t_star[ok].mean(axis=0),
        x_star=x_star[ok].mean(axis=0),
        x_star_active=x_active,
        fraction_active=frac,
        active_mean=active_tr[ok].mean(axis=0),
        waiting_mean=waiting_tr[ok].mean(axis=0),
        n_realizations=int(ok.sum()),
        n_failed=int(failed.sum()),
    )


def _realization_noise(master_seed, r, n_bins):
    def fn(j):
        rng = np.random.default_rng((master_seed, 104729, r, j))
        return rng.standard_normal((1, n_bins))

    return fn
