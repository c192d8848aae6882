"""Reproduction checks for the case-study results and structural theorems.

Each check returns a dict with ``name``, ``passed`` and ``details`` so that
the CLI can emit a structured report and the acceptance suite can assert on
it. Checks compute everything from the toolkit itself plus independent
oracles (Monte Carlo sampling, brute-force enumeration, closed-form
geometry); reference values that the case study reports but that are not
reproducible from its own formulas are included in the details for
comparison, never asserted.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from . import flood as fl
from . import geometry as geo
from .bathtub import CohortState, NetworkParams, exit_rate_check, simulate
from .control import (
    BangBangPolicy,
    BruteForceInstance,
    ScenarioSet,
    SearchConfig,
    brute_force_optimal,
    costate_trajectory,
    deterministic_trace,
    evaluate_policy_samples,
    mpc_run,
    optimize_bangbang,
    service_rate,
)
from .demand import GbmParams
from .nfd import SpeedDensityModel
from .risk import avar, objective

__all__ = [
    "counterexample_check",
    "geometry_constants_check",
    "distribution_check",
    "hazard_structure_check",
    "capacities_check",
    "avar_check",
    "conservation_convergence_check",
    "propositions_check",
    "optimization_table",
    "optimization_benefit_check",
    "mpc_check",
    "flood_check",
    "costate_check",
    "TARGETS",
    "run_target",
]


def _result(name, passed, **details):
    return {"name": name, "passed": bool(passed), "details": details}


# ---------------------------------------------------------------- 1
def counterexample_check(eps=1e-3):
    """Sequential-release travel times and the marginal-delay rate 27/4.

    The three-cohort instance (1/3 veh at 1, 10, 19 km; V = 1 - rho, L = 1)
    is simulated with sequential releases after full clearance; per-cohort
    travel times must be 1.5, 15, 28.5 exactly. The 6.75 rate combines the
    three first-order effects of advancing an eps-fraction of the 10-km
    cohort into the first release, each measured by simulation: the short
    cohort's slowdown at density 1/3 + eps, the medium batch's slowdown at
    density 1/3 + eps, and the advanced vehicles' waiting credit.
    """
    model = SpeedDensityModel.linear(1.0, 1.0)
    params = NetworkParams(lane_km=1.0, model=model, dt=10.0 / 3600.0)
    schedule = [(0.0, [(1 / 3, 1.0)]), (1.5, [(1 / 3, 10.0)]), (16.5, [(1 / 3, 19.0)])]
    trace = simulate(CohortState(), params, schedule, horizon=50.0)
    travel = [c.travel_time for c in trace.completions]
    expected = [1.5, 15.0, 28.5]
    times_ok = len(travel) == 3 and all(abs(a - b) <= 1e-6 for a, b in zip(travel, expected))

    def travel_time_of(cohorts, length):
        tr = simulate(CohortState(), params, [(0.0, cohorts)], horizon=80.0)
        return next(c.travel_time for c in tr.completions if c.length == length)

    tau_s0 = travel_time_of([(1 / 3, 1.0)], 1.0)
    tau_m0 = travel_time_of([(1 / 3, 10.0)], 10.0)
    tau_s1 = travel_time_of([(1 / 3, 1.0), (eps, 10.0)], 1.0)  # short cohort slowed
    tau_m1 = travel_time_of([(1 / 3 + eps, 10.0)], 10.0)  # medium batch slowed
    rate = ((tau_s1 - tau_s0) / 3.0 + (tau_m1 - tau_m0) / 3.0) / eps - tau_s0
    rate_ok = abs(rate - 6.75) <= 0.05 * 6.75
    return _result(
        "counterexample", times_ok and rate_ok,
        travel_times=travel, expected_travel_times=expected,
        perturbation_rate=rate, expected_rate=6.75, eps=eps,
        base_delay=trace.delay,
    )


# ---------------------------------------------------------------- 2
def geometry_constants_check():
    """Angular gaps of the three rim exits and norms of their projections."""
    zone = geo.DiskZone.from_degrees(5.54, [92.9, 145.3, 194.3])
    gaps = geo.angular_gaps(zone.exit_angles)
    expected = np.array([0.914, 0.855, 4.516])
    gaps_ok = np.allclose(gaps, expected, rtol=2e-3, atol=0.0)
    rim_coords = {
        "Knippelsbro": (-0.281, 5.533),
        "Sjaellandsbroen": (-4.555, 3.153),
        "Amagermotorvejen": (-5.367, -1.372),
    }
    norms = {name: float(np.hypot(*xy)) for name, xy in rim_coords.items()}
    norms_ok = all(abs(n - 5.54) <= 0.01 for n in norms.values())
    knip = geo.project_exit((0.0, 0.0), (-0.281, 5.533), 5.54)
    angle = np.degrees(np.arctan2(knip[1], knip[0]))
    proj_ok = abs(np.hypot(*knip) - 5.54) < 1e-12 and abs(angle - 92.9) <= 0.1
    return _result(
        "geometry_constants", gaps_ok and norms_ok and proj_ok,
        gaps=gaps.tolist(), expected_gaps=expected.tolist(),
        exit_norms=norms, knippelsbro_angle_deg=float(angle),
        langebro_note="published Langebro point (-0.505, 3.207) is not on the "
                      "5.54 km rim (norm 3.25 km) and is omitted from the "
                      "3-exit distance distribution",
    )


# ---------------------------------------------------------------- 3
def distribution_check(n_samples=1_000_000, seed=20240817):
    """Uniform-disk CDF vs a Monte Carlo oracle and the small-d asymptote."""
    zone = geo.DiskZone.from_degrees(5.54, [92.9, 145.3, 194.3])
    R = zone.radius
    rng = np.random.default_rng(seed)
    r = R * np.sqrt(rng.random(n_samples))
    th = 2.0 * np.pi * rng.random(n_samples)
    x, y = r * np.cos(th), r * np.sin(th)
    dmin = np.full(n_samples, np.inf)
    for cx, cy in zone.exit_coords:
        dmin = np.minimum(dmin, np.hypot(x - cx, y - cy))
    check_d = np.linspace(0.25, zone.max_exit_distance() - 0.05, 40)
    sup_err = 0.0
    for d in check_d:
        sup_err = max(sup_err, abs(geo.cdf_uniform(d, zone) - float((dmin <= d).mean())))
    mc_ok = sup_err <= 5e-3
    # exact small-cap quadratic coefficient: each rim cap is a half-disk,
    # so F(d) ~ n * d^2 / (2 R^2); the case study prints 3d^2/(pi R^2),
    # which contradicts its own integral formula (off by pi/2)
    d_small = 0.1
    asym = 3.0 * d_small**2 / (2.0 * R**2)
    f_small = geo.cdf_uniform(d_small, zone)
    asym_ok = abs(f_small - asym) <= 0.05 * asym
    return _result(
        "distribution", mc_ok and asym_ok,
        mc_sup_error=sup_err, mc_tolerance=5e-3, n_samples=n_samples,
        cdf_at_0p1=f_small, quadratic_asymptote=asym,
        printed_coefficient_value=3.0 * d_small**2 / (np.pi * R**2),
    )


# ---------------------------------------------------------------- 4
def hazard_structure_check(raster=0.02, mc_check=True):
    """IFR verdicts: the 3-exit disk (claimed IFR) and the dumbbell (not IFR).

    The disk half FAILS and is expected to fail: the distribution is
    genuinely not IFR. Where the distance balls of two rim exits merge
    (d = R sin(gap/2) = 2.297 km for the 0.855 rad gap) the level-set
    length drops with a square-root cusp and the hazard falls by ~18%,
    confirmed here by an independent Monte Carlo histogram. The convex-zone
    monotone-hazard claim does not hold for multi-exit rim configurations.
    """
    zone = geo.DiskZone.from_degrees(5.54, [92.9, 145.3, 194.3])
    disk = geo.build_distribution(zone, n_grid=400)
    disk_res = geo.is_ifr(disk)

    details = {
        "disk_is_ifr": disk_res.is_ifr,
        "disk_violation_distance": disk_res.violation_distance,
        "ball_merge_distances": [
            float(zone.radius * np.sin(g / 2.0)) for g in geo.angular_gaps(zone.exit_angles)
        ],
    }
    if mc_check and not disk_res.is_ifr:
        rng = np.random.default_rng(5)
        n = 4_000_000
        r = zone.radius * np.sqrt(rng.random(n))
        th = 2.0 * np.pi * rng.random(n)
        x, y = r * np.cos(th), r * np.sin(th)
        dmin = np.full(n, np.inf)
        for cx, cy in zone.exit_coords:
            dmin = np.minimum(dmin, np.hypot(x - cx, y - cy))
        bins = np.arange(2.0, 3.0, 0.05)
        cnt, _ = np.histogram(dmin, bins=bins)
        F = (dmin < bins[0]).mean() + np.cumsum(cnt) / n
        h_mc = (cnt / n / 0.05) / (1.0 - (F - cnt / n / 2.0))
        run_max = np.maximum.accumulate(h_mc)
        details["mc_hazard_max_rel_dip"] = float(((run_max - h_mc) / run_max).max())

    dumb = geo.dumbbell_distribution(geo.DumbbellZone(), resolution=raster)
    dumb_res = geo.is_ifr(dumb)
    dumb_ok = (not dumb_res.is_ifr) and 1.0 < dumb_res.violation_distance < 5.0
    details.update(
        dumbbell_is_ifr=dumb_res.is_ifr,
        dumbbell_violation_distance=dumb_res.violation_distance,
    )
    return _result("hazard_structure", disk_res.is_ifr and dumb_ok, **details)


# ---------------------------------------------------------------- 5
def capacities_check(scn=None):
    """Per-bridge lane-formula capacities vs stated values."""
    from .scenario import Scenario

    scn = scn or Scenario.default()
    rows = scn.bridge_table()
    by_name = {r["name"]: r for r in rows}
    exact_ok = (
        by_name["E20"]["formula_capacity"] == 16800
        and by_name["Langebro"]["formula_capacity"] == 22000
        and by_name["Knippelsbro"]["formula_capacity"] == 10000
    )
    kalvebod = by_name["Kalvebod"]
    kalvebod_flagged = kalvebod["mismatch"] and kalvebod["formula_capacity"] == 26400 \
        and kalvebod["stated_capacity"] == 31200
    total = scn.total_capacity
    bound_min = scn.clearance_bound_h * 60.0
    return _result(
        "capacities", exact_ok and kalvebod_flagged and total == 80000.0,
        bridges=rows, total_stated=total,
        clearance_bound_min=bound_min,
        reference_bound_min=scn.cfg["reference"]["clearance_bound_min"],
        n_vehicles=scn.n_vehicles,
    )


# ---------------------------------------------------------------- 6
def avar_check(n_random=200, seed=11):
    """AVaR oracle agreement: worked examples plus a brute-force eta grid."""
    base_ok = (
        abs(avar([1, 2, 3, 4, 5], 0.8) - 5.0) <= 1e-9
        and abs(avar([1, 2, 3, 4, 5], 0.0) - 3.0) <= 1e-12
        and abs(objective([1, 2, 3, 4, 5], 1.0 / 3.0, 0.8) - (3.0 + 5.0 / 3.0)) <= 1e-9
    )
    rng = np.random.default_rng(seed)
    worst = 0.0
    coherent = True
    monotone = True
    for _ in range(n_random):
        n = rng.integers(3, 60)
        x = rng.gamma(2.0, 10.0, size=n)
        alphas = np.sort(rng.random(3) * 0.98)
        prev = -np.inf
        for a in alphas:
            val = avar(x, a)
            # brute-force Rockafellar-Uryasev minimization; the empirical RU
            # objective is convex piecewise linear with kinks at the sample
            # values, so a grid that includes them attains the exact minimum
            etas = np.unique(np.concatenate([x, np.linspace(0.0, x.max(), 2001)]))
            ru = etas + np.mean(np.clip(x[None, :] - etas[:, None], 0.0, None), axis=1) / (1.0 - a)
            worst = max(worst, abs(val - ru.min()))
            coherent &= bool(val >= x.mean() - 1e-9)
            monotone &= bool(val >= prev - 1e-9)
            prev = val
    ok = base_ok and worst <= 1e-6 and coherent and monotone
    return _result(
        "avar", ok,
        worked_examples_ok=base_ok, max_oracle_gap=worst,
        coherent=coherent, monotone_in_alpha=monotone, n_random=n_random,
    )


# ---------------------------------------------------------------- 7
def conservation_convergence_check(scn=None):
    """Exact vehicle conservation and first-order step-size convergence."""
    from .scenario import Scenario

    scn = scn or Scenario.default()
    sset = scn.build_scenario_set(n_scenarios=1, sigma=0.0)
    policy = BangBangPolicy(5.0, 0.2097)  # switch deliberately off the step grid
    trace = deterministic_trace(policy, sset)
    cons_err = float(np.max(np.abs(trace.injected - trace.active - trace.completed)))
    cons_ok = cons_err <= 1e-9 * max(1.0, scn.n_vehicles)

    def d_at(dt):
        s = ScenarioSet(sset.edges, sset.surface0, sset.gbm, sset.network,
                        sset.horizon, 1, sset.master_seed, dt=dt)
        return float(evaluate_policy_samples(policy, s).values[0])

    d1 = d_at(scn.build_network().dt)
    d2 = d_at(scn.build_network().dt / 2.0)
    conv = abs(d2 - d1) / d1
    return _result(
        "conservation_convergence", cons_ok and conv < 0.01,
        conservation_error=cons_err, delay_dt=d1, delay_half_dt=d2,
        relative_change=conv,
    )


# ---------------------------------------------------------------- 8
def propositions_check():
    """Exhaustive 4x4 enumeration: the optimum is threshold, isotone,
    single-switch (structure of the optimal gating under IFR demand)."""
    model = SpeedDensityModel.linear(1.0, 1.0)
    net = NetworkParams(lane_km=1.0, model=model, dt=1.0 / 60.0)
    inst = BruteForceInstance(
        slot_times=np.array([0.0, 1.5, 3.0, 4.5]),
        lengths=np.array([0.5, 1.0, 1.5, 2.0]),
        masses=np.full(4, 0.2),
        network=net,
        horizon=12.0,
    )
    res = brute_force_optimal(inst)
    ok = res.is_threshold_in_x() and res.is_single_switch() and res.n_grids == 2 ** 16
    return _result(
        "propositions", ok,
        release_slots=res.release_slots.tolist(),
        release_times=[float(t) for t in res.release_times],
        objective=res.objective, n_grids=res.n_grids, n_distinct=res.n_distinct,
        threshold_in_x=res.is_threshold_in_x(), single_switch=res.is_single_switch(),
    )


# ---------------------------------------------------------------- 9
def optimization_table(scn=None, n_scenarios=None, search=None, progress=None):
    """Optimal bang-bang policy per (alpha, lam_mix) cell with improvement
    over the no-control release; sample caches shared across alpha."""
    from .scenario import Scenario

    scn = scn or Scenario.default()
    risk_cfg = scn.cfg["risk"]
    beta = risk_cfg["beta"]
    search = search or scn.build_search()
    rows = []
    for lam in risk_cfg["lam_grid"]:
        sset = scn.build_scenario_set(lam_mix=lam, n_scenarios=n_scenarios)
        cache = {}
        nc_samples = evaluate_policy_samples(BangBangPolicy(np.inf, 0.0), sset)
        for alpha in risk_cfg["alpha_grid"]:
            res = optimize_bangbang(sset, beta, alpha, search, sample_cache=cache)
            j_nc = objective(nc_samples, beta, alpha)
            key = f"{alpha:g},{round(lam, 2):g}"
            ref_ctrl = scn.cfg["reference"]["optimal_controls"].get(key)
            ref_perf = scn.cfg["reference"]["performance"].get(key)
            rows.append({
                "alpha": alpha,
                "lam_mix": lam,
                "t_star_s": res.policy.switch_time * 3600.0,
                "x_star_km": res.policy.x0,
                "objective": res.objective,
                "objective_no_control": j_nc,
                "improvement_pct": 100.0 * (1.0 - res.objective / j_nc),
                "mean_delay_min_per_veh": 60.0 * float(res.samples.values.mean()) / scn.n_vehicles,
                "n_evaluations": res.n_evaluations,
                "reference_control": ref_ctrl,
                "reference_performance": ref_perf,
            })
            if progress:
                progress(rows[-1])
    return rows


def optimization_benefit_check(scn=None, n_scenarios=None, search=None, min_improvement=15.0):
    rows = optimization_table(scn, n_scenarios=n_scenarios, search=search)
    worst = min(r["improvement_pct"] for r in rows)
    return _result(
        "optimization_benefit", worst >= min_improvement,
        worst_improvement_pct=worst, min_required_pct=min_improvement,
        table=rows,
    )


# ---------------------------------------------------------------- 10
def mpc_check(scn=None, sigmas=(0.03, 0.1), n_realizations=None):
    """Receding-horizon qualitative behavior for two volatility levels."""
    from .scenario import Scenario

    scn = scn or Scenario.default()
    mpc_cfg = scn.cfg["run"]["mpc"]
    risk_cfg = scn.cfg["risk"]
    results = {}
    for sigma in sigmas:
        results[sigma] = mpc_run(
            scn.build_distribution(1.0), scn.n_vehicles, scn.cfg["run"]["bins"],
            GbmParams(mu=scn.cfg["gbm"]["mu"], sigma=sigma), scn.build_network(),
            horizon=scn.cfg["run"]["horizon_h"],
            update_step=mpc_cfg["update_step_s"] / 3600.0,
            n_updates=mpc_cfg["n_updates"],
            n_realizations=n_realizations or mpc_cfg["n_realizations"],
            beta_risk=risk_cfg["beta"], alpha=risk_cfg["alpha"],
            master_seed=scn.cfg["run"]["seed"],
            horizon_pred=mpc_cfg.get("horizon_pred_h"),
            n_inner=mpc_cfg["n_inner"],
            inner_dt=mpc_cfg["inner_dt_s"] / 3600.0,
            inner_search=scn.build_search("mpc"),
            replan_search=scn.build_search("mpc_replan"),
        )

    details = {}
    ok = True
    base = results[sigmas[0]]
    slack = 0.02 * float(base.t_star.max()) if base.t_star.max() > 0 else 1e-9
    t_noninc = bool(np.all(np.diff(base.t_star) <= slack))
    k30 = int(np.searchsorted(base.times, 0.5 + 1e-12))
    reaches_zero = bool(np.all(base.t_star[min(k30, base.t_star.size - 1):] <= 1e-9))
    xa = base.x_star_active[np.isfinite(base.x_star_active)]
    x_slack = 0.02 * float(np.nanmax(base.x_star_active)) if xa.size else 0.0
    x_nondec = bool(np.all(np.diff(xa) >= -x_slack)) if xa.size > 1 else True
    ok &= t_noninc and reaches_zero and x_nondec
    details.update(
        t_star_non_increasing=t_noninc, t_star_zero_by_30min=reaches_zero,
        x_star_active_non_decreasing=x_nondec,
        t_star_first=float(base.t_star[0]), n_failed=base.n_failed,
        t_star=[float(v) for v in base.t_star],
        x_star_active=[float(v) for v in base.x_star_active],
    )
    if len(sigmas) > 1:
        other = results[sigmas[1]]
        floor = 0.02 * max(base.t_star.max(), other.t_star.max())
        num = np.abs(base.t_star - other.t_star)
        den = np.maximum(np.maximum(base.t_star, other.t_star), 1e-12)
        rel = np.where(np.maximum(base.t_star, other.t_star) > floor, num / den, 0.0)
        sigma_close = bool(np.all(rel < 0.15))
        ok &= sigma_close
        details["sigma_pointwise_rel_diff_max"] = float(rel.max())
        details["sigma_trajectories_within_15pct"] = sigma_close
    return _result("mpc", ok, **details), results


# ---------------------------------------------------------------- 11
def flood_check(scn=None, n_mc=100_000, seed=3):
    """Surge-front, arrival-time and risk-field property checks."""
    from .scenario import Scenario

    scn = scn or Scenario.default()
    p = scn.build_surge()
    R = p.radius_m
    t_grid = np.linspace(0.0, 1.2 * fl.full_inundation_time(p), 200)
    xf = fl.front_position(t_grid, p)
    strictly_dec = bool(np.all(np.diff(xf) < 0))
    t_shore = fl.arrival_time(R, p, mode="inverted")
    t_shore_cf = fl.arrival_time(R, p, mode="closed_form")
    x_grid = np.linspace(-R, R, 41)
    t_inv = fl.arrival_time(x_grid, p, mode="inverted")
    roundtrip = float(np.max(np.abs(fl.front_position(t_inv, p) - x_grid)))
    t_cf = fl.arrival_time(x_grid, p, mode="closed_form")
    closed_gap = float(np.max(np.abs(t_cf - t_inv)))

    field = scn.build_risk_field()
    mass = field.total_mass()
    g_mass = float(trapezoid(field.g_table * field.g_r, field.g_r))

    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random(n_mc)) * R
    th = 2.0 * np.pi * rng.random(n_mc)
    xs = r * np.cos(th)
    seg_err = 0.0
    for t in np.linspace(100.0, fl.full_inundation_time(p), 7):
        mc = float((xs >= fl.front_position(t, p)).mean())
        seg_err = max(seg_err, abs(fl.flooded_ratio(t, p) - mc))

    duration_h = fl.full_inundation_time(p) / 3600.0
    ratio_at_full = fl.flooded_ratio(fl.full_inundation_time(p), p)
    ref = scn.cfg["reference"]
    ok = (strictly_dec and t_shore == 0.0 and t_shore_cf == 0.0
          and roundtrip <= 1e-4 * R and abs(mass - 1.0) <= 1e-6
          and abs(g_mass - 1.0) <= 1e-4 and seg_err <= 3e-3)
    return _result(
        "flood", ok,
        front_strictly_decreasing=strictly_dec, shoreline_arrival=t_shore,
        inversion_roundtrip_m=roundtrip, closed_form_vs_inverted_max_s=closed_gap,
        risk_field_mass=mass, radial_profile_mass=g_mass,
        flooded_ratio_mc_error=seg_err,
        computed_duration_h=duration_h, reference_duration_h=ref["flood_duration_h"],
        computed_ratio_at_full=ratio_at_full, reference_ratio=ref["flooded_ratio"],
        mismatch_note="computed full-inundation time and ratio disagree with the "
                      "reference values; neither is reproducible from the stated "
                      "front-position formula",
    )


# ---------------------------------------------------------------- 12
def costate_check(scn=None):
    """Service-rate concavity (linear NFD) and the single-crossing costate.

    Concavity is checked with the Greenshields curve: the hyperbolic
    congested branch of the triangular NFD has positive curvature and
    genuinely breaks the concavity claim, so the linear curve is the
    honest setting for it. The costate is integrated on the queue
    trajectory of the optimized policy under the actual (triangular) NFD.
    """
    from .scenario import Scenario

    scn = scn or Scenario.default()
    dist = scn.build_distribution(1.0)
    net = scn.build_network()
    n_veh = scn.n_vehicles
    lin = SpeedDensityModel.linear(scn.cfg["nfd"]["v_f"], scn.cfg["nfd"]["rho_j"])
    diag_lin = service_rate(dist, lin, net.lane_km, n_veh)
    sec = np.diff(diag_lin.S, 2)
    concave = bool(np.all(sec <= 1e-6 * np.max(np.abs(diag_lin.S))))

    sset = scn.build_scenario_set(n_scenarios=1, sigma=0.0)
    res = optimize_bangbang(sset, scn.cfg["risk"]["beta"], scn.cfg["risk"]["alpha"],
                            SearchConfig(n_x0=9, n_tb=9, tb_range=(0.0, 0.5),
                                         pattern_steps=12))
    trace = deterministic_trace(res.policy, sset)
    T = float(trace.t[-1])
    diag_tri = service_rate(dist, net.model, net.lane_km, n_veh)
    cost = costate_trajectory(diag_tri, (trace.t, trace.active), T, net.dt)
    ok = concave and cost.zero_crossings <= 1 and abs(cost.p[-1]) <= 1e-12
    return _result(
        "costate", ok,
        service_concave_linear_nfd=concave,
        max_second_difference=float(sec.max()),
        zero_crossings=cost.zero_crossings,
        terminal_costate=float(cost.p[-1]),
        delta_star=float(diag_tri.delta_star),
        optimal_policy=(res.policy.x0, res.policy.switch_time),
        note="S'(delta) <= 0 for the headway-limited service rate, so the "
             "costate stays positive before T and (S')^{-1}(1) is undefined "
             "(delta_star = NaN)",
    )


def clearance_check(scn=None):
    """No-control clearance versus the capacity bound (diagnostic)."""
    from .scenario import Scenario

    scn = scn or Scenario.default()
    sset = scn.build_scenario_set(n_scenarios=1, sigma=0.0)
    trace = deterministic_trace(BangBangPolicy(np.inf, 0.0), sset)
    report = exit_rate_check(trace, scn.total_capacity)
    bound_h = scn.clearance_bound_h
    return _result(
        "clearance", report.clearance_time is not None and report.clearance_time < bound_h,
        clearance_min=60.0 * report.clearance_time, bound_min=60.0 * bound_h,
        reference_clearance_min=scn.cfg["reference"]["clearance_min"],
        completion_rate_flagged=report.flagged, max_completion_rate=report.max_rate,
    )


TARGETS = {
    "counterexample": lambda scn, **kw: [counterexample_check()],
    "tables": lambda scn, **kw: [optimization_benefit_check(scn, **kw)],
    "mpc-figures": lambda scn, **kw: [mpc_check(scn, **kw)[0]],
    "propositions": lambda scn, **kw: [propositions_check()],
}


def run_target(target, scn, **kw):
    if target not in TARGETS:
        raise ValueError(f"unknown reproduce target {target!r}; "
                         f"choose from {sorted(TARGETS)}")
    return TARGETS[target](scn, **kw)
