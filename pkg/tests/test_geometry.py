import numpy as np
import pytest

from evacgate.geometry import (
    DiskZone,
    DumbbellZone,
    FieldDistanceTable,
    TripLengthDistribution,
    angular_gaps,
    build_distribution,
    cap_half_angle,
    cdf_general,
    cdf_radial,
    cdf_uniform,
    dumbbell_distribution,
    is_ifr,
    project_exit,
    union_angle,
)

R = 5.54


@pytest.fixture(scope="module")
def zone():
    return DiskZone.from_degrees(R, [92.9, 145.3, 194.3])


def sample_disk(n, rng, radius=R):
    r = radius * np.sqrt(rng.random(n))
    th = 2.0 * np.pi * rng.random(n)
    return r * np.cos(th), r * np.sin(th)


def min_exit_distance(x, y, zone):
    d = np.full(np.shape(x), np.inf)
    for cx, cy in zone.exit_coords:
        d = np.minimum(d, np.hypot(x - cx, y - cy))
    return d


# ------------------------------------------------------------- projection
def test_project_exit_axis_aligned():
    out = project_exit((0.0, 0.0), (0.0, 2.0), R)
    assert out == pytest.approx([0.0, R])


def test_project_exit_published_point_consistency():
    # the published Knippelsbro projection should be (nearly) a fixed point
    out = project_exit((0.0, 0.0), (-0.281, 5.533), R)
    assert np.hypot(*out) == pytest.approx(R, abs=1e-12)
    assert np.degrees(np.arctan2(out[1], out[0])) == pytest.approx(92.9, abs=0.1)
    assert np.hypot(-0.281, 5.533) == pytest.approx(R, abs=0.005)


def test_project_exit_norm_invariant_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.normal(size=2) * 10.0
        if np.allclose(p, 0.0):
            continue
        assert np.hypot(*project_exit((0.0, 0.0), p, R)) == pytest.approx(R, abs=1e-12)


def test_project_exit_coincident_error():
    with pytest.raises(ValueError):
        project_exit((1.0, 1.0), (1.0, 1.0), R)


# ------------------------------------------------------------- angular gaps
def test_angular_gaps_published_values():
    gaps = angular_gaps(np.deg2rad([92.9, 145.3, 194.3]))
    assert gaps == pytest.approx([0.914, 0.855, 4.516], rel=2e-3)
    assert gaps.sum() == pytest.approx(2.0 * np.pi, abs=1e-12)


def test_angular_gaps_antipodal_and_square():
    assert angular_gaps(np.deg2rad([0.0, 180.0])) == pytest.approx([np.pi, np.pi])
    assert angular_gaps(np.deg2rad([0.0, 90.0, 180.0, 270.0])) == pytest.approx([np.pi / 2] * 4)


def test_angular_gaps_errors():
    with pytest.raises(ValueError):
        angular_gaps([0.3])
    with pytest.raises(ValueError):
        angular_gaps([0.3, 0.3, 1.0])


# ------------------------------------------------------------- cap half angle
def test_cap_half_angle_trivial_cases():
    assert cap_half_angle(R, 0.0, R) == 0.0
    assert cap_half_angle(R, 2.0 * R, R) == pytest.approx(np.pi)
    assert cap_half_angle(3.0, 1.0, R) == 0.0  # d < R - r
    assert cap_half_angle(0.0, 1.0, R) == 0.0
    assert cap_half_angle(0.0, R + 1.0, R) == pytest.approx(np.pi)


def test_cap_half_angle_direct_value_and_monte_carlo():
    # direct evaluation: arccos((9 + 30.6916 - 16) / 33.24) = arccos(0.712744)
    alpha = cap_half_angle(3.0, 4.0, R)
    assert alpha == pytest.approx(np.arccos((9.0 + R * R - 16.0) / (2.0 * 3.0 * R)), abs=1e-15)
    assert alpha == pytest.approx(0.777394, abs=1e-6)
    # Monte Carlo: fraction of the circle of radius 3 within distance 4 of a rim point
    rng = np.random.default_rng(7)
    th = rng.random(400_000) * 2.0 * np.pi
    px, py = 3.0 * np.cos(th), 3.0 * np.sin(th)
    frac = np.mean(np.hypot(px - R, py) <= 4.0)
    assert 2.0 * alpha / (2.0 * np.pi) == pytest.approx(frac, rel=5e-3)


# ------------------------------------------------------------- union angle
def test_union_angle_trivial(zone):
    assert union_angle(4.0, 0.5, zone) == 0.0  # d < R - r
    assert union_angle(5.0, 2.0 * R, zone) == pytest.approx(2.0 * np.pi)


def test_union_angle_monte_carlo_oracle(zone):
    rng = np.random.default_rng(11)
    th = rng.random(1_000_000) * 2.0 * np.pi
    for r, d in ((5.0, 1.0), (4.5, 2.5), (5.3, 6.0)):
        px, py = r * np.cos(th), r * np.sin(th)
        frac = np.mean(min_exit_distance(px, py, zone) <= d)
        assert union_angle(r, d, zone) == pytest.approx(frac * 2.0 * np.pi, rel=5e-3, abs=1e-4)


def test_union_angle_monotone_in_d(zone):
    for r in (3.0, 5.0, 5.5):
        vals = [union_angle(r, d, zone) for d in np.linspace(0.0, 2 * R, 60)]
        assert np.all(np.diff(vals) >= -1e-12)
        assert max(vals) <= 2.0 * np.pi + 1e-12


# ------------------------------------------------------------- cdf uniform
def test_cdf_uniform_bounds(zone):
    assert cdf_uniform(0.0, zone) == 0.0
    assert cdf_uniform(2.0 * R, zone) == 1.0
    assert cdf_uniform(zone.max_exit_distance(), zone) == pytest.approx(1.0, abs=1e-9)


def test_cdf_uniform_small_d_quadratic(zone):
    # exact small-cap coefficient: three half-disks, F ~ 3 d^2 / (2 R^2)
    for d in (0.05, 0.1):
        assert cdf_uniform(d, zone) == pytest.approx(3.0 * d * d / (2.0 * R * R), rel=0.05)


def test_cdf_uniform_monte_carlo_spot_checks(zone):
    rng = np.random.default_rng(3)
    x, y = sample_disk(400_000, rng)
    dmin = min_exit_distance(x, y, zone)
    for d in (1.0, 3.0, 5.0, 8.0):
        assert cdf_uniform(d, zone) == pytest.approx(float((dmin <= d).mean()), abs=3e-3)


# ------------------------------------------------------------- cdf radial
def test_cdf_radial_uniform_reduction(zone):
    g_uniform = lambda r: 2.0 / (R * R)
    for d in (0.5, 2.0, 5.0, 9.0):
        assert cdf_radial(d, zone, g_uniform) == pytest.approx(cdf_uniform(d, zone), abs=1e-6)


def rim_arc_fraction(d, zone):
    """Independent oracle: fraction of the rim within chord distance d of an
    exit (union of arcs of half-width 2*arcsin(d/2R))."""
    half = 2.0 * np.arcsin(min(d / (2.0 * R), 1.0))
    events = []
    for phi in zone.exit_angles:
        lo = (phi - half) % (2.0 * np.pi)
        hi = lo + 2.0 * half
        if hi <= 2.0 * np.pi:
            events.append((lo, hi))
        else:
            events.extend([(lo, 2.0 * np.pi), (0.0, hi - 2.0 * np.pi)])
    events.sort()
    total, cur_lo, cur_hi = 0.0, *events[0]
    for lo, hi in events[1:]:
        if lo > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    total += cur_hi - cur_lo
    return total / (2.0 * np.pi)


def test_cdf_radial_annulus_ring(zone):
    # mass concentrated in a thin smooth ring near the rim
    w = 0.08
    raw = lambda r: np.exp(-0.5 * ((R - r) / w) ** 2)
    rr = np.linspace(0.0, R, 20001)
    norm = np.trapezoid(raw(rr) * rr, rr) if hasattr(np, "trapezoid") else np.trapz(raw(rr) * rr, rr)
    g = lambda r: raw(r) / norm
    dens2d = lambda x, y: g(np.hypot(x, y)) / (2.0 * np.pi)
    for d in (1.0, 3.0, 6.0):
        val = cdf_radial(d, zone, g)
        # dual route: the same density through the 2-D quadrature table
        assert val == pytest.approx(cdf_general(d, zone, dens2d, n_r=512), abs=2e-3)
        # ring limit: approaches the rim-arc fraction as the ring thins
        assert val == pytest.approx(rim_arc_fraction(d, zone), abs=0.05)


def test_cdf_radial_unnormalized_rejected(zone):
    with pytest.raises(ValueError, match="not normalized"):
        cdf_radial(1.0, zone, lambda r: 1.0)


# ------------------------------------------------------------- cdf general
def test_cdf_general_uniform_consistency(zone):
    dens = lambda x, y: np.full(np.shape(x), 1.0 / (np.pi * R * R))
    for d in (1.0, 4.0, 7.0):
        assert cdf_general(d, zone, dens) == pytest.approx(cdf_uniform(d, zone), abs=1e-3)


def test_cdf_general_point_mass_step(zone):
    # tight bump just inside the first exit: the CDF steps up near d ~ 0.55
    cx, cy = 0.9 * zone.exit_coords[0]
    sig = 0.12
    dens = lambda x, y: np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sig**2)) / (2 * np.pi * sig**2)
    table = FieldDistanceTable(zone, dens, n_r=512)
    assert table.cdf(0.1) < 0.01
    assert table.cdf(1.2) > 0.99


def test_cdf_general_mixture_linearity(zone, amager):
    risk = amager.build_risk_field().density()
    uni = lambda x, y: np.full(np.shape(x), 1.0 / (np.pi * R * R))
    lam = 2.0 / 3.0
    mix = lambda x, y: lam * uni(x, y) + (1.0 - lam) * risk(x, y)
    for d in (1.0, 3.0, 6.0):
        combo = lam * cdf_general(d, zone, uni) + (1.0 - lam) * cdf_general(d, zone, risk)
        assert cdf_general(d, zone, mix) == pytest.approx(combo, abs=1e-6)


def test_cdf_general_unnormalized_rejected(zone):
    with pytest.raises(ValueError, match="not normalized"):
        cdf_general(1.0, zone, lambda x, y: np.full(np.shape(x), 1.0))


# ------------------------------------------------------------- distributions
def test_build_distribution_invariants(disk_dist):
    d = disk_dist
    assert d.F[0] == 0.0
    assert d.F[-1] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(d.F) >= -1e-9)
    assert np.all(d.f >= 0.0)
    from scipy.integrate import trapezoid
    assert trapezoid(d.f, d.d) == pytest.approx(1.0, abs=1e-4)
    surv = 1.0 - d.F
    ok = surv >= 1e-6
    assert np.allclose(d.h[ok], d.f[ok] / surv[ok], rtol=1e-12, equal_nan=True)


def test_single_exit_matches_lens_formula():
    zone1 = DiskZone(R, np.array([np.pi / 2]))
    dist = build_distribution(zone1, n_grid=200)

    # independent closed form via the standard two-circle lens area
    def lens_area(d):
        if d <= 0.0:
            return 0.0
        if d >= 2.0 * R:
            return np.pi * R * R
        D = R
        t1 = d * d * np.arccos((D * D + d * d - R * R) / (2 * D * d))
        t2 = R * R * np.arccos((D * D + R * R - d * d) / (2 * D * R))
        t3 = 0.5 * np.sqrt((-D + d + R) * (D + d - R) * (D - d + R) * (D + d + R))
        return t1 + t2 - t3

    # compare at the table's own nodes (interpolation between nodes is the
    # caller's affair); quadrature, lens formula and mpmath agree to 1e-15
    for i in range(5, 200, 25):
        d = dist.d[i]
        assert dist.F[i] == pytest.approx(lens_area(d) / (np.pi * R * R), abs=1e-8)


def test_mixture_is_exact_convex_combination(zone, amager):
    risk_field = amager.build_risk_field().density()
    lam = 1.0 / 3.0
    d_mix = build_distribution(zone, lam_mix=lam, field=risk_field, n_grid=150)
    d_uni = build_distribution(zone, lam_mix=1.0, n_grid=150)
    d_risk = build_distribution(zone, lam_mix=0.0, field=risk_field, n_grid=150)
    combo = lam * d_uni.F + (1.0 - lam) * d_risk.F
    assert np.allclose(d_mix.F, combo, atol=1e-9)


def test_build_distribution_grid_errors(zone):
    with pytest.raises(ValueError, match="span"):
        build_distribution(zone, grid=np.linspace(0.0, 5.0, 100))
    with pytest.raises(ValueError, match="refine"):
        build_distribution(zone, grid=np.linspace(0.0, zone.max_exit_distance(), 12))


def test_max_exit_distance_oracle(zone):
    # dense sampling oracle for the support end
    rng = np.random.default_rng(5)
    x, y = sample_disk(2_000_000, rng)
    d_emp = min_exit_distance(x, y, zone).max()
    assert zone.max_exit_distance() == pytest.approx(d_emp, abs=0.02)
    # single exit: farthest point is the antipode
    z1 = DiskZone(2.0, np.array([0.0]))
    assert z1.max_exit_distance() == pytest.approx(4.0)
    # many evenly spread exits: the center wins (distance R)
    z6 = DiskZone.from_degrees(2.0, np.arange(0, 360, 60))
    assert z6.max_exit_distance() == pytest.approx(2.0)


# ------------------------------------------------------------- IFR checks
def test_is_ifr_constant_hazard_true():
    # exponential tail: hazard is identically 1 until tail truncation
    d = np.linspace(0.0, 14.0, 500)
    F = 1.0 - np.exp(-d)
    f = np.exp(-d)
    dist = TripLengthDistribution(d, F, f)
    assert is_ifr(dist).is_ifr
    finite = np.isfinite(dist.h)
    assert np.allclose(dist.h[finite], 1.0, rtol=1e-9)


def test_is_ifr_detects_decrease():
    d = np.linspace(0.0, 1.0, 400)
    # hazard 2 + sin(2 pi d): rises to d = 1/4, then dips below the running max
    h = 2.0 + np.sin(2.0 * np.pi * d)
    H = np.concatenate([[0.0], np.cumsum(0.5 * (h[1:] + h[:-1]) * np.diff(d))])
    surv = np.exp(-H)
    F = (1.0 - surv) / (1.0 - surv[-1])
    f = h * surv / (1.0 - surv[-1])
    dist = TripLengthDistribution(d, F, f)
    res = is_ifr(dist)
    assert not res.is_ifr
    assert 0.25 < res.violation_distance < 0.6


def test_dumbbell_distribution_properties():
    zone = DumbbellZone()
    dist = dumbbell_distribution(zone, resolution=0.025)
    res = is_ifr(dist)
    assert not res.is_ifr
    assert 1.0 < res.violation_distance < 5.0
    # density collapses when the level set enters the corridor
    assert dist.pdf(0.9) / dist.pdf(1.5) > 5.0


def test_dumbbell_geodesics():
    from evacgate.geometry import _dumbbell_geodesics

    zone = DumbbellZone()
    dist, cx, cy = _dumbbell_geodesics(zone, 0.025)
    at_exit = np.argmin((cx + 3.0) ** 2 + cy**2)
    assert dist[at_exit] == 0.0
    at_right = np.argmin((cx - 3.0) ** 2 + cy**2)
    assert dist[at_right] == pytest.approx(6.0, rel=0.02)


def test_dumbbell_resolution_guard():
    with pytest.raises(ValueError, match="resolution"):
        dumbbell_distribution(DumbbellZone(), resolution=0.05)


def test_dumbbell_disconnected_raster():
    # offset right disk: the horizontal corridor band misses both disks
    zone = DumbbellZone(center_left=(-3.0, 0.0), center_right=(3.0, 5.0),
                        corridor_half_width=0.1)
    with pytest.raises(ValueError, match="disconnected"):
        dumbbell_distribution(zone, resolution=0.025)
