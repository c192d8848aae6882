"""Evacuation-zone geometry and trip-length distributions.

The evacuation zone is idealized as a disk with exit points on its rim.
The central object is the distribution of the minimum straight-line
distance from a (random) origin to its nearest exit, under

* the uniform density on the disk,
* an arbitrary radially symmetric density g(r)/(2*pi),
* an arbitrary 2-D density (generic quadrature path), or
* a convex mixture of the uniform and radial cases.

A rasterized dumbbell domain (two disks joined by a thin corridor) is
provided as the canonical non-convex counterexample whose exit-distance
distribution has a decreasing hazard rate.

All distances in km, angles in radians unless a ``_deg`` name says otherwise.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import IntegrationWarning, quad, trapezoid
from scipy.sparse.csgraph import dijkstra

__all__ = [
    "DiskZone",
    "DumbbellZone",
    "TripLengthDistribution",
    "IfrResult",
    "project_exit",
    "angular_gaps",
    "cap_half_angle",
    "union_angle",
    "cdf_uniform",
    "cdf_radial",
    "cdf_general",
    "build_distribution",
    "is_ifr",
    "dumbbell_distribution",
]

_TWO_PI = 2.0 * np.pi

# Hazard tabulation is cut off once the survival mass drops below this;
# the ratio f/(1-F) is numerically meaningless beyond it.
HAZARD_TRUNCATION = 1e-6


@dataclass(frozen=True)
class DiskZone:
    """Disk of given radius with exits on the rim at sorted angles."""

    radius: float
    exit_angles: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.exit_angles, dtype=float)
        if angles.ndim != 1 or angles.size < 1:
            raise ValueError("need at least one exit angle")
        if np.any(angles < 0) or np.any(angles >= _TWO_PI):
            raise ValueError("exit angles must lie in [0, 2*pi)")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("exit angles must be strictly increasing")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "exit_angles", angles)

    @classmethod
    def from_degrees(cls, radius, angles_deg):
        return cls(radius, np.sort(np.deg2rad(np.asarray(angles_deg, dtype=float))))

    @property
    def exit_coords(self):
        """(n, 2) exit coordinates R*(cos phi, sin phi)."""
        a = self.exit_angles
        return self.radius * np.column_stack([np.cos(a), np.sin(a)])

    def max_exit_distance(self):
        """Largest min-distance-to-exit over the closed disk.

        Attained either at the rim midpoint of the widest exit gap
        (chord 2R sin(gap/4)) or at the center (distance R) when all
        gaps are narrower than 2*pi/3.
        """
        if self.exit_angles.size == 1:
            return 2.0 * self.radius
        gap_max = float(np.max(angular_gaps(self.exit_angles)))
        return max(self.radius, 2.0 * self.radius * np.sin(gap_max / 4.0))


def project_exit(centroid, boundary_point, radius):
    """Project a boundary point radially onto the circle of given radius.

    The angle is taken from the centroid; the output has norm exactly
    ``radius`` by construction.
    """
    c = np.asarray(centroid, dtype=float)
    b = np.asarray(boundary_point, dtype=float)
    dx, dy = b - c
    if dx == 0.0 and dy == 0.0:
        raise ValueError("boundary point coincides with the centroid")
    theta = np.arctan2(dy, dx)
    return radius * np.array([np.cos(theta), np.sin(theta)])


def angular_gaps(angles):
    """Consecutive circular gaps of a set of angles, wrap-around included.

    Gaps are returned in consecutive order of the sorted angles; they sum
    to 2*pi. Duplicate angles raise.
    """
    a = np.sort(np.asarray(angles, dtype=float))
    if a.size < 2:
        raise ValueError("need at least two angles")
    if np.any(np.diff(a) == 0):
        raise ValueError("duplicate angles")
    gaps = np.diff(a)
    wrap = _TWO_PI - (a[-1] - a[0])
    return np.concatenate([gaps, [wrap]])


def cap_half_angle(r, d, radius):
    """Half-angle of the cap {theta : |r*e(theta) - c| <= d} around an exit c.

    r is the field-point radius, d the distance budget, ``radius`` the rim
    radius on which the exit sits. Returns 0 when the cap is empty
    (d < |radius - r|) and pi when it covers the whole circle of radius r
    (d > radius + r).
    """
    if d < 0:
        raise ValueError("distance must be non-negative")
    if r < 0 or r > radius:
        raise ValueError("field radius must lie in [0, rim radius]")
    if r == 0.0:
        return 0.0 if d < radius else np.pi
    if d < abs(radius - r):
        return 0.0
    if d > radius + r:
        return np.pi
    cos_alpha = (r * r + radius * radius - d * d) / (2.0 * r * radius)
    return float(np.arccos(np.clip(cos_alpha, -1.0, 1.0)))


def union_angle(r, d, zone):
    """Angular measure at radius r of points within distance d of some exit.

    Exact union of the per-exit cap arcs via circular interval sweep;
    reduces to 2n*alpha - sum max(0, 2*alpha - gap) when only consecutive
    caps overlap (the closed-form special case for three exits), and is
    clamped to [0, 2*pi] by construction.
    """
    alpha = cap_half_angle(r, d, zone.radius)
    if alpha == 0.0:
        return 0.0
    if alpha >= np.pi:
        return _TWO_PI
    intervals = []
    for phi in zone.exit_angles:
        lo = (phi - alpha) % _TWO_PI
        hi = lo + 2.0 * alpha
        if hi <= _TWO_PI:
            intervals.append((lo, hi))
        else:
            intervals.append((lo, _TWO_PI))
            intervals.append((0.0, hi - _TWO_PI))
    intervals.sort()
    total = 0.0
    cur_lo, cur_hi = intervals[0]
    for lo, hi in intervals[1:]:
        if lo > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    total += cur_hi - cur_lo
    return min(total, _TWO_PI)


def _radial_quad(integrand, lo, hi):
    # the integrand has kinks where cap arcs merge; QUADPACK localizes them
    # but warns about roundoff near machine-level tolerances
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(integrand, lo, hi, limit=300, epsabs=1e-11, epsrel=1e-10)
    return val


def cdf_uniform(d, zone):
    """P(min distance to an exit <= d) for a uniform origin on the disk."""
    if d <= 0.0:
        return 0.0
    R = zone.radius
    if d >= 2.0 * R:
        return 1.0
    lo = max(0.0, R - d)

    def integrand(r):
        return r * union_angle(r, d, zone) / (np.pi * R * R)

    return float(np.clip(_radial_quad(integrand, lo, R), 0.0, 1.0))


def radial_mass(g, radius):
    """Integral of g(r) r dr over [0, radius] (should be 1 for a density)."""
    val, _ = quad(lambda r: g(r) * r, 0.0, radius, limit=300, epsabs=1e-10)
    return val


def cdf_radial(d, zone, g, check=True):
    """Exit-distance CDF for a radially symmetric origin density g(r)/(2*pi).

    ``g`` is a callable with normalization int_0^R g(r) r dr = 1 (checked
    to 1e-4 unless ``check=False``).
    """
    R = zone.radius
    if check:
        mass = radial_mass(g, R)
        if abs(mass - 1.0) > 1e-4:
            raise ValueError(f"radial density not normalized: int g r dr = {mass:.6f}")
    if d <= 0.0:
        return 0.0
    if d >= 2.0 * R:
        return 1.0
    lo = max(0.0, R - d)

    def integrand(r):
        return g(r) * r * union_angle(r, d, zone) / _TWO_PI

    return float(np.clip(_radial_quad(integrand, lo, R), 0.0, 1.0))


def _disk_grid(radius, n_r, n_theta):
    nodes, wts = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (nodes + 1.0)
    wr = 0.5 * radius * wts
    theta = (np.arange(n_theta) + 0.5) * _TWO_PI / n_theta
    dtheta = _TWO_PI / n_theta
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    ww = (wr * r)[:, None] * np.full(n_theta, dtheta)[None, :]
    return rr, tt, ww


class FieldDistanceTable:
    """Precomputed quadrature table for CDFs under an arbitrary 2-D density.

    Disk quadrature nodes are sorted by their min distance to an exit, so
    F(d) is a cumulative-weight lookup: O(n log n) once, O(log n) per query.
    """

    def __init__(self, zone, density, n_r=256, n_theta=512, check=True):
        rr, tt, ww = _disk_grid(zone.radius, n_r, n_theta)
        x = rr * np.cos(tt)
        y = rr * np.sin(tt)
        rho = np.asarray(density(x, y), dtype=float)
        mass = float(np.sum(rho * ww))
        if check and abs(mass - 1.0) > 1e-3:
            raise ValueError(f"2-D density not normalized on the disk: mass = {mass:.6f}")
        dist = np.full(x.shape, np.inf)
        for cx, cy in zone.exit_coords:
            dist = np.minimum(dist, np.hypot(x - cx, y - cy))
        order = np.argsort(dist, axis=None)
        self.dist_sorted = dist.ravel()[order]
        self.cum_weight = np.cumsum((rho * ww).ravel()[order]) / mass

    def cdf(self, d):
        idx = np.searchsorted(self.dist_sorted, d, side="right")
        vals = np.where(idx > 0, self.cum_weight[np.maximum(idx - 1, 0)], 0.0)
        return np.clip(vals, 0.0, 1.0)


def cdf_general(d, zone, density, n_r=256, n_theta=512, check=True):
    """Exit-distance CDF for an arbitrary 2-D density on the disk.

    ``density`` is evaluated at Cartesian (x, y); it must integrate to 1
    over the disk within 1e-3 on the quadrature grid used here (disable
    with ``check=False``). Fixed tensor-product quadrature: Gauss-Legendre
    in r, midpoint in theta; build a :class:`FieldDistanceTable` directly
    when many d values are needed.
    """
    table = FieldDistanceTable(zone, density, n_r=n_r, n_theta=n_theta, check=check)
    return float(table.cdf(d))


@dataclass(frozen=True)
class TripLengthDistribution:
    """Tabulated exit-distance distribution: grid d, CDF F, density f, hazard h.

    ``h`` is NaN where the survival mass 1-F has dropped below
    ``HAZARD_TRUNCATION``. ``lam_mix`` records the uniform-vs-risk mixture
    weight the table was built with (1.0 for non-mixture tables).
    """

    d: np.ndarray
    F: np.ndarray
    f: np.ndarray
    h: np.ndarray = field(default=None)
    lam_mix: float = 1.0

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        F = np.asarray(self.F, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if np.any(np.diff(d) <= 0):
            raise ValueError("distance grid must be strictly increasing")
        if np.any(np.diff(F) < -1e-9):
            raise ValueError("CDF must be non-decreasing")
        if abs(F[0]) > 1e-6 or abs(F[-1] - 1.0) > 1e-6:
            raise ValueError(f"CDF must run from 0 to 1, got [{F[0]:.2e}, {F[-1]:.8f}]")
        if np.any(f < -1e-12):
            raise ValueError("density must be non-negative")
        mass = trapezoid(f, d)
        if abs(mass - 1.0) > 1e-4:
            raise ValueError(f"density does not integrate to 1: {mass:.6f}")
        h = self.h
        if h is None:
            h = hazard_from_table(F, f)
        if not (0.0 <= self.lam_mix <= 1.0):
            raise ValueError("lam_mix must lie in [0, 1]")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "f", np.clip(f, 0.0, None))
        object.__setattr__(self, "h", np.asarray(h, dtype=float))

    @property
    def support(self):
        return float(self.d[0]), float(self.d[-1])

    def cdf(self, x):
        return np.interp(x, self.d, self.F, left=0.0, right=1.0)

    def pdf(self, x):
        return np.interp(x, self.d, self.f, left=0.0, right=0.0)

    def hazard(self, x):
        return np.interp(x, self.d, self.h)

    def to_csv(self, path, metadata=None):
        """Write columns d, F, f, h; optional '# key=value' header lines."""
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["d_km", "F", "f", "h"])
            for row in zip(self.d, self.F, self.f, self.h):
                writer.writerow([f"{v:.10g}" for v in row])


def hazard_from_table(F, f):
    """h = f/(1-F), NaN once 1-F < HAZARD_TRUNCATION."""
    surv = 1.0 - np.asarray(F, dtype=float)
    h = np.full(surv.shape, np.nan)
    ok = surv >= HAZARD_TRUNCATION
    h[ok] = np.asarray(f)[ok] / surv[ok]
    return h


def _central_differences(F, d):
    f = np.empty_like(F)
    f[1:-1] = (F[2:] - F[:-2]) / (d[2:] - d[:-2])
    f[0] = (F[1] - F[0]) / (d[1] - d[0])
    f[-1] = (F[-1] - F[-2]) / (d[-1] - d[-2])
    return np.clip(f, 0.0, None)


def build_distribution(zone, lam_mix=1.0, g=None, field=None, grid=None, n_grid=400):
    """Tabulate the mixture exit-distance distribution on a grid.

    F(d) = lam_mix * F_uniform(d) + (1 - lam_mix) * F_risk(d); the risk part
    comes from either a radially symmetric profile ``g`` (1-D union-angle
    quadrature) or a general 2-D ``field`` callable (disk quadrature table).
    The density is recovered by central finite differences of the tabulated
    CDF and the hazard as f/(1-F) with tail truncation.
    """
    if not (0.0 <= lam_mix <= 1.0):
        raise ValueError("lam_mix must lie in [0, 1]")
    if lam_mix < 1.0 and g is None and field is None:
        raise ValueError("a risk density (radial g or 2-D field) is required when lam_mix < 1")
    if g is not None and field is not None:
        raise ValueError("pass either a radial g or a 2-D field, not both")
    d_max = zone.max_exit_distance()
    if grid is None:
        grid = np.linspace(0.0, d_max, n_grid)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] > 1e-9 or grid[-1] < d_max - 1e-9:
        raise ValueError(
            f"grid must span [0, {d_max:.6f}] (max min-distance over the disk)"
        )
    if g is not None:
        mass = radial_mass(g, zone.radius)
        if abs(mass - 1.0) > 1e-4:
            raise ValueError(f"radial density not normalized: int g r dr = {mass:.6f}")

    F = np.zeros_like(grid)
    if lam_mix > 0.0 or g is not None:
        for i, d in enumerate(grid):
            fu = cdf_uniform(d, zone) if lam_mix > 0.0 else 0.0
            fr = cdf_radial(d, zone, g, check=False) if (lam_mix < 1.0 and g is not None) else 0.0
            F[i] = lam_mix * fu + (1.0 - lam_mix) * fr
    if lam_mix < 1.0 and field is not None:
        table = FieldDistanceTable(zone, field)
        F += (1.0 - lam_mix) * table.cdf(grid)
    jumps = np.diff(F)
    if np.any(jumps > 0.05):
        k = int(np.argmax(jumps > 0.05))
        raise ValueError(
            f"CDF jumps by {jumps[k]:.3f} between grid nodes {k} and {k + 1}; "
            "refine the distance grid"
        )
    F = np.clip(F, 0.0, 1.0)
    F[0] = 0.0
    f = _central_differences(F, grid)
    return TripLengthDistribution(grid, F, f, hazard_from_table(F, f), lam_mix)


@dataclass(frozen=True)
class IfrResult:
    """Outcome of the increasing-failure-rate check."""

    is_ifr: bool
    violation_index: int | None = None
    violation_distance: float | None = None

    def __bool__(self):
        return self.is_ifr


def is_ifr(dist, tol=1e-3):
    """Check the tabulated hazard for monotone non-decrease.

    Relative dips up to ``tol`` (against the running maximum) are treated
    as numerical noise; NaN (truncated) entries are ignored. On failure
    the first violating grid index and distance are reported.
    """
    h = dist.h
    d = dist.d
    run_max = -np.inf
    for i in range(h.size):
        if not np.isfinite(h[i]):
            continue
        if h[i] < run_max * (1.0 - tol) - 1e-15:
            return IfrResult(False, i, float(d[i]))
        run_max = max(run_max, h[i])
    return IfrResult(True)


@dataclass(frozen=True)
class DumbbellZone:
    """Two disks joined by a thin corridor; the canonical non-convex domain.

    The corridor spans the segment between the two centers with the given
    half-width; the exit sits at the left center (so iso-distance curves
    are full circles until they touch the left disk's rim).
    """

    center_left: tuple = (-3.0, 0.0)
    center_right: tuple = (3.0, 0.0)
    disk_radius: float = 1.0
    corridor_half_width: float = 0.1
    exit_point: tuple = (-3.0, 0.0)

    def contains(self, x, y):
        lx, ly = self.center_left
        rx, ry = self.center_right
        in_left = (x - lx) ** 2 + (y - ly) ** 2 <= self.disk_radius**2
        in_right = (x - rx) ** 2 + (y - ry) ** 2 <= self.disk_radius**2
        in_corr = (
            (np.minimum(lx, rx) <= x)
            & (x <= np.maximum(lx, rx))
            & (np.abs(y - 0.5 * (ly + ry)) <= self.corridor_half_width)
        )
        return in_left | in_right | in_corr


def _dumbbell_geodesics(zone, resolution):
    """Geodesic distance from the exit to every raster cell (8-connected)."""
    if resolution > zone.corridor_half_width / 4.0 + 1e-12:
        raise ValueError("raster resolution must be <= corridor half-width / 4")
    pad = zone.disk_radius + 2.0 * resolution
    x_lo = min(zone.center_left[0], zone.center_right[0]) - pad
    x_hi = max(zone.center_left[0], zone.center_right[0]) + pad
    y_lo = min(zone.center_left[1], zone.center_right[1]) - pad
    y_hi = max(zone.center_left[1], zone.center_right[1]) + pad
    kx = np.arange(int(np.floor(x_lo / resolution)), int(np.ceil(x_hi / resolution)) + 1)
    ky = np.arange(int(np.floor(y_lo / resolution)), int(np.ceil(y_hi / resolution)) + 1)
    xs = kx * resolution
    ys = ky * resolution
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside = zone.contains(X, Y)
    nx, ny = inside.shape

    idx = -np.ones(inside.shape, dtype=np.int64)
    idx[inside] = np.arange(int(inside.sum()))
    rows, cols, wts = [], [], []
    shifts = [(1, 0, 1.0), (0, 1, 1.0), (1, 1, np.sqrt(2.0)), (1, -1, np.sqrt(2.0))]
    for dx, dy, w in shifts:
        src = np.zeros_like(inside)
        dst = np.zeros_like(inside)
        sl_src = (slice(max(0, -dx), nx - max(0, dx)), slice(max(0, -dy), ny - max(0, dy)))
        sl_dst = (slice(max(0, dx), nx - max(0, -dx)), slice(max(0, dy), ny - max(0, -dy)))
        src[sl_src] = inside[sl_src] & inside[sl_dst]
        dst[sl_dst] = src[sl_src]
        rows.append(idx[src])
        cols.append(idx[dst])
        wts.append(np.full(int(src.sum()), w * resolution))
    n = int(inside.sum())
    graph = sparse.csr_matrix(
        (np.concatenate(wts), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )

    ex, ey = zone.exit_point
    cells_x, cells_y = X[inside], Y[inside]
    source = int(np.argmin((cells_x - ex) ** 2 + (cells_y - ey) ** 2))
    dist = dijkstra(graph, directed=False, indices=source)
    if np.any(~np.isfinite(dist)):
        raise ValueError("raster is disconnected; refine the resolution")
    return dist, cells_x, cells_y


def dumbbell_distribution(zone, resolution=0.02, bin_width=0.05):
    """Exit-distance distribution on the dumbbell via rasterized geodesics.

    Internal (shortest-path) distances are computed on an 8-connected grid
    with Euclidean edge weights; the distribution is the cell-area-weighted
    histogram of those distances.
    """
    dist, _, _ = _dumbbell_geodesics(zone, resolution)
    d_max = float(dist.max())
    edges = np.arange(0.0, d_max + bin_width, bin_width)
    if edges[-1] < d_max:
        edges = np.append(edges, d_max)
    counts, edges = np.histogram(dist, bins=edges)
    F = np.concatenate([[0.0], np.cumsum(counts)]) / dist.size
    F[-1] = 1.0
    f = _central_differences(F, edges)
    return TripLengthDistribution(edges, F, f, hazard_from_table(F, f), 1.0)
