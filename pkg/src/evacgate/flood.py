"""Dam-break surge front on a sloped dry bed and the derived spatial risk field.

A surge of still-water depth H0 enters at the eastern rim (x = +R) of the
disk and propagates westward over a uniform ground slope s = z_max / (2R).
Hydraulics are computed in SI units (m, s); the zone geometry upstream uses
km, so constructors convert at the module boundary.

Two first-arrival-time evaluations are provided: the closed-form expression
and numerical inversion of the front-position curve. They do NOT agree (the
closed form is not the inverse of the stated front position); inversion is
the default because it is self-consistent with ``front_position``. The
published headline figures for the Amager case (7.48 h flooding duration,
68.2% flooded ratio) are not reproducible from these formulas either; the
CLI reports computed values next to the reference ones.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

__all__ = [
    "SurgeParams",
    "RiskField",
    "front_position",
    "arrival_time",
    "flooded_ratio",
    "full_inundation_time",
    "build_risk_field",
]

GRAVITY = 9.81  # m/s^2


@dataclass(frozen=True)
class SurgeParams:
    """Surge and terrain parameters in SI units."""

    depth: float  # still-water depth H0, m
    z_max: float  # ridge elevation at the western rim, m
    radius_m: float  # disk radius, m
    gravity: float = GRAVITY

    def __post_init__(self):
        if self.depth <= 0 or self.z_max <= 0 or self.radius_m <= 0:
            raise ValueError("depth, z_max and radius must be positive")

    @classmethod
    def from_km(cls, radius_km, depth=3.0, z_max=10.0):
        return cls(depth=float(depth), z_max=float(z_max), radius_m=1000.0 * radius_km)

    @property
    def slope(self):
        """Dimensionless ground slope s = z_max / (2R)."""
        return self.z_max / (2.0 * self.radius_m)

    @property
    def celerity(self):
        """sqrt(g * H0), m/s."""
        return np.sqrt(self.gravity * self.depth)


def front_position(t, p):
    """Surge front x_f(t) in metres; x_f(0) = R, strictly decreasing in t."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    c = p.celerity
    a = 2.0 * p.slope * p.gravity / c
    x = p.radius_m - c * t * (np.sqrt(1.0 + a * t) - 1.0)
    return x if x.ndim else float(x)


def elevation(x, p):
    """Bed elevation z(x) = s (R - x), m."""
    return p.slope * (p.radius_m - np.asarray(x, dtype=float))


def _arrival_closed_form(x, p):
    c = p.celerity
    b = 2.0 * p.slope * p.gravity / (p.gravity * p.depth)
    y = p.radius_m - np.asarray(x, dtype=float)
    t = (y / c) * (np.sqrt(1.0 + b * y) - 1.0)
    return np.maximum(0.0, t)


def _arrival_inverted_scalar(x, p, rtol=1e-6):
    if x >= p.radius_m:
        return 0.0
    t_hi = 1.0
    while front_position(t_hi, p) > x:
        t_hi *= 2.0
    return brentq(lambda t: front_position(t, p) - x, 0.0, t_hi, rtol=rtol)


def arrival_time(x, p, mode="inverted"):
    """First-arrival time t_f(x) in seconds for -R <= x <= R.

    ``mode='inverted'`` solves front_position(t) = x by bisection (default,
    self-consistent); ``mode='closed_form'`` evaluates the closed-form
    expression. Both return 0 at the shoreline x = R.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < -p.radius_m - 1e-9) or np.any(x_arr > p.radius_m + 1e-9):
        raise ValueError("x must lie within [-R, R]")
    if mode == "closed_form":
        t = _arrival_closed_form(x_arr, p)
    elif mode == "inverted":
        t = np.vectorize(lambda xi: _arrival_inverted_scalar(xi, p))(x_arr)
    else:
        raise ValueError(f"unknown arrival-time mode {mode!r}")
    t = np.asarray(t, dtype=float)
    return t if t.ndim else float(t)


def full_inundation_time(p, mode="inverted"):
    """Time for the front to reach the western rim x = -R, seconds."""
    return arrival_time(-p.radius_m, p, mode=mode)


def flooded_ratio(t, p):
    """Fraction of disk area east of the front, by the circular-segment formula."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be non-negative")
    x0 = np.clip(front_position(t_arr, p), -p.radius_m, p.radius_m)
    k = x0 / p.radius_m
    frac = (np.arccos(k) - k * np.sqrt(np.clip(1.0 - k * k, 0.0, None))) / np.pi
    return frac if frac.ndim else float(frac)


@dataclass(frozen=True)
class RiskField:
    """Normalized static risk weights over the disk on a polar grid.

    Weights are proportional to 1 / max(t_f, eps_t) and integrate to 1 over
    the disk in km^2. ``g_table`` is the angular-averaged radial profile with
    normalization int g(r) r dr = 1, usable directly by
    :func:`evacgate.geometry.cdf_radial`.
    """

    r_km: np.ndarray  # (n_r,) radii of grid nodes, km
    theta: np.ndarray  # (n_theta,) angles
    weights: np.ndarray  # (n_r, n_theta) density values, 1/km^2
    quad_w: np.ndarray  # (n_r, n_theta) quadrature weights, km^2
    g_r: np.ndarray  # uniform radial grid for the angular-averaged profile
    g_table: np.ndarray  # g values on g_r, int g(r) r dr = 1
    x_m: np.ndarray  # arrival-time table abscissae (m)
    tf_s: np.ndarray  # arrival times on x_m (s)
    norm: float  # normalization of 1/max(t_f, eps_t) over the disk, km^2/s
    eps_t: float
    arrival_mode: str

    def total_mass(self):
        return float(np.sum(self.weights * self.quad_w))

    def density(self):
        """Normalized 2-D weight as a callable of (x_km, y_km), 1/km^2.

        The field depends on x only (the surge sweeps east to west); it is
        NOT radially symmetric, which is why the angular-averaged profile
        ``g`` is an approximation while this callable is the field itself.
        """
        x_m, tf_s, eps, z = self.x_m, self.tf_s, self.eps_t, self.norm

        def rho(x_km, y_km):
            tf = np.interp(np.asarray(x_km, dtype=float) * 1000.0, x_m, tf_s)
            return 1.0 / np.maximum(tf, eps) / z

        return rho

    def radial_profile(self):
        """Interpolating callable g(r) for the radial reduction."""
        r, g = self.g_r, self.g_table

        def g_fn(rr):
            return np.interp(rr, r, g)

        return g_fn

    def to_csv(self, path, metadata=None):
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["x_km", "y_km", "weight_per_km2"])
            for i, r in enumerate(self.r_km):
                for j, th in enumerate(self.theta):
                    writer.writerow(
                        [f"{r * np.cos(th):.8g}", f"{r * np.sin(th):.8g}",
                         f"{self.weights[i, j]:.10g}"]
                    )

    def radial_profile_to_csv(self, path, metadata=None):
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["r_km", "g"])
            for r, g in zip(self.g_r, self.g_table):
                writer.writerow([f"{r:.8g}", f"{g:.10g}"])


def build_risk_field(p, radius_km, n_r=128, n_theta=256, eps_t=60.0,
                     arrival_mode="inverted"):
    """Build the normalized reciprocal-arrival-time risk field.

    Arrival times are floored at ``eps_t`` seconds (the shoreline has
    t_f = 0 and 1/t_f would not be integrable). Arrival times are
    evaluated on a fine 1-D x grid and interpolated onto the polar grid;
    t_f depends on x only.
    """
    if eps_t <= 0:
        raise ValueError("eps_t must be positive")
    nodes, wts = np.polynomial.legendre.leggauss(n_r)
    r_km = 0.5 * radius_km * (nodes + 1.0)
    wr = 0.5 * radius_km * wts
    theta = (np.arange(n_theta) + 0.5) * 2.0 * np.pi / n_theta
    dtheta = 2.0 * np.pi / n_theta

    x_grid = np.linspace(-p.radius_m, p.radius_m, 2001)
    t_grid = arrival_time(x_grid, p, mode=arrival_mode)

    x_km = r_km[:, None] * np.cos(theta)[None, :]
    t_f = np.interp(x_km * 1000.0, x_grid, t_grid)
    raw = 1.0 / np.maximum(t_f, eps_t)
    quad_w = (wr * r_km)[:, None] * np.full(n_theta, dtheta)[None, :]
    z = float(np.sum(raw * quad_w))
    weights = raw / z
    # angular-averaged radial profile on a uniform endpoint-inclusive grid,
    # so downstream trapezoid/interp integration reproduces unit mass
    g_r = np.linspace(0.0, radius_km, 8 * n_r + 1)
    xa = g_r[:, None] * np.cos(theta)[None, :]
    ta = np.interp(xa * 1000.0, x_grid, t_grid)
    g_table = (1.0 / np.maximum(ta, eps_t)).sum(axis=1) * dtheta / z
    g_table /= trapezoid(g_table * g_r, g_r)
    return RiskField(r_km, theta, weights, quad_w, g_r, g_table,
                     x_grid, t_grid, z, eps_t, arrival_mode)
