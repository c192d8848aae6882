"""Network fundamental diagram: speed-density and flow-density relationships.

Units are fixed repository-wide: distance km, time h, density veh/km/lane,
flow veh/h/lane. Three curve families are supported:

* ``triangular``  V = v_f below the critical density, congested branch
  V = w (rho_j - rho) / rho above it (highway-style NFD),
* ``trapezoidal`` free-flow / capacity plateau / congested branch
  (urban-style NFD),
* ``linear``      Greenshields V = v_f (1 - rho / rho_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SpeedDensityModel"]

_CONSISTENCY_RTOL = 1e-6


@dataclass(frozen=True)
class SpeedDensityModel:
    """Parameterized V(rho) curve. Immutable, safe to share across threads.

    Build instances through :meth:`triangular`, :meth:`trapezoidal` or
    :meth:`linear` rather than the raw constructor; the classmethods derive
    the dependent parameters and enforce consistency.
    """

    kind: str
    v_f: float
    rho_j: float
    q_max: float
    w: float
    rho_1: float = 0.0  # lower plateau breakpoint (trapezoidal only)
    rho_2: float = 0.0  # upper plateau breakpoint (trapezoidal only)

    @classmethod
    def triangular(cls, v_f, q_max, rho_j, w=None):
        """Triangular NFD from free-flow speed, capacity and jam density.

        The wave speed is derived from the consistency relation
        v_f * rho_c = w * (rho_j - rho_c) with rho_c = q_max / v_f.
        An explicitly supplied ``w`` is checked against the derived value.
        """
        if v_f <= 0 or q_max <= 0 or rho_j <= 0:
            raise ValueError("v_f, q_max and rho_j must be positive")
        rho_c = q_max / v_f
        if rho_c >= rho_j:
            raise ValueError(
                f"critical density {rho_c:.3f} >= jam density {rho_j:.3f}; "
                "parameters are mutually inconsistent"
            )
        w_derived = q_max / (rho_j - rho_c)
        if w is not None and abs(w - w_derived) > _CONSISTENCY_RTOL * w_derived:
            raise ValueError(
                f"wave speed w={w} inconsistent with (v_f, q_max, rho_j); "
                f"consistency requires w={w_derived:.6f}"
            )
        return cls("triangular", float(v_f), float(rho_j), float(q_max), float(w_derived))

    @classmethod
    def trapezoidal(cls, v_f, rho_1, rho_2, rho_j):
        """Trapezoidal NFD; the flow plateau spans [rho_1, rho_2]."""
        if not (0 < rho_1 < rho_2 < rho_j):
            raise ValueError("need 0 < rho_1 < rho_2 < rho_j")
        q_max = v_f * rho_1
        w = q_max / (rho_j - rho_2)
        return cls("trapezoidal", float(v_f), float(rho_j), float(q_max),
                   float(w), float(rho_1), float(rho_2))

    @classmethod
    def linear(cls, v_f, rho_j):
        """Greenshields curve V = v_f (1 - rho/rho_j)."""
        if v_f <= 0 or rho_j <= 0:
            raise ValueError("v_f and rho_j must be positive")
        return cls("linear", float(v_f), float(rho_j), float(v_f * rho_j / 4.0),
                   float(v_f))

    @property
    def rho_c(self):
        """Critical density of the triangular variant (q_max / v_f)."""
        return self.q_max / self.v_f

    def speed(self, rho):
        """V(rho) in km/h; accepts scalars or arrays, 0 at and beyond rho_j."""
        rho_arr = np.asarray(rho, dtype=float)
        if np.any(rho_arr < 0):
            raise ValueError("density must be non-negative")
        if self.kind == "linear":
            v = self.v_f * np.clip(1.0 - rho_arr / self.rho_j, 0.0, None)
        elif self.kind == "triangular":
            with np.errstate(divide="ignore", invalid="ignore"):
                cong = self.w * (self.rho_j - rho_arr) / rho_arr
            v = np.where(rho_arr <= self.rho_c, self.v_f, np.clip(cong, 0.0, None))
        elif self.kind == "trapezoidal":
            with np.errstate(divide="ignore", invalid="ignore"):
                plateau = self.q_max / rho_arr
                cong = self.w * (self.rho_j - rho_arr) / rho_arr
            v = np.where(
                rho_arr <= self.rho_1,
                self.v_f,
                np.where(rho_arr < self.rho_2, plateau, np.clip(cong, 0.0, None)),
            )
        else:  # pragma: no cover - constructors restrict kind
            raise ValueError(f"unknown model kind {self.kind!r}")
        return v if v.ndim else float(v)

    def flow(self, rho):
        """Q(rho) = rho * V(rho) in veh/h/lane."""
        rho_arr = np.asarray(rho, dtype=float)
        q = rho_arr * np.asarray(self.speed(rho_arr))
        return q if q.ndim else float(q)

    def critical_density(self):
        """argmax of Q(rho); midpoint of the plateau for the trapezoidal kind."""
        if self.kind == "linear":
            return self.rho_j / 2.0
        if self.kind == "triangular":
            return self.rho_c
        return 0.5 * (self.rho_1 + self.rho_2)

    def critical_interval(self):
        """(lo, hi) densities attaining q_max; degenerate except trapezoidal."""
        if self.kind == "trapezoidal":
            return (self.rho_1, self.rho_2)
        rc = self.critical_density()
        return (rc, rc)
