"""evacgate: staged-departure evacuation control on a bathtub traffic model.

Library layout:

* :mod:`evacgate.nfd`       speed-density / flow-density curves
* :mod:`evacgate.geometry`  evacuation-zone geometry and exit-distance distributions
* :mod:`evacgate.flood`     dam-break surge front, arrival times, spatial risk field
* :mod:`evacgate.bathtub`   Lagrangian-cohort network dynamics and the delay functional
* :mod:`evacgate.demand`    stochastic waiting-demand surface and gated release
* :mod:`evacgate.risk`      AVaR and the mean + beta * AVaR objective
* :mod:`evacgate.control`   policies, Monte Carlo evaluation, bang-bang optimizer, MPC
* :mod:`evacgate.scenario`  declarative scenario configuration (Amager defaults)
* :mod:`evacgate.cli`       command-line front end
"""

__version__ = "0.1.0"

from .nfd import SpeedDensityModel
from .geometry import (
    DiskZone,
    DumbbellZone,
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
from .flood import SurgeParams, RiskField, arrival_time, build_risk_field, flooded_ratio, front_position
from .bathtub import CohortState, NetworkParams, SimulationTrace, exit_rate_check, simulate, step
from .demand import DemandSurface, GbmParams, evolve, init_surface, release
from .risk import DelaySamples, avar, objective
from .control import (
    BangBangPolicy,
    ControlDiagnostics,
    ReleaseTimeMap,
    ScenarioSet,
    SearchConfig,
    brute_force_optimal,
    costate_trajectory,
    evaluate_policy,
    mpc_run,
    optimize_bangbang,
    service_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
