"""Uplink energy-efficiency simulator and optimizer for a decoupled RAN.

Network drops, ergodic rate statistics, a holistic power model, fractional-
programming power control, and swap-matching association with BS sleeping.
"""

from .netmodel import (ConfigError, CorrelationSet, FrameConfig, ScenarioParams,
                       Topology, build_correlation, generate_topology, wrap_distance)
from .powerctl import (InfeasibleError, PowerSolution, QosSpec, SolverSettings,
                       dinkelbach, eipc, fipc, gamma_thresholds, make_qos, qopc,
                       qos_residual, slmdb, solve_parametric, surrogate_ee,
                       taylor_bounds)
from .powermodel import (AffinePowerForm, BsPowerConfig, PowerBreakdown,
                         SubComponentSpec, SystemPowerParams, build_affine_form,
                         component_power, edge_cloud_power, energy_efficiency,
                         network_power, sleep_power, theta, ubs_power)
from .rates import Association, link_coefficients, sinr, uplink_rate
from .statistics import CoefficientTensor, mmse_statistics, monte_carlo_statistics

__version__ = "0.1.0"
