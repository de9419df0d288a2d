"""Throughput analysis toolkit for IEEE 802.11 DCF basic access.

Analytic fixed-point model of N stations with Poisson arrivals and finite
queues, the linear throughput law with its critical arrival rate, and a
slot-accurate simulator for validation.
"""

from .errors import ConvergenceError, ParameterError
from .model import (FixedPointSolution, SolverConfig, access_and_service_time,
                    idle_slot_time, queue_empty_probability, slot_times_at,
                    solve_fixed_point, solve_saturated, throughput,
                    throughput_tau_form)
from .params import (PROFILES, DerivedTimes, GeomQuantities, PhyMacParams,
                     collision_probability, derive_times, geom_quantities,
                     get_profile, load_params)
from .regime import (RegimeReport, critical_lambda, linear_throughput,
                     linearity_error, max_throughput)
from .sim import ReplicationResult, SimConfig, SimResult, run_replication
from .sim import run as run_simulation

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "ParameterError",
    "PhyMacParams", "DerivedTimes", "GeomQuantities", "PROFILES",
    "derive_times", "geom_quantities", "collision_probability",
    "get_profile", "load_params",
    "SolverConfig", "FixedPointSolution", "solve_fixed_point",
    "solve_saturated", "throughput", "throughput_tau_form", "slot_times_at",
    "access_and_service_time", "idle_slot_time", "queue_empty_probability",
    "RegimeReport", "max_throughput", "linear_throughput", "critical_lambda",
    "linearity_error",
    "SimConfig", "SimResult", "ReplicationResult", "run_replication",
    "run_simulation",
    "__version__",
]
