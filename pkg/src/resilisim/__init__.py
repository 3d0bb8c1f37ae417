"""Deterministic simulation of contract-monitored, self-repairing component systems."""

from .contracts import (
    BudgetSet,
    Contract,
    Every,
    PortEvent,
    TimedGuarantee,
    Within,
    WithinEvery,
    check_trace,
    compose,
    make_contract,
    validate_decomposition,
)
from .engine import MS, S, US, Engine, EventKind, parse_duration
from .faultlab import HangingProcess, IntermittentLink, NetworkOutage, SplitMix64
from .observers import Observer, deadline_periodic_template, deadline_template, heartbeat_template, periodic_template
from .resilience import NoFeasibleBehavior, select_behavior
from .runtime import Behavior
from .scenario import ParseError, ScenarioConfig, ValidationError, load_builtin, parse_scenario
from .simulation import RunResult, Simulation, run_scenario
from .telemetry import Trace, compute_metrics, replay_violations
from .topology import route

__version__ = "0.1.0"
