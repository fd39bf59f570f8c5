from .scenario import Expectation, LinkEvent, Scenario, ScenarioError, load_scenario, parse_scenario
from .sim import ExpectResult, SimReport, Simulation, run
from .trace import emit_trace, format_trace

__all__ = [
    "Expectation", "ExpectResult", "LinkEvent", "Scenario", "ScenarioError", "SimReport",
    "Simulation", "emit_trace", "format_trace", "load_scenario", "parse_scenario", "run",
]
