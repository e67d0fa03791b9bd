"""Core package initialization."""
from src.core.engine import MarketSimulator, MarketState, run_pcc, run_simulation
from src.core.scenarios import SCENARIOS, SETTINGS, build_scenario, load_preset

__all__ = [
    "MarketSimulator",
    "MarketState",
    "run_pcc",
    "run_simulation",
    "SCENARIOS",
    "SETTINGS",
    "build_scenario",
    "load_preset",
]
