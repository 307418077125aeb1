"""Configuration ingestion, scenario presets, run orchestration, and
trace/report emission."""

from .config import SimConfig, format_config, load_config, parse_config
from .scenarios import (CavityProbe, ScenarioResult, cavity_frequency,
                        cavity_mode, run_scenario)

__all__ = [
    "SimConfig", "format_config", "load_config", "parse_config",
    "CavityProbe", "ScenarioResult", "cavity_frequency", "cavity_mode",
    "run_scenario",
]
