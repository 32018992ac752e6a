"""Simulator and optimiser for RIS-assisted sensing, communication and edge computing."""

from .channel import ChannelSet, effective_channel, effective_channels, pathloss_db, sample_channels
from .mec import ControlVector, EvaluationReport, evaluate
from .scenario import Scenario, Task, build_default_scenario, scenario_digest

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "effective_channel",
    "effective_channels",
    "pathloss_db",
    "sample_channels",
    "ControlVector",
    "EvaluationReport",
    "evaluate",
    "Scenario",
    "Task",
    "build_default_scenario",
    "scenario_digest",
]
