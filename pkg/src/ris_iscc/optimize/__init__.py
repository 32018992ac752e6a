"""Joint decision making: beamformers, RIS phases, offloading, policy search."""

from ..beamforming import build_beamformer, min_alpha_for_floor
from .cem import CemConfig, cem_optimize
from .env import IsccEnv, decode_action, encode_action, mdp_state, reward_of
from .offloading import greedy_offload, plan_offloading
from .phases import (
    MonotonicityError,
    optimize_phases,
    phase_coordinate_ascent,
    phase_objective,
    sequential_phase_init,
)

__all__ = [
    "build_beamformer",
    "min_alpha_for_floor",
    "CemConfig",
    "cem_optimize",
    "IsccEnv",
    "decode_action",
    "encode_action",
    "mdp_state",
    "reward_of",
    "greedy_offload",
    "plan_offloading",
    "MonotonicityError",
    "optimize_phases",
    "phase_coordinate_ascent",
    "phase_objective",
    "sequential_phase_init",
]
