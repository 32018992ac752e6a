"""Single-step decision environment for external agents.

Each episode is one state, one action, one reward (a contextual bandit):
``reset(seed)`` draws a scenario and its channels, ``step(action)`` scores a
flat action vector and returns ``(reward, report)``. ``step`` is pure, so the
same action after the same reset always yields the same reward.

Action layout, length ``M + 3K``::

    [phases (M) | alpha_sense (K) | power_w (K) | offload (K)]

State layout, length ``6K``::

    [bits (K) | cycles_per_bit (K) | direct gain dB (K) | cascade gain dB (K) | x (K) | y (K)]
"""

from __future__ import annotations

import numpy as np

from ..channel import ChannelSet, sample_channels, wrap_phases
from ..mec import ControlVector, EvaluationReport, evaluate
from ..scenario import Scenario, scenario_from_config

__all__ = [
    "VIOLATION_PENALTY_J",
    "reward_of",
    "action_size",
    "encode_action",
    "decode_action",
    "decode_actions",
    "mdp_state",
    "IsccEnv",
]

VIOLATION_PENALTY_J = 10.0
POWER_FLOOR_FRAC = 1e-9
GAIN_FLOOR_DB = -300.0


def reward_of(total_energy_j, n_violations):
    return -np.asarray(total_energy_j) - VIOLATION_PENALTY_J * np.asarray(n_violations)


def action_size(s: Scenario) -> int:
    return s.m_ris + 3 * s.k_users


def encode_action(ctrl: ControlVector) -> np.ndarray:
    return np.concatenate([ctrl.phases, ctrl.alpha_sense, ctrl.power_w,
                           ctrl.offload.astype(float)])


def decode_actions(actions, s: Scenario) -> dict:
    """Decode a population of actions, shape (P, M + 3K), into clamped arrays."""
    a = np.asarray(actions, dtype=float)
    if a.ndim != 2 or a.shape[1] != action_size(s):
        raise ValueError(f"actions must have shape (P, {action_size(s)}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("actions must be finite")
    m, k = s.m_ris, s.k_users
    return {
        "phases": wrap_phases(a[:, :m]),
        "alpha_sense": np.clip(a[:, m:m + k], 0.0, 1.0),
        "power_w": np.clip(a[:, m + k:m + 2 * k], POWER_FLOOR_FRAC * s.p_max_w, s.p_max_w),
        "offload": a[:, m + 2 * k:] >= 0.5,
    }


def decode_action(action, s: Scenario) -> ControlVector:
    """Flat action to a valid ControlVector: phases wrapped into [0, 2*pi),
    weights clipped to [0, 1], powers clamped into (0, p_max], offload flags
    thresholded at 0.5."""
    a = np.asarray(action, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"expected a flat action vector, got shape {a.shape}")
    d = decode_actions(a[None], s)
    return ControlVector(phases=d["phases"][0], offload=d["offload"][0],
                         power_w=d["power_w"][0], alpha_sense=d["alpha_sense"][0])


def _db(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 10.0 * np.log10(np.where(x > 0, x, 1.0)), GAIN_FLOOR_DB)


def mdp_state(s: Scenario, c: ChannelSet) -> np.ndarray:
    direct = np.sum(np.abs(c.h_direct) ** 2, axis=(1, 2))
    # incoherent cascade power: sum_m |g_m|^2 |f_km|^2
    cascade = np.abs(c.g_ue_ris) ** 2 @ np.ones(s.n_ue)              # (K, M)
    cascade = cascade @ np.sum(np.abs(c.g_ris_bs) ** 2, axis=0)       # (K,)
    pos = np.array(s.user_positions)
    return np.concatenate([
        [t.bits for t in s.tasks],
        [t.cycles_per_bit for t in s.tasks],
        _db(direct),
        _db(cascade),
        pos[:, 0],
        pos[:, 1],
    ])


class IsccEnv:
    """Environment over freshly drawn scenarios.

    Parameters
    ----------
    k_users, m_ris : int
        Size of the drawn scenarios.
    config : dict, optional
        Scenario JSON document; a complete scenario stays fixed across
        resets and only the channels are redrawn.
    """

    def __init__(self, k_users: int = 16, m_ris: int = 40, config: dict | None = None):
        self.k_users = k_users
        self.m_ris = m_ris
        self.config = config
        self.scenario: Scenario | None = None
        self.channels: ChannelSet | None = None

    def reset(self, seed: int) -> np.ndarray:
        self.scenario = scenario_from_config(self.config, seed, self.k_users, self.m_ris)
        self.channels = sample_channels(self.scenario, seed)
        return mdp_state(self.scenario, self.channels)

    @property
    def action_size(self) -> int:
        self._require_reset()
        return action_size(self.scenario)

    def step(self, action) -> tuple[float, EvaluationReport]:
        self._require_reset()
        ctrl = decode_action(action, self.scenario)
        report = evaluate(self.scenario, self.channels, ctrl)
        return float(reward_of(report.total_energy_j, report.n_violations)), report

    def sample_action(self, rng: np.random.Generator) -> np.ndarray:
        """A uniformly random valid action."""
        self._require_reset()
        s = self.scenario
        k = s.k_users
        return np.concatenate([
            rng.uniform(0.0, 2.0 * np.pi, s.m_ris),
            rng.uniform(0.0, 1.0, k),
            rng.uniform(POWER_FLOOR_FRAC, 1.0, k) * s.p_max_w,
            (rng.uniform(0.0, 1.0, k) < 0.5).astype(float),
        ])

    def _require_reset(self):
        if self.scenario is None:
            raise RuntimeError("call reset() first")
