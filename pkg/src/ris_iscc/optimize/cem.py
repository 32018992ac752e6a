"""Cross-entropy policy search over the flat action space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import ChannelSet
from ..mec import ControlVector, EvaluationReport, evaluate, evaluate_batch
from ..scenario import Scenario
from .env import action_size, decode_action, decode_actions, reward_of
from .phases import MonotonicityError

__all__ = ["CemConfig", "cem_optimize", "initial_distribution", "refit", "to_action"]

LOG_POWER_SPAN = 12.0   # decades below p_max covered by the initial spread


@dataclass(frozen=True)
class CemConfig:
    """Cross-entropy method settings.

    ``init_std`` scales the default per-coordinate spread; pass an array of
    length ``M + 3K`` to set every coordinate explicitly. ``std_smoothing``
    is the weight kept on the previous stddev at each refit (0 refits it to
    the elites alone); it slows the collapse of the search distribution.
    The mean is always refit to the elites without smoothing.
    """

    population: int = 64
    elites: int = 8
    iterations: int = 50
    init_std: float | tuple = 1.0
    seed: int = 0
    std_smoothing: float = 0.5

    def __post_init__(self):
        if not 1 <= self.elites <= self.population:
            raise ValueError(f"need 1 <= elites <= population, got {self.elites}/{self.population}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 <= self.std_smoothing < 1.0:
            raise ValueError(f"std_smoothing must be in [0, 1), got {self.std_smoothing}")


def initial_distribution(s: Scenario, init_std=1.0) -> tuple[np.ndarray, np.ndarray]:
    """Mean and stddev of the search distribution.

    The search runs in the action layout except for powers, which are
    searched as ``log10(p / p_max)``: useful powers span many decades below
    the budget and a linear Gaussian collapses long before reaching them.
    """
    m, k = s.m_ris, s.k_users
    mean = np.concatenate([np.full(m, np.pi), np.full(k, 0.5), np.full(k, -LOG_POWER_SPAN / 2),
                           np.full(k, 0.5)])
    spread = np.concatenate([np.full(m, np.pi), np.full(k, 0.5), np.full(k, LOG_POWER_SPAN / 2),
                             np.full(k, 0.5)])
    if np.ndim(init_std) == 0:
        std = spread * float(init_std)
    else:
        std = np.asarray(init_std, dtype=float)
        if std.shape != spread.shape:
            raise ValueError(f"init_std must have length {spread.size}, got {std.shape}")
    return mean, std


def to_action(z, s: Scenario) -> np.ndarray:
    """Map search coordinates to flat actions (powers back to watts)."""
    a = np.array(z, dtype=float)
    m, k = s.m_ris, s.k_users
    a[..., m + k:m + 2 * k] = s.p_max_w * 10.0 ** np.minimum(a[..., m + k:m + 2 * k], 0.0)
    return a


def refit(points, rewards, elites: int, std, std_smoothing: float = 0.0):
    """New (mean, std) from the ``elites`` highest-reward rows of ``points``.

    Ties in reward keep the earlier row.
    """
    order = np.argsort(-np.asarray(rewards), kind="stable")
    elite = np.asarray(points)[order[:elites]]
    new_std = std_smoothing * np.asarray(std) + (1.0 - std_smoothing) * elite.std(axis=0)
    return elite.mean(axis=0), new_std


def _rewards(s, c, actions):
    d = decode_actions(actions, s)
    out = evaluate_batch(s, c, d["phases"], d["offload"], d["power_w"], d["alpha_sense"])
    return reward_of(out["total_energy_j"], out["n_violations"])


def cem_optimize(s: Scenario, c: ChannelSet, cfg: CemConfig = CemConfig(),
                 history: list | None = None) -> tuple[ControlVector, EvaluationReport]:
    """Search for a good joint decision with the cross-entropy method.

    Every iteration samples ``population`` points from a diagonal Gaussian
    (see :func:`initial_distribution` for the search coordinates), scores
    their actions with the environment reward, and refits the mean and
    stddev to the ``elites`` best. Returns the best action seen, decoded,
    with its report. ``history`` (if given) receives the best-so-far reward
    after each iteration; that sequence is checked to never decrease.
    """
    rng = np.random.default_rng(cfg.seed)
    mean, std = initial_distribution(s, cfg.init_std)
    best_action, best_reward = None, -np.inf
    for _ in range(cfg.iterations):
        pop = mean + std * rng.standard_normal((cfg.population, action_size(s)))
        actions = to_action(pop, s)
        rewards = _rewards(s, c, actions)
        top = int(np.argmax(rewards))
        previous = best_reward
        if rewards[top] > best_reward:
            best_reward = float(rewards[top])
            best_action = actions[top].copy()
        if best_reward < previous:
            raise MonotonicityError("best-so-far reward decreased")
        if history is not None:
            history.append(best_reward)
        mean, std = refit(pop, rewards, cfg.elites, std, cfg.std_smoothing)
    ctrl = decode_action(best_action, s)
    return ctrl, evaluate(s, c, ctrl)
