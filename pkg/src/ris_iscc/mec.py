"""Uplink rate, latency and energy of local execution and edge offloading.

Concurrent offloaders share the band and the edge CPU equally. Each
offloader gets ``bandwidth / n`` Hz with noise scaled to that share, and
``f_edge / n`` cycles/s at the server. The BS combines with MRC, so the
received SNR is ``p * |H w|^2 / noise``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import build_beamformers, meets_floor, sensing_gain
from .channel import ChannelSet, effective_channels
from .scenario import Scenario, Task
from .sensing import sensing_floor

__all__ = [
    "ControlVector",
    "EvaluationReport",
    "noise_power_w",
    "offload_rate",
    "local_cost",
    "offload_cost",
    "min_power_for_latency",
    "evaluate",
    "evaluate_batch",
]

POWER_RTOL = 1e-6
LATENCY_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ControlVector:
    """One joint decision for every user and the RIS."""

    phases: np.ndarray        # (M,) radians in [0, 2*pi)
    offload: np.ndarray       # (K,) bool
    power_w: np.ndarray       # (K,) in (0, p_max]; only read for offloaders
    alpha_sense: np.ndarray   # (K,) in [0, 1]

    def __post_init__(self):
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float))
        object.__setattr__(self, "offload", np.asarray(self.offload, dtype=bool))
        object.__setattr__(self, "power_w", np.asarray(self.power_w, dtype=float))
        object.__setattr__(self, "alpha_sense", np.asarray(self.alpha_sense, dtype=float))
        k = self.offload.shape
        if self.phases.ndim != 1 or len(k) != 1 or self.power_w.shape != k or self.alpha_sense.shape != k:
            raise ValueError("control vector fields have inconsistent shapes")

    def validate(self, s: Scenario) -> None:
        if self.offload.shape != (s.k_users,):
            raise ValueError(f"control vector is for {self.offload.shape[0]} users, scenario has {s.k_users}")
        if self.phases.shape != (s.m_ris,):
            raise ValueError(f"control vector has {self.phases.size} phases, scenario has {s.m_ris} elements")
        if np.any((self.phases < 0) | (self.phases >= 2 * np.pi)):
            raise ValueError("phases must lie in [0, 2*pi)")
        if np.any((self.power_w <= 0) | (self.power_w > s.p_max_w)):
            raise ValueError(f"powers must lie in (0, {s.p_max_w}]")
        if np.any((self.alpha_sense < 0) | (self.alpha_sense > 1)):
            raise ValueError("alpha_sense must lie in [0, 1]")

    def __eq__(self, other):
        if not isinstance(other, ControlVector):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("phases", "offload", "power_w", "alpha_sense"))


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Per-user outcome of one control vector plus totals.

    ``beampattern_w`` is each user's gain toward the sensing direction at the
    power budget. ``n_violations`` counts latency and sensing-floor misses
    separately, so one user can contribute two.
    """

    rate_bps: np.ndarray
    latency_s: np.ndarray
    energy_j: np.ndarray
    beampattern_w: np.ndarray
    latency_ok: np.ndarray
    sensing_ok: np.ndarray
    total_energy_j: float
    n_violations: int

    @property
    def feasible(self) -> np.ndarray:
        return self.latency_ok & self.sensing_ok

    def __eq__(self, other):
        if not isinstance(other, EvaluationReport):
            return NotImplemented
        return (self.total_energy_j == other.total_energy_j
                and self.n_violations == other.n_violations
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("rate_bps", "latency_s", "energy_j", "beampattern_w",
                                  "latency_ok", "sensing_ok")))


def noise_power_w(s: Scenario) -> float:
    return 10.0 ** ((s.noise_power_dbm - 30.0) / 10.0)


def _rate(gain, p, s: Scenario, n_offloaders):
    band = s.bandwidth_hz / n_offloaders
    noise = noise_power_w(s) * (band / s.bandwidth_hz)
    # log1p keeps low-SNR rates accurate (1 + x rounds away small x)
    return band * np.log1p(p * gain / noise) / np.log(2.0)


def offload_rate(s: Scenario, H_k, w, p: float, n_offloaders: int) -> float:
    """Achievable uplink rate in bit/s on an equal share of the band."""
    if n_offloaders < 1:
        raise ValueError(f"n_offloaders must be >= 1, got {n_offloaders}")
    if not p > 0:
        raise ValueError(f"transmit power must be positive, got {p}")
    gain = float(np.linalg.norm(np.asarray(H_k) @ np.asarray(w)) ** 2)
    return float(_rate(gain, p, s, n_offloaders))


def local_cost(task: Task, s: Scenario) -> tuple[float, float]:
    """(latency s, energy J) of running ``task`` on the user's own CPU."""
    cycles = task.bits * task.cycles_per_bit
    return cycles / s.f_local_hz, s.kappa * s.f_local_hz ** 2 * cycles


def _edge_time(task: Task, s: Scenario, n_offloaders) -> float:
    return task.bits * task.cycles_per_bit / (s.f_edge_hz / n_offloaders)


def offload_cost(task: Task, rate: float, p: float, s: Scenario, n_offloaders: int) -> tuple[float, float]:
    """(latency s, energy J) of uploading ``task`` and executing it at the edge.

    Only the user's transmit energy is charged; result download is ignored.
    """
    if not rate > 0:
        raise ValueError(f"offloading needs a positive rate, got {rate}")
    t_up = task.bits / rate
    return t_up + _edge_time(task, s, n_offloaders), p * t_up


def _min_power(task: Task, gain: float, s: Scenario, n_offloaders: int) -> float | None:
    if _edge_time(task, s, n_offloaders) >= s.t_max_s or not gain > 0:
        return None

    def fits(p):
        return offload_cost(task, float(_rate(gain, p, s, n_offloaders)), p, s, n_offloaders)[0] <= s.t_max_s

    if not fits(s.p_max_w):
        return None
    lo, hi = 0.0, s.p_max_w
    while hi - lo > POWER_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if fits(mid):
            hi = mid
        else:
            lo = mid
    return hi


def min_power_for_latency(task: Task, s: Scenario, H_k, w, n_offloaders: int) -> float | None:
    """Smallest power in (0, p_max] meeting ``t_max`` when offloading.

    Returns ``None`` when no admissible power meets the bound (edge share too
    slow, dead channel, or even ``p_max`` too weak). Since the upload energy
    ``p * bits / rate(p)`` grows with ``p``, this is also the energy-optimal
    feasible power.
    """
    if n_offloaders < 1:
        raise ValueError(f"n_offloaders must be >= 1, got {n_offloaders}")
    gain = float(np.linalg.norm(np.asarray(H_k) @ np.asarray(w)) ** 2)
    return _min_power(task, gain, s, n_offloaders)


def evaluate_batch(s: Scenario, c: ChannelSet, phases, offload, power_w, alpha_sense) -> dict:
    """Evaluate a population of control vectors at once.

    All arguments carry a leading population axis: phases (P, M), the rest
    (P, K). Returns a dict of arrays keyed like :class:`EvaluationReport`.
    """
    phases = np.asarray(phases, dtype=float)
    offload = np.asarray(offload, dtype=bool)
    power_w = np.asarray(power_w, dtype=float)
    alpha = np.asarray(alpha_sense, dtype=float)
    H = effective_channels(c, phases)                                  # (P, K, nb, nu)
    w = build_beamformers(H, s, alpha)                                 # (P, K, nu)
    gain = np.sum(np.abs(H @ w[..., None]) ** 2, axis=(-2, -1))        # (P, K)
    beam = sensing_gain(w, s)
    sensing_ok = meets_floor(beam, sensing_floor(s))

    bits = np.array([t.bits for t in s.tasks])
    cycles = bits * np.array([t.cycles_per_bit for t in s.tasks])
    local_latency = cycles / s.f_local_hz
    local_energy = s.kappa * s.f_local_hz ** 2 * cycles

    n_off = offload.sum(axis=-1, keepdims=True)
    n_safe = np.maximum(n_off, 1)
    with np.errstate(divide="ignore"):
        rate = np.where(offload, _rate(gain, power_w, s, n_safe), 0.0)
        t_up = np.where(offload, bits / np.where(rate > 0, rate, 0.0), 0.0)
    t_exec = cycles / (s.f_edge_hz / n_safe)
    latency = np.where(offload, t_up + t_exec, local_latency)
    energy = np.where(offload, power_w * t_up, local_energy)
    latency_ok = latency <= s.t_max_s * (1.0 + LATENCY_RTOL)
    n_viol = np.sum(~latency_ok, axis=-1) + np.sum(~sensing_ok, axis=-1)
    return {
        "rate_bps": rate,
        "latency_s": latency,
        "energy_j": energy,
        "beampattern_w": beam,
        "latency_ok": latency_ok,
        "sensing_ok": sensing_ok,
        "total_energy_j": energy.sum(axis=-1),
        "n_violations": n_viol,
        "gain": gain,
        "beamformers": w,
    }


def evaluate(s: Scenario, c: ChannelSet, ctrl: ControlVector) -> EvaluationReport:
    """Score one control vector. Pure: equal inputs give equal reports."""
    if c.k_users != s.k_users or c.m_ris != s.m_ris or c.h_direct.shape[1:] != (s.n_bs, s.n_ue):
        raise ValueError("channel set does not match the scenario")
    ctrl.validate(s)
    out = evaluate_batch(s, c, ctrl.phases[None], ctrl.offload[None],
                         ctrl.power_w[None], ctrl.alpha_sense[None])
    return EvaluationReport(
        rate_bps=out["rate_bps"][0],
        latency_s=out["latency_s"][0],
        energy_j=out["energy_j"][0],
        beampattern_w=out["beampattern_w"][0],
        latency_ok=out["latency_ok"][0],
        sensing_ok=out["sensing_ok"][0],
        total_energy_j=float(out["total_energy_j"][0]),
        n_violations=int(out["n_violations"][0]),
    )
