"""Alternating optimisation of sensing weights, RIS phases and offloading."""

from __future__ import annotations

import numpy as np

from ..beamforming import build_beamformers, min_alphas_for_floor
from ..channel import ChannelSet, effective_channels
from ..mec import ControlVector, _min_power, _rate, evaluate_batch, local_cost
from ..scenario import Scenario
from .phases import DEFAULT_PASSES, optimize_phases

__all__ = ["plan_offloading", "greedy_offload"]

OUTER_ITERATIONS = 3


def greedy_offload(s: Scenario, gains) -> tuple[np.ndarray, np.ndarray]:
    """Pick the offloading set greedily from all-local.

    Each round moves the user whose move lowers the *total* energy the most,
    with every offloader re-priced at its minimum latency-feasible power for
    the new offloader count. A move that would leave any offloader without a
    feasible power is not allowed. Ties go to the lower user index; stops
    when no move saves energy.

    Returns
    -------
    offload : ndarray of bool, shape (K,)
    power_w : ndarray, shape (K,)
        Minimum feasible power for offloaders, ``p_max`` for local users.
    """
    k_users = s.k_users
    gains = np.asarray(gains, dtype=float)
    local = np.array([local_cost(t, s)[1] for t in s.tasks])
    cache: dict[tuple[int, int], tuple[float, float] | None] = {}

    def priced(k, n):
        key = (k, n)
        if key not in cache:
            p = _min_power(s.tasks[k], gains[k], s, n)
            if p is None:
                cache[key] = None
            else:
                rate = float(_rate(gains[k], p, s, n))
                cache[key] = (p, p * (s.tasks[k].bits / rate))
        return cache[key]

    def total(members):
        n = len(members)
        energy = local.sum() - local[list(members)].sum()
        for k in members:
            got = priced(k, n)
            if got is None:
                return None
            energy += got[1]
        return energy

    chosen: list[int] = []
    current = local.sum()
    while len(chosen) < k_users:
        best_k, best_energy = None, current
        for k in range(k_users):
            if k in chosen:
                continue
            energy = total(chosen + [k])
            if energy is not None and energy < best_energy:
                best_k, best_energy = k, energy
        if best_k is None:
            break
        chosen.append(best_k)
        current = best_energy

    offload = np.zeros(k_users, dtype=bool)
    offload[chosen] = True
    power = np.full(k_users, s.p_max_w)
    for k in chosen:
        power[k] = priced(k, len(chosen))[0]
    return offload, power


def plan_offloading(s: Scenario, c: ChannelSet, phases=None, outer_iterations: int = OUTER_ITERATIONS,
                    passes: int = DEFAULT_PASSES) -> ControlVector:
    """Alternating-optimisation baseline.

    Each outer iteration sets every user's sensing weight to the smallest
    value meeting the sensing floor, builds the beamformers, and re-optimises
    the RIS phases for those beamformers. The weights are then refreshed for
    the final phases and the offloading set is chosen greedily. Offloading
    does not feed back into the first two steps, so it is run once at the end.
    Fully deterministic.
    """
    m = s.m_ris
    theta = np.zeros(m) if phases is None else np.asarray(phases, dtype=float)
    if theta.shape != (m,):
        raise ValueError(f"expected {m} phases, got shape {theta.shape}")
    if m:
        for _ in range(outer_iterations):
            H = effective_channels(c, theta)
            w = build_beamformers(H, s, min_alphas_for_floor(H, s))
            theta = optimize_phases(s, c, w, init=theta, passes=passes)

    H = effective_channels(c, theta[None])
    alpha = min_alphas_for_floor(H, s)[0]
    k = s.k_users
    # price the channels exactly as evaluate() will see them
    gains = evaluate_batch(s, c, theta[None], np.zeros((1, k), bool),
                           np.full((1, k), s.p_max_w), alpha[None])["gain"][0]
    offload, power = greedy_offload(s, gains)
    return ControlVector(phases=theta, offload=offload, power_w=power, alpha_sense=alpha)
