"""Dual-function transmit beamformers.

Each user steers one unit-norm vector that serves both the uplink and the
radar. The vector interpolates between the rate-optimal direction of the
user's effective channel and the matched sensing beam::

    v = alpha * a(theta0) / sqrt(n) + (1 - alpha) * u,    w = v / |v|

where ``u`` is the dominant right singular vector of ``H``, phase-rotated so
that ``a(theta0)^H u`` is real and non-negative. With that rotation the
sensing gain is non-decreasing in ``alpha``.
"""

from __future__ import annotations

import numpy as np

from .sensing import sensing_floor, steering_vector

__all__ = [
    "dominant_direction",
    "combine_beams",
    "build_beamformer",
    "build_beamformers",
    "sensing_gain",
    "meets_floor",
    "min_alpha_for_floor",
    "min_alphas_for_floor",
]

ALPHA_TOL = 1e-4
FLOOR_RTOL = 1e-9


def _sense_beam(s) -> np.ndarray:
    return steering_vector(s.sense_angle_rad, s.n_ue) / np.sqrt(s.n_ue)


def dominant_direction(H, sense_beam) -> np.ndarray:
    """Dominant right singular vector(s) of ``H`` aligned to ``sense_beam``.

    ``H`` has shape (..., n_bs, n_ue). A channel that is exactly zero has no
    preferred direction; the sensing beam is returned for it.
    """
    H = np.asarray(H, dtype=complex)
    gram = np.swapaxes(H.conj(), -1, -2) @ H
    _, vecs = np.linalg.eigh(gram)
    u = vecs[..., :, -1]
    proj = u @ sense_beam.conj()
    mag = np.abs(proj)
    rot = np.where(mag > 0, proj.conj() / np.where(mag > 0, mag, 1.0), 1.0)
    u = u * rot[..., None]
    dead = ~np.any(H != 0, axis=(-2, -1))
    if np.any(dead):
        u = np.where(dead[..., None], sense_beam, u)
    return u


def combine_beams(u, sense_beam, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)[..., None]
    v = alpha * sense_beam + (1.0 - alpha) * u
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def build_beamformers(H, s, alpha) -> np.ndarray:
    """Beamformers for a stack of channels, shape (..., n_ue)."""
    beam = _sense_beam(s)
    return combine_beams(dominant_direction(H, beam), beam, alpha)


def build_beamformer(H_k, s, alpha_sense: float) -> np.ndarray:
    """Unit-norm dual-function beamformer of one user.

    ``alpha_sense = 1`` gives the matched sensing beam, ``0`` the rate-optimal
    beam of ``H_k``.
    """
    H_k = np.asarray(H_k, dtype=complex)
    if H_k.ndim != 2:
        raise ValueError(f"expected a single channel matrix, got shape {H_k.shape}")
    if not np.any(H_k != 0):
        raise ValueError("cannot steer toward an all-zero channel")
    if not 0.0 <= alpha_sense <= 1.0:
        raise ValueError(f"alpha_sense must lie in [0, 1], got {alpha_sense}")
    return build_beamformers(H_k, s, alpha_sense)


def sensing_gain(w, s) -> np.ndarray:
    """Gain toward the sensing direction at full power budget, watts."""
    a = steering_vector(s.sense_angle_rad, s.n_ue)
    return s.p_max_w * np.abs(w @ a.conj()) ** 2


def meets_floor(gain, floor) -> np.ndarray:
    return np.asarray(gain) >= floor * (1.0 - FLOOR_RTOL)


def min_alphas_for_floor(H, s, tol: float = ALPHA_TOL) -> np.ndarray:
    """Vectorised :func:`min_alpha_for_floor` over a stack of channels."""
    beam = _sense_beam(s)
    u = dominant_direction(H, beam)
    floor = sensing_floor(s)

    def ok(alpha):
        return meets_floor(sensing_gain(combine_beams(u, beam, alpha), s), floor)

    shape = u.shape[:-1]
    lo = np.zeros(shape)
    hi = np.ones(shape)
    done = ok(lo)
    hi = np.where(done, 0.0, hi)
    while np.any(~done & (hi - lo > tol)):
        mid = 0.5 * (lo + hi)
        good = ok(mid)
        active = ~done & (hi - lo > tol)
        hi = np.where(active & good, mid, hi)
        lo = np.where(active & ~good, mid, lo)
    return hi


def min_alpha_for_floor(H_k, s, tol: float = ALPHA_TOL) -> float:
    """Smallest ``alpha`` whose beam meets the sensing floor at ``p_max``.

    Bisection on [0, 1]; the returned value always meets the floor and lies
    within ``tol`` of the true threshold. Never infeasible, since ``alpha = 1``
    attains the maximum gain.
    """
    H_k = np.asarray(H_k, dtype=complex)
    if H_k.ndim != 2:
        raise ValueError(f"expected a single channel matrix, got shape {H_k.shape}")
    return float(min_alphas_for_floor(H_k, s, tol))
