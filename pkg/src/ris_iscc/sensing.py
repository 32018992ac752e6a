"""ULA steering vectors and radar transmit beampatterns."""

from __future__ import annotations

import numpy as np

__all__ = [
    "steering_vector",
    "beampattern",
    "max_beampattern",
    "sensing_floor",
    "check_beamformer",
]

NORM_TOL = 1e-9


def steering_vector(angle_rad, n: int) -> np.ndarray:
    """Half-wavelength ULA response ``exp(j*pi*i*sin(angle))``, ``i = 0..n-1``.

    ``angle_rad`` may be an array; the element index is the last axis.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"array size must be an integer >= 1, got {n}")
    angle = np.asarray(angle_rad, dtype=float)
    return np.exp(1j * np.pi * np.sin(angle)[..., None] * np.arange(int(n)))


def check_beamformer(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    norm = np.linalg.norm(w, axis=-1)
    if np.any(np.abs(norm - 1.0) > NORM_TOL):
        raise ValueError(f"beamformer must have unit norm, got norm {norm}")
    return w


def beampattern(w, p_w: float, angle_rad):
    """Transmit gain ``p_w * |a(angle)^H w|^2`` in watts.

    Parameters
    ----------
    w : array_like, shape (n,)
        Unit-norm transmit beamformer.
    p_w : float
        Transmit power, watts.
    angle_rad : float or array_like
        Look direction(s).
    """
    w = check_beamformer(w)
    if not p_w > 0:
        raise ValueError(f"transmit power must be positive, got {p_w}")
    a = steering_vector(angle_rad, w.shape[-1])
    gain = p_w * np.abs(a.conj() @ w) ** 2
    return float(gain) if np.ndim(gain) == 0 else gain


def max_beampattern(p_w: float, n: int) -> float:
    """Largest attainable gain ``p_w * n`` (matched beamformer)."""
    if not p_w > 0:
        raise ValueError(f"transmit power must be positive, got {p_w}")
    return float(p_w) * int(n)


def sensing_floor(s) -> float:
    """Required gain toward the sensing direction for every user of scenario ``s``."""
    return s.sense_floor_frac * max_beampattern(s.p_max_w, s.n_ue)
