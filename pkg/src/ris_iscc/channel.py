"""Large- and small-scale fading for the direct and RIS-side links.

Array convention used throughout: every array is a half-wavelength ULA laid
along the x-axis, so a node seen along direction ``(dx, dy)`` sits at angle
``theta`` with ``sin(theta) = dx / hypot(dx, dy)`` (broadside is the y-axis).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, _check_seed
from .sensing import steering_vector

__all__ = [
    "ChannelSet",
    "pathloss_db",
    "sample_channels",
    "effective_channel",
    "effective_channels",
    "wrap_phases",
    "dump_channels_csv",
]

DIRECT_STREAM, RIS_BS_STREAM, UE_RIS_STREAM = 1, 2, 3


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Sampled channels of one scenario realisation.

    Attributes
    ----------
    h_direct : ndarray, shape (K, n_bs, n_ue)
        User-to-BS channels.
    g_ris_bs : ndarray, shape (n_bs, m_ris)
        RIS-to-BS channel.
    g_ue_ris : ndarray, shape (K, m_ris, n_ue)
        User-to-RIS channels.
    """

    h_direct: np.ndarray
    g_ris_bs: np.ndarray
    g_ue_ris: np.ndarray

    def __post_init__(self):
        k, n_bs, n_ue = self.h_direct.shape
        m = self.g_ris_bs.shape[1]
        if self.g_ris_bs.shape != (n_bs, m) or self.g_ue_ris.shape != (k, m, n_ue):
            raise ValueError("inconsistent channel shapes: "
                             f"{self.h_direct.shape}, {self.g_ris_bs.shape}, {self.g_ue_ris.shape}")
        for arr in (self.h_direct, self.g_ris_bs, self.g_ue_ris):
            if not np.all(np.isfinite(arr)):
                raise ValueError("channel entries must be finite")
            arr.setflags(write=False)

    @property
    def k_users(self) -> int:
        return self.h_direct.shape[0]

    @property
    def m_ris(self) -> int:
        return self.g_ris_bs.shape[1]

    def scaled(self, factor: float) -> "ChannelSet":
        """Copy whose every effective channel is ``factor`` times this one's.

        The direct links and the RIS-to-BS hop are scaled; the user-to-RIS
        hops are left alone so the cascade scales once, like the direct path.
        """
        return ChannelSet(self.h_direct * factor, self.g_ris_bs * factor, self.g_ue_ris.copy())

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return (np.array_equal(self.h_direct, other.h_direct)
                and np.array_equal(self.g_ris_bs, other.g_ris_bs)
                and np.array_equal(self.g_ue_ris, other.g_ue_ris))


def pathloss_db(d_m, exponent: float, pl0_db: float):
    """Log-distance path loss ``pl0_db - 10 * exponent * log10(d)`` in dB (negative)."""
    d = np.asarray(d_m, dtype=float)
    if np.any(d < 1.0):
        raise ValueError(f"distance below the 1 m reference: {d_m}")
    out = pl0_db - 10.0 * exponent * np.log10(d)
    return float(out) if out.ndim == 0 else out


def _amplitude(d, exponent, pl0_db):
    return np.sqrt(10.0 ** (pathloss_db(d, exponent, pl0_db) / 10.0))


def _cn(rng, shape):
    """Circularly-symmetric complex normal entries with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _sin_angle(src, dst) -> float:
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    return dx / np.hypot(dx, dy)


def _los(rx_pos, n_rx, tx_pos, n_tx):
    """Rank-one LoS matrix ``a_rx(arrival) a_tx(departure)^H``, shape (n_rx, n_tx)."""
    a_rx = steering_vector(np.arcsin(_sin_angle(rx_pos, tx_pos)), n_rx)
    a_tx = steering_vector(np.arcsin(_sin_angle(tx_pos, rx_pos)), n_tx)
    return np.outer(a_rx, a_tx.conj())


def sample_channels(s: Scenario, seed: int) -> ChannelSet:
    """Draw every channel of scenario ``s``.

    Direct links are Rayleigh, RIS-side links Rician with geometric LoS. Each
    link family has its own generator stream derived from ``seed``, so two
    scenarios sampled with the same seed share fading realisations wherever
    their shapes agree (common random numbers across RIS sizes).
    """
    seed = _check_seed(seed)
    k, n_bs, n_ue, m = s.k_users, s.n_bs, s.n_ue, s.m_ris
    users = s.user_positions

    rng = np.random.default_rng(np.random.SeedSequence([seed, DIRECT_STREAM]))
    d_direct = np.array([np.hypot(u[0] - s.bs_position[0], u[1] - s.bs_position[1]) for u in users])
    h_direct = _amplitude(d_direct, s.alpha_direct, s.pl0_db)[:, None, None] * _cn(rng, (k, n_bs, n_ue))

    if m == 0:
        return ChannelSet(h_direct, np.zeros((n_bs, 0), complex), np.zeros((k, 0, n_ue), complex))

    k_lin = 10.0 ** (s.rician_k_db / 10.0)
    w_los, w_nlos = np.sqrt(k_lin / (k_lin + 1.0)), np.sqrt(1.0 / (k_lin + 1.0))

    rng = np.random.default_rng(np.random.SeedSequence([seed, RIS_BS_STREAM]))
    d_rb = np.hypot(s.ris_position[0] - s.bs_position[0], s.ris_position[1] - s.bs_position[1])
    g_ris_bs = _amplitude(d_rb, s.alpha_reflect, s.pl0_db) * (
        w_los * _los(s.bs_position, n_bs, s.ris_position, m) + w_nlos * _cn(rng, (n_bs, m)))

    rng = np.random.default_rng(np.random.SeedSequence([seed, UE_RIS_STREAM]))
    nlos = _cn(rng, (k, m, n_ue))
    g_ue_ris = np.empty((k, m, n_ue), complex)
    for i, u in enumerate(users):
        d = np.hypot(u[0] - s.ris_position[0], u[1] - s.ris_position[1])
        g_ue_ris[i] = _amplitude(d, s.alpha_reflect, s.pl0_db) * (
            w_los * _los(s.ris_position, m, u, n_ue) + w_nlos * nlos[i])

    return ChannelSet(h_direct, g_ris_bs, g_ue_ris)


def wrap_phases(theta) -> np.ndarray:
    """Map phases into [0, 2*pi)."""
    out = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
    # mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(out >= 2.0 * np.pi, 0.0, out)


def _check_phases(c: ChannelSet, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1:] != (c.m_ris,):
        raise ValueError(f"expected {c.m_ris} phases, got shape {theta.shape}")
    return theta


def effective_channel(c: ChannelSet, theta, user: int) -> np.ndarray:
    """``h_direct[k] + G diag(exp(j theta)) F_k`` for one user, shape (n_bs, n_ue)."""
    theta = _check_phases(c, theta)
    if theta.ndim != 1:
        raise ValueError("effective_channel takes a single phase vector")
    if not 0 <= user < c.k_users:
        raise IndexError(f"user {user} out of range for {c.k_users} users")
    if c.m_ris == 0:
        return c.h_direct[user].copy()
    return c.h_direct[user] + (c.g_ris_bs * np.exp(1j * theta)) @ c.g_ue_ris[user]


def effective_channels(c: ChannelSet, theta) -> np.ndarray:
    """Effective channels of all users.

    ``theta`` may carry leading batch dimensions, shape (..., m_ris); the
    result has shape (..., K, n_bs, n_ue).
    """
    theta = _check_phases(c, theta)
    batch = theta.shape[:-1]
    if c.m_ris == 0:
        return np.broadcast_to(c.h_direct, batch + c.h_direct.shape).copy()
    g = c.g_ris_bs * np.exp(1j * theta)[..., None, :]          # (..., n_bs, M)
    return c.h_direct + g[..., None, :, :] @ c.g_ue_ris         # (..., K, n_bs, n_ue)


def dump_channels_csv(c: ChannelSet, path) -> None:
    """Write every complex entry as a (re, im) row. Debugging aid only."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["link", "user", "row", "col", "re", "im"])
        for k in range(c.k_users):
            for (r, col), v in np.ndenumerate(c.h_direct[k]):
                w.writerow(["h_direct", k, r, col, repr(float(v.real)), repr(float(v.imag))])
        for (r, col), v in np.ndenumerate(c.g_ris_bs):
            w.writerow(["g_ris_bs", "", r, col, repr(float(v.real)), repr(float(v.imag))])
        for k in range(c.k_users):
            for (r, col), v in np.ndenumerate(c.g_ue_ris[k]):
                w.writerow(["g_ue_ris", k, r, col, repr(float(v.real)), repr(float(v.imag))])
