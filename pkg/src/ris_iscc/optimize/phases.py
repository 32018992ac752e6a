"""RIS phase selection by element-wise coordinate ascent on a discrete grid.

For fixed beamformers the channel objective

    J(theta) = sum_k |(h_k + G diag(phi) F_k) w_k|^2,    phi = exp(j theta)

is a Hermitian quadratic form in ``phi``::

    J = c0 + 2 Re(q^H phi) + phi^H A phi

with ``d_k = h_k w_k``, ``s_k = F_k w_k``, ``A = (G^H G) * (S^H S)`` (element-wise)
and ``q_m = sum_k conj(s_km) (G^H d_k)_m``. Updating one element then costs
O(M) and many starting points can be advanced together.
"""

from __future__ import annotations

import numpy as np

from ..channel import ChannelSet, effective_channels

__all__ = [
    "GRID_SIZE",
    "MonotonicityError",
    "phase_grid",
    "phase_objective",
    "phase_coordinate_ascent",
    "optimize_phases",
    "sequential_phase_init",
]

GRID_SIZE = 64
DEFAULT_PASSES = 10


class MonotonicityError(RuntimeError):
    """An optimizer step that must not lose objective value did."""


def phase_grid(size: int = GRID_SIZE) -> np.ndarray:
    return 2.0 * np.pi * np.arange(size) / size


def phase_objective(c: ChannelSet, beamformers, theta) -> float:
    """``sum_k |H_k(theta) w_k|^2`` computed from the effective channels."""
    H = effective_channels(c, np.asarray(theta, dtype=float))
    w = np.asarray(beamformers, dtype=complex)
    return float(np.sum(np.abs(H @ w[..., None]) ** 2))


class _QuadraticForm:
    def __init__(self, c: ChannelSet, beamformers):
        w = np.asarray(beamformers, dtype=complex)
        if w.shape != (c.k_users, c.h_direct.shape[2]):
            raise ValueError(f"expected beamformers of shape {(c.k_users, c.h_direct.shape[2])}, got {w.shape}")
        G = c.g_ris_bs
        d = np.einsum("kbu,ku->kb", c.h_direct, w)
        s = np.einsum("kmu,ku->km", c.g_ue_ris, w)
        self.c0 = float(np.sum(np.abs(d) ** 2))
        self.A = (G.conj().T @ G) * (s.conj().T @ s)
        self.q = np.sum(s.conj() * (d @ G.conj()), axis=0)

    def value(self, phi) -> np.ndarray:
        """J for each row of ``phi`` (shape (S, M))."""
        lin = 2.0 * np.real(phi @ self.q.conj())
        quad = np.real(np.einsum("sm,mn,sn->s", phi.conj(), self.A, phi))
        return self.c0 + lin + quad


def _ascend(form: _QuadraticForm, theta, passes: int, trace=None):
    """Coordinate ascent from every row of ``theta`` (shape (S, M)) in lockstep.

    Returns the final phases; raises MonotonicityError if any update would
    lower J. ``trace``, when given, receives J of row 0 after every update.
    """
    grid = phase_grid()
    unit = np.exp(1j * grid)
    theta = np.array(theta, dtype=float)
    phi = np.exp(1j * theta)
    A, q = form.A, form.q
    y = phi @ A.T                                     # A phi, per row
    rows = np.arange(theta.shape[0])
    j_run = form.value(phi)
    for _ in range(passes):
        moved = False
        j_pass = j_run
        for m in range(theta.shape[1]):
            t = q[m] + y[:, m] - A[m, m] * phi[:, m]
            cand = 2.0 * np.real(unit.conj()[None, :] * t[:, None])       # (S, G)
            current = 2.0 * np.real(phi[:, m].conj() * t)
            best = np.argmax(cand, axis=1)
            gain = cand[rows, best] - current
            # strict improvement only: ties and off-grid starting phases stay put
            take = gain > 0
            step = np.where(take, gain, 0.0)
            if np.any(step < 0):
                raise MonotonicityError(f"element {m} update lowered the objective by {-step.min()}")
            if np.any(take):
                moved = True
                new_phi = np.where(take, unit[best], phi[:, m])
                y += np.outer(new_phi - phi[:, m], A[:, m])
                theta[:, m] = np.where(take, grid[best], theta[:, m])
                phi[:, m] = new_phi
            j_run = j_run + step
            if trace is not None:
                trace.append(float(j_run[0]))
        # resync the running value and confirm the pass did not lose ground
        j_run = form.value(phi)
        if np.any(j_run < j_pass - 1e-9 * (np.abs(j_pass) + form.c0)):
            raise MonotonicityError("objective decreased over a coordinate-ascent pass")
        if not moved:
            break
    return theta


def phase_coordinate_ascent(s, c: ChannelSet, beamformers, init, passes: int = DEFAULT_PASSES,
                            trace: list | None = None) -> np.ndarray:
    """Single-start coordinate ascent over the 64-point phase grid.

    Sweeps elements ``0..M-1`` up to ``passes`` times (stopping early once a
    full sweep changes nothing). Each element moves to the grid phase that
    maximises J with the others held fixed, and only if that strictly
    improves J, so J never decreases.
    """
    if c.m_ris == 0:
        raise ValueError("no RIS elements to optimise")
    init = np.asarray(init, dtype=float)
    if init.shape != (c.m_ris,):
        raise ValueError(f"expected {c.m_ris} initial phases, got shape {init.shape}")
    form = _QuadraticForm(c, beamformers)
    return _ascend(form, init[None, :], passes, trace)[0]


def sequential_phase_init(c: ChannelSet, beamformers) -> np.ndarray:
    """Switch elements on one at a time, each at its best grid phase.

    Every addition keeps J at least at its previous value (the grid average
    of the cross term is zero), so the result is never worse than having no
    RIS at all.
    """
    return _sequential(_QuadraticForm(c, beamformers))


def _sequential(form: _QuadraticForm) -> np.ndarray:
    grid = phase_grid()
    unit = np.exp(1j * grid)
    m_ris = form.q.shape[0]
    phi = np.zeros(m_ris, complex)
    theta = np.zeros(m_ris)
    for m in range(m_ris):
        t = form.q[m] + form.A[m, :m] @ phi[:m]
        best = int(np.argmax(2.0 * np.real(unit.conj() * t)))
        phi[m] = unit[best]
        theta[m] = grid[best]
    return theta


def optimize_phases(s, c: ChannelSet, beamformers, init=None, passes: int = DEFAULT_PASSES) -> np.ndarray:
    """Multi-start grid coordinate ascent.

    Starts from ``init``, from :func:`sequential_phase_init` and from each of
    the 64 uniform settings (all elements at one grid phase), runs the ascent
    from all of them together and keeps the best end point. Ties go to the
    earliest start, so feeding the output back in as ``init`` returns it
    unchanged.
    """
    if c.m_ris == 0:
        raise ValueError("no RIS elements to optimise")
    form = _QuadraticForm(c, beamformers)
    starts = [_sequential(form)]
    if init is not None:
        init = np.asarray(init, dtype=float)
        if init.shape != (c.m_ris,):
            raise ValueError(f"expected {c.m_ris} initial phases, got shape {init.shape}")
        starts.insert(0, init)
    rot = np.repeat(phase_grid()[:, None], c.m_ris, axis=1)
    theta0 = np.vstack([np.array(starts), rot])
    j0 = form.value(np.exp(1j * theta0))
    theta = _ascend(form, theta0, passes)
    j = form.value(np.exp(1j * theta))
    if np.any(j < j0 - 1e-9 * np.abs(j0)):
        raise MonotonicityError("coordinate ascent ended below its starting objective")
    return theta[int(np.argmax(j))]
