"""Scenario construction for the RIS-assisted sensing/communication/computation network.

A :class:`Scenario` is an immutable description of one deployment: node
geometry, array sizes, radio and compute constants and the per-user tasks.
Everything random about a scenario (user drop, task sizes) is drawn from a
single integer seed, so equal ``(k_users, m_ris, seed)`` always produce equal
values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Task",
    "Scenario",
    "build_default_scenario",
    "scenario_digest",
    "scenario_from_config",
    "load_scenario_json",
    "save_scenario_json",
]

# Stream keys; scenario draws never share a generator with channel draws.
SCENARIO_STREAM = 0

BS_POSITION = (-200.0, 0.0)
RIS_POSITION = (0.0, 0.0)
USER_CENTER = (0.0, 30.0)
USER_RADIUS_M = 10.0


@dataclass(frozen=True)
class Task:
    """Computation task of one user.

    Parameters
    ----------
    bits : float
        Input data size in bits.
    cycles_per_bit : float
        CPU cycles required per input bit.
    """

    bits: float
    cycles_per_bit: float

    def __post_init__(self):
        if not (self.bits > 0 and np.isfinite(self.bits)):
            raise ValueError(f"task bits must be positive and finite, got {self.bits}")
        if not (self.cycles_per_bit > 0 and np.isfinite(self.cycles_per_bit)):
            raise ValueError(f"cycles_per_bit must be positive and finite, got {self.cycles_per_bit}")

    @property
    def cycles(self) -> float:
        return self.bits * self.cycles_per_bit


@dataclass(frozen=True)
class Scenario:
    """Immutable world description. All quantities in SI units.

    Positions are 2-D ``(x, y)`` tuples in meters. ``m_ris == 0`` means the
    deployment has no RIS; the RIS fields are then inert.
    """

    bs_position: tuple[float, float]
    ris_position: tuple[float, float]
    user_positions: tuple[tuple[float, float], ...]
    tasks: tuple[Task, ...]
    n_bs: int = 16
    n_ue: int = 16
    m_ris: int = 40
    bandwidth_hz: float = 2e6
    noise_power_dbm: float = -115.0
    p_max_w: float = 0.5
    alpha_direct: float = 3.6
    alpha_reflect: float = 2.2
    pl0_db: float = -30.0
    rician_k_db: float = 10.0
    f_local_hz: float = 1e9
    f_edge_hz: float = 10e9
    kappa: float = 1e-28
    t_max_s: float = 1.0
    sense_angle_rad: float = 0.0
    sense_floor_frac: float = 0.5

    def __post_init__(self):
        # Normalise containers so equality and hashing do not depend on the
        # caller passing lists, arrays or tuples.
        object.__setattr__(self, "bs_position", _point(self.bs_position))
        object.__setattr__(self, "ris_position", _point(self.ris_position))
        object.__setattr__(self, "user_positions", tuple(_point(p) for p in self.user_positions))
        object.__setattr__(self, "tasks", tuple(
            t if isinstance(t, Task) else Task(**t) for t in self.tasks))
        self._validate()

    def _validate(self):
        k = len(self.user_positions)
        if k < 1:
            raise ValueError("a scenario needs at least one user")
        if len(self.tasks) != k:
            raise ValueError(f"got {len(self.tasks)} tasks for {k} users")
        for name in ("n_bs", "n_ue"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")
        if int(self.m_ris) != self.m_ris or self.m_ris < 0:
            raise ValueError(f"m_ris must be an integer >= 0, got {self.m_ris}")
        scalars = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                   if f.type in ("float", float)}
        for name, value in scalars.items():
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        for name in ("bandwidth_hz", "p_max_w", "t_max_s", "f_local_hz", "f_edge_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if not 0.0 <= self.sense_floor_frac <= 1.0:
            raise ValueError(f"sense_floor_frac must lie in [0, 1], got {self.sense_floor_frac}")
        for i, task in enumerate(self.tasks):
            if task.cycles / self.f_local_hz > self.t_max_s:
                raise ValueError(
                    f"task {i} cannot meet t_max={self.t_max_s} s even locally "
                    f"({task.cycles / self.f_local_hz:.4g} s)")
        # Every link has to start at or beyond the 1 m reference distance.
        for i, pos in enumerate(self.user_positions):
            if _dist(pos, self.bs_position) < 1.0:
                raise ValueError(f"user {i} is closer than 1 m to the BS")
            if self.m_ris and _dist(pos, self.ris_position) < 1.0:
                raise ValueError(f"user {i} is closer than 1 m to the RIS")
        if self.m_ris and _dist(self.ris_position, self.bs_position) < 1.0:
            raise ValueError("RIS is closer than 1 m to the BS")

    @property
    def k_users(self) -> int:
        return len(self.user_positions)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "tasks":
                value = [{"bits": t.bits, "cycles_per_bit": t.cycles_per_bit} for t in value]
            elif f.name == "user_positions":
                value = [list(p) for p in value]
            elif f.name in ("bs_position", "ris_position"):
                value = list(value)
            d[f.name] = value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        kwargs = dict(d)
        kwargs["tasks"] = tuple(Task(float(t["bits"]), float(t["cycles_per_bit"]))
                                for t in d["tasks"])
        return cls(**kwargs)


def _point(p) -> tuple[float, float]:
    x, y = p
    return (float(x), float(y))


def _dist(a, b) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def _scalar_defaults() -> dict:
    return {f.name: f.default for f in dataclasses.fields(Scenario)
            if f.default is not dataclasses.MISSING}


def build_default_scenario(k_users: int, m_ris: int, seed: int, **overrides) -> Scenario:
    """Drop ``k_users`` users around the cluster center and draw their tasks.

    Users are placed uniformly in a 10 m disk around (0, 30) m; task sizes are
    uniform in [0.4, 0.5] Mbit and cycles-per-bit uniform integers in
    [800, 1000]. The draws do not depend on ``m_ris`` so RIS and no-RIS
    variants built from one seed share users and tasks.

    Extra keyword arguments override any scalar Scenario field.
    """
    if int(k_users) != k_users or k_users < 1:
        raise ValueError(f"k_users must be an integer >= 1, got {k_users}")
    if int(m_ris) != m_ris or m_ris < 0:
        raise ValueError(f"m_ris must be an integer >= 0, got {m_ris}")
    k_users, m_ris = int(k_users), int(m_ris)
    bad = set(overrides) - set(_scalar_defaults())
    if bad:
        raise ValueError(f"cannot override {sorted(bad)}")

    rng = np.random.default_rng(np.random.SeedSequence([_check_seed(seed), SCENARIO_STREAM]))
    radius = USER_RADIUS_M * np.sqrt(rng.uniform(0.0, 1.0, k_users))
    angle = rng.uniform(0.0, 2.0 * np.pi, k_users)
    xs = USER_CENTER[0] + radius * np.cos(angle)
    ys = USER_CENTER[1] + radius * np.sin(angle)
    bits = rng.uniform(0.4e6, 0.5e6, k_users)
    cpb = rng.integers(800, 1000, size=k_users, endpoint=True)

    return Scenario(
        bs_position=BS_POSITION,
        ris_position=RIS_POSITION,
        user_positions=tuple(zip(xs.tolist(), ys.tolist())),
        tasks=tuple(Task(float(b), float(c)) for b, c in zip(bits, cpb)),
        m_ris=m_ris,
        **overrides,
    )


def _check_seed(seed) -> int:
    if int(seed) != seed or seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed}")
    return int(seed)


def scenario_digest(s: Scenario) -> int:
    """64-bit content hash of every scenario field.

    Built from a canonical JSON rendering (sorted keys, floats via ``repr``)
    so it does not depend on how the scenario was constructed in memory.
    """
    d = s.to_dict()
    canon = json.dumps(_floatify(d), sort_keys=True, separators=(",", ":"))
    return int.from_bytes(hashlib.blake2b(canon.encode("utf-8"), digest_size=8).digest(), "big")


def _floatify(obj):
    # n_bs and friends stay ints; every other number is hashed as a float so
    # 900 and 900.0 collide as they should.
    if isinstance(obj, dict):
        return {k: (v if k in ("n_bs", "n_ue", "m_ris") else _floatify(v)) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_floatify(v) for v in obj]
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return float(obj)
    return obj


def scenario_from_config(config: dict | None, seed: int, k_users: int | None = None,
                         m_ris: int | None = None) -> Scenario:
    """Turn a scenario JSON document into a Scenario.

    A document carrying ``user_positions`` and ``tasks`` is a complete
    scenario and is used as is (``m_ris`` may still be overridden). Anything
    else is a partial document: optional ``k_users``/``m_ris`` plus scalar
    overrides for :func:`build_default_scenario`, drawn with ``seed``.
    """
    config = dict(config or {})
    if "user_positions" in config or "tasks" in config:
        s = Scenario.from_dict(config)
        if k_users is not None and k_users != s.k_users:
            raise ValueError(f"fixed scenario has {s.k_users} users, asked for {k_users}")
        if m_ris is not None and m_ris != s.m_ris:
            s = s.replace(m_ris=m_ris)
        return s
    k = config.pop("k_users", 16) if k_users is None else k_users
    config.pop("k_users", None)
    m = config.pop("m_ris", 40) if m_ris is None else m_ris
    config.pop("m_ris", None)
    return build_default_scenario(k, m, seed, **config)


def load_scenario_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: scenario config must be a JSON object")
    return doc


def save_scenario_json(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=2) + "\n", encoding="utf-8")
