"""Seeded experiment driver: energy sweeps, beampatterns and environment traces.

Every trial derives its own seed from the master seed and its grid
coordinates, so trials are independent work items that can run in any order
(or in parallel) and still produce byte-identical result files.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .beamforming import build_beamformers
from .channel import effective_channels, sample_channels
from .mec import evaluate
from .optimize import CemConfig, IsccEnv, cem_optimize, plan_offloading
from .scenario import _check_seed, scenario_digest, scenario_from_config
from .sensing import steering_vector

__all__ = [
    "TrialRecord",
    "trial_seed",
    "run_trial",
    "run_energy_sweep",
    "summarize",
    "run_beampattern",
    "run_env_trace",
    "replay_trace",
    "parse_int_list",
    "parse_angles",
]

log = logging.getLogger(__name__)

OPTIMIZERS = ("ao", "cem")
RESULT_FIELDS = ("master_seed", "trial_index", "scenario_digest", "k_users", "m_ris", "optimizer",
                 "total_energy_j", "n_violations", "mean_beampattern_w")
SUMMARY_FIELDS = ("k_users", "m_ris", "optimizer", "n_trials", "mean_energy_j", "stderr_energy_j",
                  "mean_violations", "mean_beampattern_w")
REL_DB_FLOOR = -300.0


@dataclass(frozen=True)
class TrialRecord:
    master_seed: int
    trial_index: int
    scenario_digest: str
    k_users: int
    m_ris: int
    optimizer: str
    total_energy_j: float
    n_violations: int
    mean_beampattern_w: float
    wall_time_s: float


def trial_seed(master: int, *keys: int) -> int:
    """64-bit seed derived from the master seed and integer coordinates."""
    lo, hi = np.random.SeedSequence([_check_seed(master), *map(int, keys)]).generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            raise ValueError(f"refusing to persist non-finite value {v}")
        return repr(v)
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def run_trial(master: int, k_users: int, m_ris: int, trial: int, optimizer: str = "ao",
              config: dict | None = None, cem_config: CemConfig | None = None) -> TrialRecord:
    """Build, sample, optimise and score one sweep cell trial."""
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; choose from {OPTIMIZERS}")
    start = time.perf_counter()
    seed = trial_seed(master, k_users, m_ris, trial)
    s = scenario_from_config(config, seed, k_users, m_ris)
    c = sample_channels(s, seed)
    if optimizer == "ao":
        report = evaluate(s, c, plan_offloading(s, c))
    else:
        base = cem_config or CemConfig()
        cfg = replace(base, seed=seed)
        _, report = cem_optimize(s, c, cfg)
    return TrialRecord(
        master_seed=master,
        trial_index=trial,
        scenario_digest=f"{scenario_digest(s):016x}",
        k_users=k_users,
        m_ris=m_ris,
        optimizer=optimizer,
        total_energy_j=report.total_energy_j,
        n_violations=report.n_violations,
        mean_beampattern_w=float(np.mean(report.beampattern_w)),
        wall_time_s=time.perf_counter() - start,
    )


def _run_trial_args(args):
    return run_trial(*args)


def _map(fn, jobs, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def summarize(records) -> list[dict]:
    """Mean and standard error of total energy per (K, M, optimizer) cell."""
    cells: dict[tuple, list] = {}
    for r in records:
        cells.setdefault((r.k_users, r.m_ris, r.optimizer), []).append(r)
    out = []
    for (k, m, opt), rs in sorted(cells.items()):
        e = np.array([r.total_energy_j for r in rs])
        n = len(rs)
        out.append({
            "k_users": k,
            "m_ris": m,
            "optimizer": opt,
            "n_trials": n,
            "mean_energy_j": float(e.mean()),
            "stderr_energy_j": float(e.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
            "mean_violations": float(np.mean([r.n_violations for r in rs])),
            "mean_beampattern_w": float(np.mean([r.mean_beampattern_w for r in rs])),
        })
    return out


def run_energy_sweep(users, elements, trials: int, seed: int, optimizer: str = "ao", out_dir=None,
                     workers: int = 1, config: dict | None = None,
                     cem_config: CemConfig | None = None) -> list[TrialRecord]:
    """Energy versus user count and RIS size.

    Writes ``trials.csv`` (one row per trial), ``summary.csv`` (one row per
    cell) and ``timing.csv`` (wall times, kept apart so result files stay
    reproducible) into ``out_dir`` when given.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; choose from {OPTIMIZERS}")
    _check_seed(seed)
    jobs = [(seed, int(k), int(m), t, optimizer, config, cem_config)
            for k in users for m in elements for t in range(trials)]
    log.info("energy sweep: %d trials with %d worker(s)", len(jobs), workers)
    records = _map(_run_trial_args, jobs, workers)
    records.sort(key=lambda r: (r.k_users, r.m_ris, r.trial_index))
    if out_dir is not None:
        out = Path(out_dir)
        _write_csv(out / "trials.csv", RESULT_FIELDS,
                   ([getattr(r, f) for f in RESULT_FIELDS] for r in records))
        _write_csv(out / "summary.csv", SUMMARY_FIELDS,
                   ([row[f] for f in SUMMARY_FIELDS] for row in summarize(records)))
        _write_csv(out / "timing.csv", ("k_users", "m_ris", "trial_index", "wall_time_s"),
                   ((r.k_users, r.m_ris, r.trial_index, r.wall_time_s) for r in records))
    return records


def _beampattern_trial(args):
    """Per-user mean gain curves (no RIS, RIS) of one trial.

    The last entry of each curve is the gain toward the sensing direction.
    """
    config, angles_rad, master, trial, fixed_alpha = args
    seed = trial_seed(master, trial)
    ris = scenario_from_config(config, seed)
    grid = np.append(angles_rad, ris.sense_angle_rad)
    curves = []
    for s in (ris.replace(m_ris=0), ris):
        c = sample_channels(s, seed)
        ctrl = plan_offloading(s, c)
        alpha = ctrl.alpha_sense if fixed_alpha is None else np.full(s.k_users, fixed_alpha)
        w = build_beamformers(effective_channels(c, ctrl.phases), s, alpha)
        a = steering_vector(grid, s.n_ue)                                   # (angles, n)
        curves.append((s.p_max_w * np.abs(w.conj() @ a.T) ** 2).mean(axis=0))
    return curves[0], curves[1]


def run_beampattern(config: dict | None, angles_deg, seed: int, trials: int, out_dir=None,
                    workers: int = 1, fixed_alpha: float | None = None) -> dict:
    """Mean per-user transmit beampattern with and without the RIS.

    Both variants of a trial share the seed, hence users, tasks and direct
    channels; the no-RIS variant is the same scenario with ``m_ris = 0``.
    Writes ``beampattern.csv`` (mean curves) and ``beampattern_trials.csv``
    (per-trial gain toward the sensing direction). ``fixed_alpha`` replaces
    the planned sensing weights of every user when building the beams.
    """
    angles_deg = np.asarray(angles_deg, dtype=float)
    if angles_deg.size == 0:
        raise ValueError("angle grid is empty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if fixed_alpha is not None and not 0.0 <= fixed_alpha <= 1.0:
        raise ValueError(f"fixed_alpha must lie in [0, 1], got {fixed_alpha}")
    _check_seed(seed)
    probe = scenario_from_config(config, trial_seed(seed, 0))
    jobs = [(config, np.deg2rad(angles_deg), seed, t, fixed_alpha) for t in range(trials)]
    results = _map(_beampattern_trial, jobs, workers)
    no_ris = np.array([r[0] for r in results])
    ris = np.array([r[1] for r in results])

    peak = probe.p_max_w * probe.n_ue
    result = {
        "angle_deg": angles_deg,
        "mean_gain_no_ris": no_ris[:, :-1].mean(axis=0),
        "mean_gain_ris": ris[:, :-1].mean(axis=0),
        "target_gain_no_ris": no_ris[:, -1],
        "target_gain_ris": ris[:, -1],
    }
    if out_dir is not None:
        out = Path(out_dir)

        def rel_db(g):
            return np.where(g > 0, 10 * np.log10(np.where(g > 0, g, 1.0) / peak), REL_DB_FLOOR)

        _write_csv(out / "beampattern.csv",
                   ("angle_deg", "mean_gain_no_ris", "mean_gain_ris", "rel_db_no_ris", "rel_db_ris"),
                   zip(angles_deg, result["mean_gain_no_ris"], result["mean_gain_ris"],
                       rel_db(result["mean_gain_no_ris"]), rel_db(result["mean_gain_ris"])))
        _write_csv(out / "beampattern_trials.csv",
                   ("trial_index", "seed", "gain_at_target_no_ris", "gain_at_target_ris"),
                   ((t, trial_seed(seed, t), a, b) for t, (a, b)
                    in enumerate(zip(result["target_gain_no_ris"], result["target_gain_ris"]))))
    return result


def run_env_trace(seed: int, n_actions: int, out_file=None, config: dict | None = None,
                  k_users: int | None = None, m_ris: int | None = None) -> list[dict]:
    """Random valid actions and their rewards, one JSON object per line.

    Each line holds the seed, step index, state, action and reward, enough to
    replay the interaction against any conforming environment.
    """
    if n_actions < 1:
        raise ValueError(f"n_actions must be >= 1, got {n_actions}")
    _check_seed(seed)
    cfg = dict(config or {})
    k = k_users if k_users is not None else cfg.get("k_users", 16)
    m = m_ris if m_ris is not None else cfg.get("m_ris", 40)
    if "user_positions" in cfg:
        k = len(cfg["user_positions"])
    env = IsccEnv(k, m, config)
    state = env.reset(seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 99]))
    records = []
    for i in range(n_actions):
        action = env.sample_action(rng)
        reward, _ = env.step(action)
        records.append({
            "seed": seed,
            "k_users": k,
            "m_ris": m,
            "step": i,
            "state": state.tolist(),
            "action": action.tolist(),
            "reward": reward,
        })
    if out_file is not None:
        path = Path(out_file)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                for rec in records:
                    fh.write(json.dumps(rec, allow_nan=False) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return records


def replay_trace(records, config: dict | None = None) -> list[float]:
    """Recompute the rewards of a trace (records or a JSON-lines path)."""
    if isinstance(records, (str, Path)):
        with open(records, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
    rewards = []
    env, key = None, None
    for rec in records:
        if (rec["seed"], rec["k_users"], rec["m_ris"]) != key:
            key = (rec["seed"], rec["k_users"], rec["m_ris"])
            env = IsccEnv(rec["k_users"], rec["m_ris"], config)
            env.reset(rec["seed"])
        rewards.append(env.step(np.array(rec["action"]))[0])
    return rewards


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ValueError("empty list")
    return values


def parse_angles(text: str) -> np.ndarray:
    """``start:stop:step`` in degrees, stop inclusive; or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(n)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ValueError(f"bad angle grid {text!r}; use start:stop:step") from None

