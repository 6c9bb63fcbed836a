"""Explicit RK4 time stepping with residual-scaled step clipping."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

METHODS = ("rk4_fixed", "rk4_adaptive_clip")
CLIP_FACTOR = 0.5


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4_adaptive_clip"
    dt: float = 1e-4
    t_end: float = 2.0
    stop_residual: float = 1e-8
    max_steps: int = 2_000_000
    record_stride: int = 10
    t0: float = 0.0
    stop_on_settle: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")
        if not self.stop_residual > 0:
            raise ValueError("stop_residual must be positive")
        if self.max_steps < 1 or self.record_stride < 1:
            raise ValueError("max_steps and record_stride must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    residual_norms: np.ndarray
    error_norms: Optional[np.ndarray] = None
    settled_at: Optional[float] = None
    terminated_reason: str = "t_end"
    steps: int = 0
    label: str = ""
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_error(self) -> Optional[float]:
        return None if self.error_norms is None else float(self.error_norms[-1])


def _rk4_step(rhs, t, w, h, k1=None):
    if k1 is None:
        k1 = rhs(t, w)
    k2 = rhs(t + 0.5 * h, w + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, w + 0.5 * h * k2)
    k4 = rhs(t + h, w + h * k3)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray], w0, cfg: IntegratorConfig,
              residual: Optional[Callable[[np.ndarray], float]] = None,
              w_star=None) -> Trajectory:
    """Integrate ``dw/dt = rhs(t, w)`` from ``cfg.t0``.

    ``residual(w)`` measures distance from equilibrium (default: ``|w|``).
    With ``rk4_adaptive_clip`` each step is ``min(dt, 0.5*residual/|rhs|)``
    so no step travels more than half the residual scale.  States are
    recorded every ``record_stride`` steps, at the first settled step and at
    the end.  Stops when the residual drops to ``stop_residual`` (if
    ``stop_on_settle``), at ``t_end``, after ``max_steps``, or on a
    non-finite state.
    """
    if residual is None:
        residual = lambda w: float(np.linalg.norm(w))  # noqa: E731
    w = np.array(w0, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)):
        raise ValueError("w0 must be a finite vector")
    ws = None if w_star is None else np.asarray(w_star, dtype=float)
    clip = cfg.method == "rk4_adaptive_clip"
    end_slack = 1e-12 * max(1.0, abs(cfg.t_end))

    t = cfg.t0
    r = residual(w)
    times, states, res = [t], [w.copy()], [r]
    settled_at = t if r <= cfg.stop_residual else None
    reason = "settled" if settled_at is not None and cfg.stop_on_settle else None
    steps = 0

    while reason is None:
        if steps >= cfg.max_steps:
            reason = "max_steps"
            break
        h = min(cfg.dt, cfg.t_end - t)
        f = None
        if clip:
            f = rhs(t, w)
            fn = float(np.linalg.norm(f))
            if fn > 0.0:
                h = min(h, CLIP_FACTOR * r / fn)
        w_new = _rk4_step(rhs, t, w, h, f)
        steps += 1
        if not np.all(np.isfinite(w_new)):
            reason = "nonfinite"
            break
        t_new = t + h
        if t_new <= t:  # step below time resolution
            reason = "max_steps"
            break
        t, w = t_new, w_new
        r = residual(w)
        just_settled = settled_at is None and r <= cfg.stop_residual
        if just_settled:
            settled_at = t
            if cfg.stop_on_settle:
                reason = "settled"
        at_end = t >= cfg.t_end - end_slack
        if at_end and reason is None:
            reason = "t_end"
        if just_settled or reason is not None or steps % cfg.record_stride == 0:
            times.append(t)
            states.append(w.copy())
            res.append(r)

    if times[-1] != t:
        times.append(t)
        states.append(w.copy())
        res.append(r)

    states_arr = np.array(states)
    err = None if ws is None else np.linalg.norm(states_arr - ws, axis=1)
    return Trajectory(np.array(times), states_arr, np.array(res), err, settled_at, reason, steps)


def detect_settling(traj: Trajectory, tol: float, use: str = "error") -> Optional[float]:
    """First time the chosen norm reaches ``tol``, linearly interpolated."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if use == "error":
        if traj.error_norms is None:
            raise ValueError("trajectory has no error norms (no known solution)")
        vals = traj.error_norms
    elif use == "residual":
        vals = traj.residual_norms
    else:
        raise ValueError("use must be 'error' or 'residual'")
    hits = np.nonzero(vals <= tol)[0]
    if hits.size == 0:
        return None
    i = int(hits[0])
    if i == 0:
        return float(traj.times[0])
    t0, t1 = traj.times[i - 1], traj.times[i]
    v0, v1 = vals[i - 1], vals[i]
    return float(t0 + (v0 - tol) / (v0 - v1) * (t1 - t0))


def lyapunov_series(traj: Trajectory, w_star) -> np.ndarray:
    w_star = np.asarray(w_star, dtype=float)
    if traj.states.shape[1] != w_star.size:
        raise ValueError("dimension mismatch between trajectory and w*")
    d = traj.states - w_star
    return 0.5 * np.einsum("ij,ij->i", d, d)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(traj: Trajectory, path) -> Path:
    """Header ``t,w1,...,wl,residual,error``; error left blank without w*."""
    path = Path(path)
    dim = traj.states.shape[1]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", *[f"w{i + 1}" for i in range(dim)], "residual", "error"])
        for k in range(len(traj)):
            err = "" if traj.error_norms is None else _fmt(traj.error_norms[k])
            writer.writerow([_fmt(traj.times[k]), *map(_fmt, traj.states[k]),
                             _fmt(traj.residual_norms[k]), err])
    return path


def read_csv(path) -> Trajectory:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    dim = len(header) - 3
    data = np.array([[float(x) if x else np.nan for x in row] for row in body])
    err = data[:, -1]
    return Trajectory(data[:, 0], data[:, 1:1 + dim], data[:, 1 + dim],
                      None if np.all(np.isnan(err)) else err)
