"""Thinning simulation of exponential Hawkes processes and event-log I/O."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError, SimulationAbort
from .model import HawkesModel

NEG_INTENSITY_TOL = 1e-9
MAX_BOUND = 1e8


@dataclass(frozen=True)
class EventLog:
    """Arrival times of ``m`` processes observed on ``(0, T]``."""

    times: tuple
    T: float
    provenance: dict | None = None

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise SchemaError(f"horizon must be positive and finite, got {self.T}")
        seqs = []
        for i, ts in enumerate(self.times):
            ts = np.array(ts, dtype=float).ravel()
            if ts.size:
                if not np.all(np.isfinite(ts)):
                    raise SchemaError(f"process {i}: non-finite timestamp")
                if ts.min() <= 0 or ts.max() > self.T:
                    raise SchemaError(f"process {i}: timestamps must lie in (0, T]")
                ts = np.sort(ts)
                dup = np.diff(ts) == 0
                if dup.any():
                    warnings.warn(f"process {i}: merged {int(dup.sum())} duplicate timestamps")
                    ts = np.unique(ts)
            ts.setflags(write=False)
            seqs.append(ts)
        object.__setattr__(self, "times", tuple(seqs))

    @property
    def m(self) -> int:
        return len(self.times)

    def counts(self) -> np.ndarray:
        return np.array([ts.size for ts in self.times])

    def merged(self):
        """All events as ``(times, process_index)`` sorted by time."""
        t = np.concatenate(self.times) if self.m else np.zeros(0)
        p = np.concatenate([np.full(ts.size, i) for i, ts in enumerate(self.times)]) if self.m else np.zeros(0, int)
        order = np.argsort(t, kind="stable")
        return t[order], p[order].astype(int)


def simulate(model: HawkesModel, T: float, seed: int, max_bound: float = MAX_BOUND) -> EventLog:
    """Ogata thinning with the recursive per-mode state ``s[i, d]``.

    Between events the sum of positive parts of the state can only shrink,
    so ``sum_i v_i + max(s, 0)`` bounds the total intensity until the next
    arrival even for mixed-sign kernels.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    k = model.kernel
    m, betas = k.m, k.betas
    # jumps[k] is the (m, D) state increment caused by an event of process k
    jumps = np.transpose(k.coeffs, (2, 1, 0)).copy()
    v = model.v
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    state = np.zeros((m, k.D))
    t = 0.0
    out = [[] for _ in range(m)]
    while True:
        bound = float(v.sum() + np.clip(state, 0, None).sum())
        if not bound < max_bound:
            raise SimulationAbort(f"intensity bound {bound:.3g} exceeded {max_bound:g} at t={t:.4g}")
        dt = rng.exponential(1.0 / bound)
        t += dt
        if t > T:
            break
        state *= np.exp(-betas * dt)
        lam = v + state.sum(axis=1)
        if lam.min() < -NEG_INTENSITY_TOL:
            raise SimulationAbort(f"negative intensity {lam.min():.3g} at t={t:.6g}")
        lam = np.clip(lam, 0, None)
        u = rng.uniform() * bound
        cum = np.cumsum(lam)
        if u >= cum[-1]:
            continue
        i = int(np.searchsorted(cum, u, side="right"))
        out[i].append(t)
        state += jumps[i]
    return EventLog(tuple(out), float(T), {"seed": int(seed)})


def intensity_trace(model: HawkesModel, log: EventLog, grid) -> np.ndarray:
    """Exact conditional intensities at the (left-continuous) grid times; shape ``(m, len(grid))``.

    At an arrival time the value excludes the jump caused by that arrival.
    """
    grid = np.asarray(grid, dtype=float)
    k = model.kernel
    order = np.argsort(grid, kind="stable")
    ev_t, ev_p = log.merged()
    jumps = np.transpose(k.coeffs, (2, 1, 0))
    state = np.zeros((k.m, k.D))
    t_state = 0.0
    e = 0
    out = np.empty((k.m, grid.size))
    for g in order:
        tg = grid[g]
        while e < ev_t.size and ev_t[e] < tg:
            state *= np.exp(-k.betas * (ev_t[e] - t_state))
            t_state = ev_t[e]
            state += jumps[ev_p[e]]
            e += 1
        lam = model.v + (state * np.exp(-k.betas * (tg - t_state))).sum(axis=1)
        out[:, g] = np.clip(lam, 0, None)
    return out


def intensity_direct(model: HawkesModel, log: EventLog, grid) -> np.ndarray:
    """O(events * grid) evaluation of the intensity; reference for ``intensity_trace``."""
    grid = np.asarray(grid, dtype=float)
    out = np.tile(model.v[:, None], (1, grid.size)).astype(float)
    for j, ts in enumerate(log.times):
        lag = grid[:, None] - ts[None, :]
        g = model.kernel(np.where(lag > 0, lag, -1.0))[..., :, j]  # (grid, n_j, m)
        out += g.sum(axis=1).T
    return out


# --- files -----------------------------------------------------------------

def save_events(log: EventLog, path) -> None:
    path = Path(path)
    t, p = log.merged()
    if path.suffix.lower() == ".csv":
        with path.open("w", newline="") as fh:
            fh.write(f"# T={log.T!r}\n")
            w = csv.writer(fh)
            w.writerow(["process", "time"])
            for ti, pi in zip(t, p):
                w.writerow([int(pi), repr(float(ti))])
        return
    with path.open("w") as fh:
        fh.write(json.dumps({"m": log.m, "T": log.T}) + "\n")
        for ti, pi in zip(t, p):
            fh.write(json.dumps({"p": int(pi), "t": float(ti)}) + "\n")


def load_events(path, m: int | None = None, T: float | None = None) -> EventLog:
    path = Path(path)
    procs, times = [], []
    header_T, header_m = None, None
    with path.open() as fh:
        if path.suffix.lower() == ".csv":
            for n, raw in enumerate(fh):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if body.startswith("T="):
                        header_T = float(body[2:])
                    continue
                try:
                    a, b = line.split(",")[:2]
                    if a.strip() == "process":
                        continue
                    procs.append(int(a))
                    times.append(float(b))
                except ValueError as exc:
                    raise SchemaError(f"{path}:{n + 1}: {exc}") from exc
        else:
            for n, raw in enumerate(fh):
                if not raw.strip():
                    continue
                try:
                    rec = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"{path}:{n + 1}: {exc}") from exc
                if "t" in rec:
                    procs.append(int(rec["p"]))
                    times.append(float(rec["t"]))
                else:
                    header_T = rec.get("T", header_T)
                    header_m = rec.get("m", header_m)
    T = T if T is not None else header_T
    if T is None:
        raise SchemaError(f"{path}: horizon T missing from header")
    if m is not None and header_m is not None and int(header_m) != m:
        raise SchemaError(f"{path}: header declares {header_m} processes, expected {m}")
    m = m if m is not None else header_m
    if m is None:
        m = max(procs) + 1 if procs else 0
    procs = np.asarray(procs, int)
    if procs.size and (procs.min() < 0 or procs.max() >= m):
        raise SchemaError(f"{path}: process index outside [0, {m})")
    times = np.asarray(times, float)
    return EventLog(tuple(times[procs == i] for i in range(int(m))), float(T))
