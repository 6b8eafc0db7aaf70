"""Empirical second-order statistics of an event log."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EstimationError
from .simulator import EventLog

_GRID_RTOL = 1e-9


@dataclass(frozen=True)
class LaggedCovariance:
    """Windowed covariance ``Sigma_z(tau_k)`` for ``tau_k = k * dtau >= 0``."""

    z: float
    lags: np.ndarray
    values: np.ndarray  # (K+1, m, m)
    T: float
    rates: np.ndarray
    jackknife: np.ndarray | None = None  # (G, K+1, m, m) leave-one-group-out estimates

    @property
    def dtau(self) -> float:
        return float(self.lags[1] - self.lags[0]) if self.lags.size > 1 else 0.0

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def symmetric(self):
        """Lags ``-tau_K..tau_K`` with ``Sigma(-tau) = Sigma(tau)^T``."""
        lags = np.concatenate([-self.lags[:0:-1], self.lags])
        vals = np.concatenate([np.swapaxes(self.values[:0:-1], 1, 2), self.values])
        return lags, vals

    def replicates(self) -> list["LaggedCovariance"]:
        if self.jackknife is None:
            return []
        return [LaggedCovariance(self.z, self.lags, v, self.T, self.rates) for v in self.jackknife]


@dataclass(frozen=True)
class CovDensitySeries:
    """Covariance density ``Omega(tau_k)`` estimated with bin width ``delta``."""

    delta: float
    lags: np.ndarray
    values: np.ndarray  # (K+1, m, m)
    tau_max: float
    rates: np.ndarray


def estimate_rate(log: EventLog) -> np.ndarray:
    if not log.T > 0:
        raise EstimationError("empty horizon")
    return log.counts() / log.T


def default_lags(T: float, step: float, beta_min_guess: float = 0.1) -> np.ndarray:
    tau_max = min(T / 10.0, 40.0 / beta_min_guess)
    return step * np.arange(int(np.floor(tau_max / step + _GRID_RTOL)) + 1)


def _counts_at(log: EventLog, t) -> np.ndarray:
    # N(t) = number of events in (0, t]; shape (len(t), m)
    return np.stack([np.searchsorted(ts, t, side="right") for ts in log.times], axis=1).astype(float)


def _commensurate(z, lags):
    if lags.size > 1:
        h = float(lags[1] - lags[0])
    else:
        h = z
    if h <= 0:
        return None
    kz = z / h
    kl = lags / h
    if abs(kz - round(kz)) > _GRID_RTOL * max(1, kz) or np.any(np.abs(kl - np.round(kl)) > _GRID_RTOL * np.maximum(1, kl)):
        return None
    return h, int(round(kz)), np.round(kl).astype(int)


def estimate_cov(log: EventLog, z: float, lags, rates=None, n_groups: int | None = None) -> LaggedCovariance:
    """Block estimator of the windowed covariance at the given nonnegative lags.

    ``Sigma(tau) = (1/T) sum_i dX_i(0) dX_i(tau)^T`` with
    ``dX_i(tau) = X(iz + tau) - X((i-1)z + tau)`` and ``X(t) = N(t) - rate * t``;
    blocks whose lagged window passes ``T`` are skipped.  With ``n_groups``
    the blocks are also split into contiguous groups and the
    leave-one-group-out estimates are kept for jackknife error bars.
    """
    lags = np.asarray(lags, dtype=float)
    if z <= 0:
        raise EstimationError("window z must be positive")
    if lags.ndim != 1 or lags.size == 0 or lags.min() < 0:
        raise EstimationError("lags must be a non-empty vector of nonnegative values")
    if lags.size > 1 and not np.allclose(np.diff(lags), lags[1] - lags[0], rtol=1e-9, atol=0):
        raise EstimationError("lag grid must be uniform")
    T = log.T
    if lags.max() + z > T * (1 + _GRID_RTOL):
        raise EstimationError(f"largest lag {lags.max():g} plus window {z:g} exceeds horizon {T:g}")
    lam = estimate_rate(log) if rates is None else np.asarray(rates, dtype=float)
    m = log.m
    nblocks = int(np.floor(T / z * (1 + _GRID_RTOL)))
    out = np.empty((lags.size, m, m))
    if n_groups is not None and not 2 <= n_groups <= nblocks:
        raise EstimationError(f"n_groups must be in [2, {nblocks}]")
    group = None if n_groups is None else np.arange(nblocks) * n_groups // nblocks
    parts = None if n_groups is None else np.zeros((n_groups, lags.size, m, m))

    def accumulate(n, b, lagged):
        out[n] = b.T @ lagged
        if parts is not None:
            prod = b[:, :, None] * lagged[:, None, :]
            np.add.at(parts[:, n], group[:b.shape[0]], prod)

    grid = _commensurate(z, lags)
    if grid is not None:
        h, kz, kl = grid
        G = int(np.floor(T / h * (1 + _GRID_RTOL)))
        tg = h * np.arange(G + 1)
        X = _counts_at(log, tg) - np.outer(tg, lam)
        starts = kz * np.arange(nblocks)
        base = X[starts + kz] - X[starts]
        for n, k in enumerate(kl):
            nb = int(np.searchsorted(starts + kz + k, G, side="right"))
            lagged = X[starts[:nb] + kz + k] - X[starts[:nb] + k]
            accumulate(n, base[:nb], lagged)
    else:
        edges = z * np.arange(nblocks + 1)
        Xe = _counts_at(log, edges) - np.outer(edges, lam)
        base = np.diff(Xe, axis=0)
        for n, tau in enumerate(lags):
            ends = edges[1:] + tau
            nb = int(np.searchsorted(ends, T * (1 + _GRID_RTOL), side="right"))
            hi = ends[:nb]
            lo = hi - z
            lagged = (_counts_at(log, hi) - _counts_at(log, lo)) - z * lam
            accumulate(n, base[:nb], lagged)
    jack = None
    if parts is not None:
        sizes = np.bincount(group, minlength=n_groups) * z
        jack = (out[None] - parts) / (T - sizes)[:, None, None, None]
    return LaggedCovariance(float(z), lags, out / T, float(T), lam, jack)


def estimate_cov_density(log: EventLog, delta: float, tau_max: float | None = None, rates=None) -> CovDensitySeries:
    """``Omega(tau) = Sigma_delta(tau)^T / delta`` on the grid ``0, delta, ..., tau_max``."""
    if delta <= 0:
        raise EstimationError("bin width must be positive")
    if tau_max is None:
        lags = default_lags(log.T, delta)
    else:
        lags = delta * np.arange(int(np.floor(tau_max / delta + _GRID_RTOL)) + 1)
    cov = estimate_cov(log, delta, lags, rates=rates)
    vals = np.swapaxes(cov.values, 1, 2) / delta
    return CovDensitySeries(float(delta), lags, vals, float(lags[-1]), cov.rates)


def cov_fourier(cov: LaggedCovariance, omega: float) -> np.ndarray:
    """Trapezoidal ``sum_k Sigma(tau_k) exp(-j w tau_k) dtau`` over both lag signs, made Hermitian."""
    if cov.values.shape[0] == 0:
        raise EstimationError("empty covariance series")
    lags, vals = cov.symmetric()
    if lags.size == 1:
        out = vals[0].astype(complex) * cov.z
    else:
        w = np.full(lags.size, cov.dtau)
        w[0] = w[-1] = 0.5 * cov.dtau
        out = np.tensordot(w * np.exp(-1j * omega * lags), vals, axes=(0, 0))
    return 0.5 * (out + out.conj().T)


def cov_density_laplace(dens: CovDensitySeries, s: float) -> np.ndarray:
    """Trapezoidal ``int_0^tau_max Omega(tau) exp(-s tau) dtau``.

    The zero-lag bin holds the atom ``diag(rate)/delta`` and averages both lag
    signs, so the tau=0 node takes the first positive-lag value instead.
    """
    if not s > 0:
        raise ValueError("Laplace abscissa must be positive")
    vals = dens.values
    if vals.shape[0] < 2:
        raise EstimationError("covariance density needs at least two lags")
    w = np.full(dens.lags.size, dens.delta) * np.exp(-s * dens.lags)
    w[0] *= 0.5
    w[-1] *= 0.5
    out = np.tensordot(w[1:], vals[1:], axes=(0, 0))
    return out + w[0] * vals[1]


def export_series_csv(lags, values, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lag", "i", "j", "value"])
        for tau, M in zip(lags, values):
            for i in range(M.shape[0]):
                for j in range(M.shape[1]):
                    w.writerow([repr(float(tau)), i, j, repr(float(M[i, j]))])


def split_log(log: EventLog, n: int) -> list[EventLog]:
    """Cut the log into ``n`` contiguous sub-logs, each re-based to start at 0."""
    width = log.T / n
    parts = []
    for b in range(n):
        lo, hi = b * width, (b + 1) * width
        parts.append(EventLog(tuple(ts[(ts > lo) & (ts <= hi)] - lo for ts in log.times), width))
    return parts


def batch_means(log: EventLog, statistic, n_batches: int = 20):
    """Mean and standard error of ``statistic(sublog)`` over contiguous batches."""
    vals = np.array([statistic(p) for p in split_log(log, n_batches)])
    return vals.mean(axis=0), vals.std(axis=0, ddof=1) / np.sqrt(n_batches)
