"""End-to-end structure learning from a single event log."""
from __future__ import annotations

import logging
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from . import graph as graphmod
from .errors import ConfigError, EstimationError, HawkesError, ModeRecoveryFailure
from .model import ExpKernel, HawkesModel
from .moments import (cov_density_laplace, cov_fourier, default_lags, estimate_cov, estimate_cov_density,
                      estimate_rate)
from .modes import ModeEstimate, default_omega_grid, fit_modes, trace_profile
from .simulator import EventLog, simulate
from .solver import CoeffSolution, assemble, solve_coeffs

log = logging.getLogger(__name__)


@dataclass
class LearnConfig:
    z: float = 2.0
    delta: float = 0.2
    sigma: float | None = None
    d_max: int = 6
    tau_max: float | None = 20.0  # covariance-density lags; None -> default_lags rule
    cov_tau_max: float | None = 10.0  # windowed-covariance lags for the Fourier path
    omega_min: float | None = None
    omega_max: float | None = None
    n_omega: int = 400
    min_gain: float = 0.3
    plateau: float = 1.5
    jackknife_groups: int = 20  # 0 disables the noise floor in mode selection
    damping: bool = False

    def check(self, T: float | None = None) -> None:
        if not self.z > 0:
            raise ConfigError("z must be positive")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.delta > self.z:
            raise ConfigError("delta must not exceed z")
        if self.sigma is not None and self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.d_max < 1:
            raise ConfigError("d_max must be at least 1")
        if self.n_omega < 10 * self.d_max:
            raise ConfigError("n_omega must be at least 10 * d_max")
        if T is not None:
            for name, tm, win in (("tau_max", self.tau_max, self.delta), ("cov_tau_max", self.cov_tau_max, self.z)):
                if tm is not None and tm + win > T:
                    raise ConfigError(f"{name}={tm:g} plus window {win:g} exceeds the horizon T={T:g}")
            if 2 * self.delta + self.delta > T or self.z + self.delta > T:
                raise ConfigError(f"horizon T={T:g} too short for z={self.z:g}, delta={self.delta:g}")


@dataclass
class LearnResult:
    rates: np.ndarray
    modes: ModeEstimate | None
    solution: CoeffSolution | None
    graph: graphmod.CausalGraph
    status: str = "ok"
    stage_errors: dict = field(default_factory=dict)
    config: LearnConfig | None = None
    warnings: list = field(default_factory=list)

    @property
    def model(self) -> HawkesModel | None:
        if self.solution is None:
            return None
        v = np.clip(self.rates - _excited_part(self.solution, self.rates), 1e-12, None)
        return HawkesModel(ExpKernel(self.solution.betas, self.solution.coeffs), v)

    def diagnostics(self) -> dict:
        out = {
            "status": self.status,
            "rates": self.rates.tolist(),
            "modes": None if self.modes is None else self.modes.to_dict(),
            "solver": None if self.solution is None else self.solution.diagnostics(),
            "graph": graphmod.to_json(self.graph),
            "errors": dict(self.stage_errors),
            "warnings": list(self.warnings),
        }
        if self.config is not None:
            out["config"] = asdict(self.config)
        return out


def _excited_part(sol: CoeffSolution, rates):
    # v = (I - Gamma_signed) rates for the recovered kernel
    G = np.tensordot(1.0 / sol.betas, sol.coeffs, axes=(0, 0))
    return G @ rates


def _lags(T, step, tau_max, window):
    if tau_max is None:
        lags = default_lags(T, step)
        return lags[lags + window <= T]
    return step * np.arange(int(np.floor(tau_max / step + 1e-9)) + 1)


def estimate_modes(log_: EventLog, cfg: LearnConfig, rates=None) -> ModeEstimate:
    lam = estimate_rate(log_) if rates is None else rates
    cov = estimate_cov(log_, cfg.z, _lags(log_.T, cfg.delta, cfg.cov_tau_max, cfg.z), rates=lam,
                       n_groups=cfg.jackknife_groups or None)
    fn = lambda w: cov_fourier(cov, w)
    reps = [(lambda w, c=c: cov_fourier(c, w)) for c in cov.replicates()]
    w_max = cfg.omega_max
    if w_max is None and cfg.min_gain > 0:
        # edge of the window's main lobe where gain/z drops to min_gain
        w_max = _main_lobe_edge(cfg.z, cfg.min_gain)
    if cfg.omega_min is not None and w_max is not None:
        grid = np.geomspace(cfg.omega_min, w_max, cfg.n_omega)
    else:
        grid = default_omega_grid(fn, cfg.z, n=cfg.n_omega, w_max=w_max)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prof = trace_profile(fn, cfg.z, grid, min_gain=cfg.min_gain, replicate_fns=reps)
    return fit_modes(prof, cfg.d_max, plateau=cfg.plateau)


def _main_lobe_edge(z, min_gain):
    from scipy.optimize import brentq

    f = lambda w: np.sinc(w * z / (2 * np.pi)) ** 2 - min_gain
    return brentq(f, 1e-12, 2 * np.pi / z * (1 - 1e-12))


def learn(log_: EventLog, cfg: LearnConfig | None = None, betas=None) -> LearnResult:
    """Rates, covariance estimates, modes, Laplace values, coefficients, graph.

    ``betas`` bypasses mode recovery when the modes are known.
    """
    cfg = cfg or LearnConfig()
    cfg.check(log_.T)
    m = log_.m
    lam = estimate_rate(log_)
    empty = graphmod.CausalGraph(np.zeros((m, m), bool), np.zeros((m, m)), float("inf"))
    if betas is None:
        try:
            modes = estimate_modes(log_, cfg, lam)
        except ModeRecoveryFailure as exc:
            status = "no_excitation" if "no excitation" in str(exc) else "mode_failure"
            return LearnResult(lam, None, None, empty, status, {"modes": str(exc)}, cfg)
    else:
        b = np.sort(np.asarray(betas, float))
        modes = ModeEstimate(b.size, b, 0.0, np.zeros(0))
    try:
        dens = estimate_cov_density(log_, cfg.delta, _lags(log_.T, cfg.delta, cfg.tau_max, cfg.delta)[-1], rates=lam)
        L = np.array([cov_density_laplace(dens, b) for b in modes.betas])
    except (EstimationError, ValueError) as exc:
        return LearnResult(lam, modes, None, empty, "moments_failure", {"moments": str(exc)}, cfg)
    notes = []
    if dens.tau_max < 10.0 / modes.betas.min():
        notes.append(f"lag range {dens.tau_max:g} is shorter than 10/beta_min = {10.0 / modes.betas.min():.3g}; "
                     "Laplace values are truncated")
        warnings.warn(notes[-1])
    try:
        sol = solve_coeffs(assemble(lam, modes.betas, L), damping=cfg.damping)
    except (HawkesError, np.linalg.LinAlgError, ValueError) as exc:
        return LearnResult(lam, modes, None, empty, "solver_failure", {"solver": str(exc)}, cfg, notes)
    g = graphmod.build_graph(sol.coeffs, cfg.sigma)
    log.info("learned %d edges with %d modes", len(g.edges()), modes.D)
    return LearnResult(lam, modes, sol, g, "ok", {}, cfg, notes + list(sol.warnings))


def thread_cap() -> int:
    """Worker limit for multi-seed batches, from ``HAWKESNET_THREADS``."""
    raw = os.environ.get("HAWKESNET_THREADS")
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"HAWKESNET_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("HAWKESNET_THREADS must be at least 1")
    return n


def run_seeds(fn, seeds, workers: int | None = None) -> list:
    """``[fn(s) for s in seeds]`` spread over processes; order is preserved."""
    seeds = list(seeds)
    workers = min(workers or thread_cap(), len(seeds)) if seeds else 1
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def _replicate(model, truth, T, cfg, betas, seed):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = learn(simulate(model, T, seed), cfg, betas=betas)
    sc = graphmod.score(res.graph, truth)
    return {"seed": seed, "status": res.status, "D": 0 if res.modes is None else res.modes.D,
            "edges": len(res.graph.edges()), "seconds": time.perf_counter() - t0, **sc.to_dict()}


def replicate_scores(model: HawkesModel, truth: graphmod.CausalGraph, T: float, seeds,
                     cfg: LearnConfig | None = None, betas=None, workers: int | None = None) -> list[dict]:
    """Simulate, learn and score one replicate per seed; rows are in seed order."""
    return run_seeds(partial(_replicate, model, truth, T, cfg or LearnConfig(), betas), seeds, workers)
