"""Recovery of the kernel decay rates (modes) from the inverse spectral trace.

For an exponential kernel, ``g(w) = gain(w) * Tr(F[Sigma_z](w)^{-1})`` is a
rational function of ``x = w^2`` whose poles sit at ``x = -beta_d^2``.  We fit
``g(x) = c0 + sum_d r_d / (x + b_d)`` (equivalently ``P(x)/Q(x)`` with
``Q(x) = prod_d (x + b_d)``) for increasing order and read the modes off the
denominator roots.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ModeRecoveryFailure
from .model import window_gain

DEFAULT_PLATEAU = 1.5
RESIDUAL_FLOOR = 1e-9
MERGE_RTOL = 0.02
POLE_BAND = 4.0  # poles may lie up to this factor (in w^2) outside the sampled range
RESIDUE_RTOL = 1e-7


@dataclass(frozen=True)
class TraceProfile:
    omega: np.ndarray
    values: np.ndarray
    z: float
    dropped: tuple = ()
    stderr: np.ndarray | None = None

    @property
    def noise_level(self) -> float:
        """RMS relative standard error of the profile, 0 when unknown."""
        if self.stderr is None or self.values.size == 0:
            return 0.0
        return float(np.sqrt(np.mean((self.stderr / self.values) ** 2)))


@dataclass
class ModeEstimate:
    D: int
    betas: np.ndarray
    residual: float
    omega: np.ndarray
    scores: dict = field(default_factory=dict)
    admissible: dict = field(default_factory=dict)
    dropped: tuple = ()
    noise_level: float = 0.0

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "betas": self.betas.tolist(),
            "noise_level": self.noise_level,
            "residuals": {str(k): v for k, v in self.scores.items()},
            "admissible": {str(k): v for k, v in self.admissible.items()},
            "dropped_omega": [float(w) for w in self.dropped],
        }


def _inverse_trace(F, gain, cond_max, imag_tol, require_pd):
    F = np.asarray(F)
    if not np.all(np.isfinite(F)) or np.linalg.cond(F) > cond_max:
        return None
    if require_pd and np.linalg.eigvalsh(0.5 * (F + F.conj().T)).min() <= 0:
        return None
    tr = gain * np.trace(np.linalg.inv(F))
    if abs(tr.imag) > imag_tol * max(1.0, abs(tr.real)):
        return None
    return float(tr.real)


def trace_profile(cov_fourier_fn, z: float, grid, min_gain: float = 0.0, cond_max: float = 1e12,
                  imag_tol: float = 1e-8, require_pd: bool = True, replicate_fns=()) -> TraceProfile:
    """Evaluate ``gain(w) * Tr(F(w)^{-1})`` on a grid of positive frequencies.

    Points where the relative window gain ``gain/z`` falls below ``min_gain``
    or where ``F(w)`` is numerically singular or not positive definite (an
    estimate dominated by noise) are dropped with a warning.
    ``replicate_fns`` are leave-one-group-out versions of ``cov_fourier_fn``;
    when given, the profile carries jackknife standard errors.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("frequency grid must be positive")
    keep_w, keep_g, keep_se, dropped = [], [], [], []
    G = len(replicate_fns)
    for w in grid:
        gain = float(window_gain(w, z))
        if gain / z <= min_gain or gain == 0.0:
            dropped.append(w)
            continue
        g = _inverse_trace(cov_fourier_fn(w), gain, cond_max, imag_tol, require_pd)
        reps = [_inverse_trace(fn(w), gain, cond_max, imag_tol, require_pd) for fn in replicate_fns]
        if g is None or any(r is None for r in reps):
            dropped.append(w)
            continue
        keep_w.append(w)
        keep_g.append(g)
        if G:
            reps = np.asarray(reps)
            keep_se.append(np.sqrt((G - 1) / G * np.sum((reps - reps.mean()) ** 2)))
    if dropped:
        warnings.warn(f"trace profile: dropped {len(dropped)} of {grid.size} frequencies")
    se = np.array(keep_se) if G else None
    return TraceProfile(np.array(keep_w), np.array(keep_g), float(z), tuple(dropped), se)


def default_omega_grid(cov_fourier_fn, z: float, n: int = 400, probe=None, w_max: float | None = None) -> np.ndarray:
    """Log-spaced grid straddling the region where the trace profile bends.

    A coarse probe locates the frequencies where ``g`` changes fastest (in
    ``log w``); the grid spans ``0.05 * w_lo .. 20 * w_hi`` around them, clipped
    to ``w_max`` when given.
    """
    if probe is None:
        hi = w_max if w_max is not None else 100.0 / z
        probe = np.geomspace(hi * 1e-4, hi, 81)
    prof = trace_profile(cov_fourier_fn, z, probe)
    if prof.omega.size < 3:
        lo, hi = 1.0, 1.0
    else:
        slope = np.abs(np.gradient(prof.values, np.log(prof.omega)))
        if slope.max() <= 0:
            lo = hi = float(np.sqrt(prof.omega[0] * prof.omega[-1]))
        else:
            sig = prof.omega[slope >= 0.25 * slope.max()]
            lo, hi = float(sig.min()), float(sig.max())
    top = 20 * hi if w_max is None else min(20 * hi, w_max)
    return np.geomspace(min(0.05 * lo, top / 400), top, n)


# --- rational fitting ------------------------------------------------------------

def _basis(x, b):
    return np.column_stack([np.ones_like(x), 1.0 / (x[:, None] + b[None, :])])


def _linear_part(x, y, b):
    # weighted (relative) least squares for c0, r_d at fixed poles
    B = _basis(x, b) / y[:, None]
    coef, *_ = np.linalg.lstsq(B, np.ones_like(y), rcond=None)
    return coef, B @ coef - 1.0


def _vector_fit(x, y, b, n_iter=30):
    """Pole relocation on the cross-multiplied residual ``y * sigma(x) - p(x)``."""
    D = b.size
    for _ in range(n_iter):
        P = 1.0 / (x[:, None] + b[None, :])
        M = np.hstack([np.ones((x.size, 1)), P, -y[:, None] * P]) / y[:, None]
        sol, *_ = np.linalg.lstsq(M, np.ones_like(y), rcond=None)
        c = sol[1 + D:]
        # zeros of sigma(x) = 1 + sum c_d/(x+b_d) are eig(diag(-b) - 1 c^T)
        roots = np.linalg.eigvals(np.diag(-b) - np.outer(np.ones(D), c))
        b_new = np.abs(roots.real) + np.abs(roots.imag)
        b_new = np.where(b_new > 0, b_new, b.min())
        if np.allclose(np.sort(b_new), np.sort(b), rtol=1e-12):
            b = np.sort(b_new)
            break
        b = np.sort(b_new)
    return b, roots


def _refine(x, y, b0):
    def fun(theta):
        with np.errstate(over="ignore"):
            return _linear_part(x, y, np.exp(theta))[1]

    res = optimize.least_squares(fun, np.log(b0), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
    with np.errstate(over="ignore"):
        b = np.exp(res.x)
        coef, r = _linear_part(x, y, b)
    return b, coef, float(np.sqrt(np.mean(r ** 2)))


def _fit_order(x, y, D, seeds):
    """Best refined fit of order D from several starting pole sets."""
    best = None
    for b0 in seeds:
        try:
            b, coef, res = _refine(x, y, np.asarray(b0, float))
        except (np.linalg.LinAlgError, ValueError):
            continue
        if not np.all(np.isfinite(b)) or not np.isfinite(res):
            continue
        if best is None or res < best[2]:
            best = (b, coef, res)
    return best


def _admissible(b, coef, x):
    order = np.argsort(b)
    b, r = b[order], coef[1:][order]
    lo, hi = x.min() / POLE_BAND, x.max() * POLE_BAND
    if np.any(b < lo) or np.any(b > hi):
        return False, "pole outside sampled band"
    beta = np.sqrt(b)
    if b.size > 1 and np.any(np.diff(beta) / beta[1:] < MERGE_RTOL):
        return False, "repeated pole"
    scale = abs(coef[0]) + 1e-300
    if np.any(np.abs(r) / b < RESIDUE_RTOL * scale):
        return False, "pole with vanishing residue"
    return True, ""


def fit_modes(profile: TraceProfile, D_max: int = 6, plateau: float = DEFAULT_PLATEAU,
              floor: float = RESIDUAL_FLOOR, n_starts: int = 6) -> ModeEstimate:
    """Rational fit of increasing order and plateau-rule order selection.

    Residuals are RMS relative errors, floored at ``floor`` and at the
    profile's own noise level when it carries standard errors.  The constant
    fit (no excitation) competes as order 0; if it is within the plateau factor
    of the best admissible fit a :class:`ModeRecoveryFailure` reports that no
    excitation was detected.
    """
    omega = np.asarray(profile.omega, dtype=float)
    y = np.asarray(profile.values, dtype=float)
    if omega.size < 10 * D_max:
        raise ValueError(f"need at least {10 * D_max} frequencies for D_max={D_max}, got {omega.size}")
    if np.any(y <= 0):
        raise ModeRecoveryFailure("trace profile is not positive", {"min_value": float(y.min())})
    floor = max(floor, profile.noise_level)
    xs = float(np.sqrt(omega.min() * omega.max())) ** 2
    x = omega ** 2 / xs
    # order 0: best constant under relative error
    c0 = np.sum(1 / y) / np.sum(1 / y ** 2)
    scores = {0: float(np.sqrt(np.mean((c0 / y - 1) ** 2)))}
    admissible = {0: True}
    reasons = {}
    fits = {}
    prev = None
    for D in range(1, D_max + 1):
        seeds = [np.geomspace(x.min(), x.max(), D + 2)[1:-1]]
        vf_b, _ = _vector_fit(x, y, seeds[0].copy())
        seeds.append(vf_b)
        if prev is not None:
            for extra in np.geomspace(x.min(), x.max(), n_starts):
                seeds.append(np.sort(np.append(prev, extra)))
        fit = _fit_order(x, y, D, seeds)
        if fit is None:
            admissible[D] = False
            reasons[D] = "fit did not converge"
            continue
        b, coef, res = fit
        ok, why = _admissible(b, coef, x)
        scores[D] = res
        admissible[D] = ok
        if not ok:
            reasons[D] = why
        fits[D] = (b, coef)
        prev = np.sort(b)
    cand = [D for D in scores if admissible[D]]
    best = min(max(scores[D], floor) for D in cand)
    D_hat = min(D for D in cand if max(scores[D], floor) <= plateau * best)
    diag = {"residuals": scores, "admissible": admissible, "reasons": reasons, "noise_level": profile.noise_level}
    if D_hat == 0:
        raise ModeRecoveryFailure("no excitation detected", diag)
    b = np.sort(fits[D_hat][0])
    betas = np.sqrt(b * xs)
    return ModeEstimate(D_hat, betas, scores[D_hat], omega, scores, admissible, profile.dropped,
                        profile.noise_level)
