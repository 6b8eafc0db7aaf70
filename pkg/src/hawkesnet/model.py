"""Exponential Hawkes models and their exact moments.

A kernel is ``Gamma(t) = sum_d A_d exp(-beta_d t)`` for ``t >= 0``; entry
``(i, j)`` is the effect of an event of process ``j`` on the intensity of
process ``i``.  All objects here are immutable and the functions are pure.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .errors import DegenerateModelError, SchemaError, SingularityError, StationarityError

MODE_SEPARATION_EPS = 1e-6
QUAD_ABS_TOL = 1e-10
NONNEG_TOL = 1e-12
NONNEG_GRID_POINTS = 10_000


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ExpKernel:
    betas: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        betas = _readonly(np.atleast_1d(self.betas))
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim == 2:
            coeffs = coeffs[None]
        if betas.ndim != 1 or betas.size < 1:
            raise SchemaError("betas must be a non-empty vector")
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2]:
            raise SchemaError(f"coeffs must have shape (D, m, m), got {coeffs.shape}")
        if coeffs.shape[0] != betas.size:
            raise SchemaError(f"{betas.size} modes but {coeffs.shape[0]} coefficient matrices")
        if not (np.all(np.isfinite(betas)) and np.all(np.isfinite(coeffs))):
            raise SchemaError("kernel parameters must be finite")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    @property
    def m(self) -> int:
        return self.coeffs.shape[1]

    @property
    def D(self) -> int:
        return self.betas.size

    def __call__(self, t):
        """Kernel matrix at time(s) ``t``; shape ``(..., m, m)``, zero for t < 0."""
        t = np.asarray(t, dtype=float)
        w = np.exp(-np.multiply.outer(t, self.betas)) * (t >= 0)[..., None]
        return np.tensordot(w, self.coeffs, axes=(-1, 0))

    def signed_integral(self) -> np.ndarray:
        return np.tensordot(1.0 / self.betas, self.coeffs, axes=(0, 0))

    @classmethod
    def zero(cls, m: int, beta: float = 1.0) -> "ExpKernel":
        return cls(np.array([beta]), np.zeros((1, m, m)))


@dataclass(frozen=True)
class HawkesModel:
    kernel: ExpKernel
    v: np.ndarray

    def __post_init__(self):
        v = _readonly(np.atleast_1d(self.v))
        if v.shape != (self.kernel.m,):
            raise SchemaError(f"base rates have shape {v.shape}, expected ({self.kernel.m},)")
        if not np.all(np.isfinite(v)):
            raise SchemaError("base rates must be finite")
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        return self.kernel.m


@dataclass
class ValidationReport:
    checks: dict[str, bool]
    spectral_radius_abs: float
    spectral_radius_signed: float
    min_kernel_value: float
    mode_separation: float
    gamma_bar: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, passed in self.checks.items() if not passed]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": dict(self.checks),
            "rho_gamma_bar": self.spectral_radius_abs,
            "rho_signed": self.spectral_radius_signed,
            "min_kernel_value": self.min_kernel_value,
            "mode_separation": self.mode_separation,
        }


def spectral_radius(M) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(M)))))


def _entry_roots(a, betas, t_max):
    # zeros of t -> sum_d a_d exp(-beta_d t) on (0, t_max]; at most D-1 of them
    f = lambda t: float(np.dot(a, np.exp(-betas * t)))
    grid = np.concatenate([[0.0], np.geomspace(1e-6 / betas.max(), t_max, 2000)])
    vals = np.exp(-np.outer(grid, betas)) @ a
    roots = []
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(optimize.brentq(f, grid[k], grid[k + 1], xtol=1e-14))
    return roots


def abs_integral(kernel: ExpKernel) -> np.ndarray:
    """``Gamma_bar[i, j] = int_0^inf |gamma_ij(t)| dt`` by adaptive quadrature."""
    betas = kernel.betas
    t_max = 50.0 / betas.min()
    out = np.zeros((kernel.m, kernel.m))
    for i in range(kernel.m):
        for j in range(kernel.m):
            a = kernel.coeffs[:, i, j]
            if not np.any(a):
                continue
            f = lambda t: abs(float(np.dot(a, np.exp(-betas * t))))
            knots = [0.0, *_entry_roots(a, betas, t_max), np.inf]
            total = 0.0
            for lo, hi in zip(knots[:-1], knots[1:]):
                val, _ = integrate.quad(f, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=200)
                total += val
            out[i, j] = total
    return out


def _critical_points(kernel: ExpKernel, t_max: float) -> np.ndarray:
    pts = []
    scaled = kernel.coeffs * kernel.betas[:, None, None]
    for i in range(kernel.m):
        for j in range(kernel.m):
            if kernel.D > 1 and np.any(kernel.coeffs[:, i, j]):
                pts.extend(_entry_roots(scaled[:, i, j], kernel.betas, t_max))
    return np.asarray(pts, dtype=float)


def min_kernel_value(kernel: ExpKernel) -> float:
    """Smallest kernel entry over a geometric time grid, t=0 and the critical points."""
    t_max = 20.0 / kernel.betas.min()
    grid = np.geomspace(1e-6 * t_max, t_max, NONNEG_GRID_POINTS)
    ts = np.concatenate([[0.0], grid, _critical_points(kernel, t_max)])
    vals = np.exp(-np.outer(ts, kernel.betas)) @ kernel.coeffs.reshape(kernel.D, -1)
    return float(vals.min())


def validate(model: HawkesModel) -> ValidationReport:
    k = model.kernel
    b = np.sort(k.betas)
    sep = float(np.min(np.diff(b))) if k.D > 1 else float("inf")
    gbar = abs_integral(k)
    rho_abs = spectral_radius(gbar)
    rho_signed = spectral_radius(k.signed_integral())
    kmin = min_kernel_value(k)
    checks = {
        "base_rates_positive": bool(np.all(model.v > 0)),
        "modes_positive": bool(np.all(k.betas > 0)),
        "modes_distinct": bool(sep > MODE_SEPARATION_EPS),
        "kernel_nonnegative": bool(kmin >= -NONNEG_TOL),
        "signed_spectral_radius_below_one": bool(rho_signed < 1),
        "stationary": bool(rho_abs < 1),
    }
    return ValidationReport(checks, rho_abs, rho_signed, kmin, sep, gbar)


def mean_intensity(model: HawkesModel, gamma_bar=None) -> np.ndarray:
    """Stationary mean rate ``(I - Gamma_bar)^{-1} v``."""
    gbar = abs_integral(model.kernel) if gamma_bar is None else gamma_bar
    if spectral_radius(gbar) >= 1:
        raise StationarityError(f"rho(Gamma_bar) = {spectral_radius(gbar):.4g} >= 1")
    M = np.eye(model.m) - gbar
    if np.linalg.cond(M) > 1e12:
        raise StationarityError("I - Gamma_bar is numerically singular")
    return np.linalg.solve(M, model.v)


def kernel_fourier(kernel: ExpKernel, omega: float) -> np.ndarray:
    w = 1.0 / (1j * omega + kernel.betas)
    return np.tensordot(w, kernel.coeffs, axes=(0, 0))


def window_gain(omega, z):
    """``4 sin^2(z w / 2) / (w^2 z)``, equal to ``z`` at w = 0."""
    omega = np.asarray(omega, dtype=float)
    # np.sinc(x) = sin(pi x) / (pi x)
    return z * np.sinc(omega * z / (2 * np.pi)) ** 2


def analytic_cov_fourier(model: HawkesModel, omega: float, z: float, rates=None) -> np.ndarray:
    """Fourier transform of the windowed covariance at frequency ``omega``.

    Uses ``F[f](w) = int f(t) exp(-j w t) dt``, so the result is
    ``gain(w) * R(-w)`` with ``R(w) = (I - F[Gamma](w))^{-1} diag(L) (I - F[Gamma](w))^{-H}``.
    """
    if z <= 0:
        raise ValueError("window z must be positive")
    lam = mean_intensity(model) if rates is None else np.asarray(rates)
    M = np.eye(model.m) - kernel_fourier(model.kernel, -omega)
    if np.linalg.cond(M) > 1e12:
        raise SingularityError(f"I - F[Gamma] singular at omega={omega}")
    B = np.linalg.solve(M, np.eye(model.m))
    out = window_gain(omega, z) * (B * lam) @ B.conj().T
    return 0.5 * (out + out.conj().T)


def _laplace_operator(kernel: ExpKernel):
    """Linear map X -> residual-part of the Laplace fixed-point equations.

    Unknowns are ``X[i] = L[Omega](beta_i)``; equation ``i`` reads
    ``X_i - sum_d A_d (X_i + X_d^T) / (beta_i + beta_d) = sum_d A_d diag(L) / (beta_i + beta_d)``.
    """
    A, b = kernel.coeffs, kernel.betas
    W = 1.0 / (b[:, None] + b[None, :])  # W[i, d]

    def apply(X):
        # X: (..., D, m, m)
        XT = np.swapaxes(X, -1, -2)
        out = X.copy()
        out -= np.einsum("id,dab,...ibc->...iac", W, A, X)
        out -= np.einsum("id,dab,...dbc->...iac", W, A, XT)
        return out

    return apply, W


def laplace_residual(kernel: ExpKernel, rates, laplace_values) -> np.ndarray:
    """Residual of ``L(s) = sum_d A_d/(s+beta_d) (diag(L) + L(s) + L^T(beta_d))`` at every ``s = beta_i``."""
    X = np.asarray(laplace_values, dtype=float)
    A, b = kernel.coeffs, kernel.betas
    dl = np.diag(rates)
    res = np.empty_like(X)
    for i in range(kernel.D):
        rhs = sum(A[d] @ (dl + X[i] + X[d].T) / (b[i] + b[d]) for d in range(kernel.D))
        res[i] = X[i] - rhs
    return res


def analytic_laplace_cov_density(model: HawkesModel, rates=None) -> np.ndarray:
    """Solve the coupled Laplace equations for ``L[Omega](beta_d)``, shape ``(D, m, m)``."""
    k = model.kernel
    m, D = k.m, k.D
    lam = mean_intensity(model) if rates is None else np.asarray(rates, dtype=float)
    apply, W = _laplace_operator(k)
    n = D * m * m
    basis = np.eye(n).reshape(n, D, m, m)
    M = apply(basis).reshape(n, n).T
    rhs = np.einsum("id,dab->iab", W, k.coeffs * lam[None, None, :]).ravel()
    if np.linalg.cond(M) > 1e12:
        raise DegenerateModelError("Laplace system for the covariance density is singular")
    return np.linalg.solve(M, rhs).reshape(D, m, m)


# --- JSON model files -------------------------------------------------------

def model_to_dict(model: HawkesModel) -> dict:
    return {
        "m": model.m,
        "v": model.v.tolist(),
        "modes": model.kernel.betas.tolist(),
        "coeffs": model.kernel.coeffs.tolist(),
    }


def model_from_dict(d: dict) -> HawkesModel:
    try:
        m = int(d["m"])
        v = np.asarray(d["v"], dtype=float)
        betas = np.asarray(d["modes"], dtype=float)
        coeffs = np.asarray(d["coeffs"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model: {exc!r}") from exc
    if coeffs.ndim != 3 or coeffs.shape[1:] != (m, m):
        raise SchemaError(f"coeffs must be D matrices of size {m}x{m}")
    return HawkesModel(ExpKernel(betas, coeffs), v)


def load_model(path) -> HawkesModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return model_from_dict(d)


def save_model(model: HawkesModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
