"""Linear moment system ``S = A H`` for the kernel coefficient matrices."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

DEFAULT_COND_CAP = 1e10


@dataclass(frozen=True)
class MomentSystem:
    rates: np.ndarray
    betas: np.ndarray
    laplace: np.ndarray  # (D, m, m), laplace[i] = L[Omega](betas[i])
    H: np.ndarray  # (mD, mD)
    S: np.ndarray  # (m, mD)

    @property
    def m(self) -> int:
        return self.rates.size

    @property
    def D(self) -> int:
        return self.betas.size


@dataclass
class CoeffSolution:
    coeffs: np.ndarray  # (D, m, m)
    betas: np.ndarray
    residual: float
    condition: float
    warnings: list = field(default_factory=list)

    def diagnostics(self) -> dict:
        W = np.abs(self.coeffs).sum(axis=0)
        return {
            "residual": self.residual,
            "condition": self.condition,
            "warnings": list(self.warnings),
            "betas": self.betas.tolist(),
            "weights": W.tolist(),
        }


def assemble(rates, betas, laplace_values) -> MomentSystem:
    """Block ``(d, i)`` of H is ``(diag(rates) + L_i + L_d^T) / (beta_i + beta_d)``."""
    rates = np.asarray(rates, dtype=float)
    betas = np.asarray(betas, dtype=float).ravel()
    L = np.asarray(laplace_values, dtype=float)
    m, D = rates.size, betas.size
    if D < 1:
        raise ValueError("need at least one mode")
    if L.shape != (D, m, m):
        raise ValueError(f"laplace values have shape {L.shape}, expected {(D, m, m)}")
    if np.any(betas <= 0):
        raise ValueError("modes must be positive")
    dl = np.diag(rates)
    H = np.empty((m * D, m * D))
    for d in range(D):
        for i in range(D):
            H[d * m:(d + 1) * m, i * m:(i + 1) * m] = (dl + L[i] + L[d].T) / (betas[i] + betas[d])
    S = np.concatenate(list(L), axis=1)
    return MomentSystem(rates, betas, L, H, S)


def solve_coeffs(system: MomentSystem, damping: bool = False, cond_cap: float = DEFAULT_COND_CAP) -> CoeffSolution:
    """Minimum-norm least-squares solution of ``A H = S``."""
    H, S = system.H, system.S
    m, D = system.m, system.D
    cond = float(np.linalg.cond(H))
    if damping:
        lam = 1e-8 * np.linalg.norm(H, 2)
        lhs = np.vstack([H.T, lam * np.eye(m * D)])
        rhs = np.vstack([S.T, np.zeros((m * D, m))])
    else:
        lhs, rhs = H.T, S.T
    At, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    A = At.T
    notes = []
    if not np.isfinite(cond) or cond > cond_cap:
        msg = f"moment system ill-conditioned (cond={cond:.3g})"
        warnings.warn(msg)
        notes.append(msg)
    coeffs = A.reshape(m, D, m).transpose(1, 0, 2)
    residual = float(np.linalg.norm(A @ H - S))
    return CoeffSolution(coeffs, system.betas.copy(), residual, cond, notes)
