"""Reference networks used by tests, scripts and the CLI ``--example`` flag."""
import numpy as np

from .model import ExpKernel, HawkesModel

FIVE_NODE_MODES = (1.0, 1.4, 2.0)

_FIVE_NODE_COEFFS = np.array([
    [[2, 0, 0, 0, 0],
     [0, 0, .5, 0, 0],
     [0, 1.5, 0, 0, 0],
     [0, 0, 0, 1.3, 0],
     [0, 0, 0, 0, 1]],
    [[0, 0, .5, 0, 0],
     [0, 0, 0, 0, 2],
     [0, 1, 0, 2.5, 0],
     [.1, 0, 0, 0, 0],
     [0, 0, 0, 1, 0]],
    [[1, 1.5, 1, 0, 0],
     [0, 0, 0, 0, -1],
     [0, 0, 2, 0, 0],
     [2, 0, 0, 0, 0],
     [0, 0, 0, 0, 0]],
]) / 20.0

FIVE_NODE_RATES = (0.5, 0.4, 0.5, 1.0, 0.3)

# 1-based (source, target) pairs of the five-node network
FIVE_NODE_EDGES = ((2, 1), (3, 1), (3, 2), (5, 2), (2, 3), (4, 3), (1, 4), (4, 5))


def five_node_model(v=FIVE_NODE_RATES) -> HawkesModel:
    return HawkesModel(ExpKernel(np.array(FIVE_NODE_MODES), _FIVE_NODE_COEFFS), np.asarray(v, float))


def two_node_model() -> HawkesModel:
    """Two processes with one mode per kernel entry (modes 0.9, 1.0, 1.1)."""
    betas = np.array([0.9, 1.0, 1.1])
    coeffs = np.zeros((3, 2, 2))
    coeffs[0, 1, 0] = 0.5
    coeffs[1, 0, 0] = 0.1
    coeffs[1, 1, 1] = 0.3
    coeffs[2, 0, 1] = 0.3
    return HawkesModel(ExpKernel(betas, coeffs), np.array([0.5, 0.4]))


def univariate_model(v=0.5, alpha=0.2, beta=1.0) -> HawkesModel:
    return HawkesModel(ExpKernel(np.array([beta]), np.array([[[alpha]]])), np.array([v]))


def poisson_model(rates) -> HawkesModel:
    rates = np.atleast_1d(np.asarray(rates, float))
    return HawkesModel(ExpKernel.zero(rates.size), rates)


# 1-based edges of the fifteen-node benchmark topology (102 edges)
FIFTEEN_NODE_EDGES = (
    (1, 4), (1, 5), (1, 6), (1, 8), (1, 10), (1, 11), (1, 13),
    (2, 1), (2, 9), (2, 10), (2, 11), (2, 14), (2, 15),
    (3, 1), (3, 4), (3, 6), (3, 7), (3, 8), (3, 9), (3, 12),
    (4, 2), (4, 3), (4, 5), (4, 7), (4, 10), (4, 11), (4, 13), (4, 14), (4, 15),
    (5, 2), (5, 6), (5, 12), (5, 14), (5, 15),
    (6, 1), (6, 2), (6, 3), (6, 5), (6, 10), (6, 12), (6, 13),
    (7, 1), (7, 2), (7, 10), (7, 12), (7, 15),
    (8, 1), (8, 2), (8, 3), (8, 4), (8, 5), (8, 7), (8, 13), (8, 15),
    (9, 1), (9, 2), (9, 3), (9, 5), (9, 7), (9, 11), (9, 13), (9, 14), (9, 15),
    (10, 6), (10, 7), (10, 8), (10, 9), (10, 14), (10, 15),
    (11, 3), (11, 4), (11, 5), (11, 7), (11, 8), (11, 9), (11, 12),
    (12, 4), (12, 8), (12, 11), (12, 13), (12, 14), (12, 15),
    (13, 2), (13, 3), (13, 8), (13, 9), (13, 10), (13, 11), (13, 12), (13, 15),
    (14, 5), (14, 9), (14, 11), (14, 13),
    (15, 1), (15, 2), (15, 3), (15, 4), (15, 5), (15, 7), (15, 8), (15, 11),
)


def fifteen_node_model(seed=0, modes=(1.0, 1.5, 2.0), target_rho=0.6) -> HawkesModel:
    """Synthetic replica of the fifteen-node topology with random nonnegative weights.

    Every edge gets one randomly chosen mode and a uniform weight; the
    kernel is then rescaled so that its integrated spectral radius equals
    ``target_rho``.
    """
    rng = np.random.default_rng(seed)
    m, betas = 15, np.asarray(modes, float)
    coeffs = np.zeros((betas.size, m, m))
    for src, dst in FIFTEEN_NODE_EDGES:
        d = rng.integers(betas.size)
        coeffs[d, dst - 1, src - 1] = rng.uniform(0.5, 1.0)
    gbar = np.tensordot(1.0 / betas, coeffs, axes=(0, 0))
    coeffs *= target_rho / np.max(np.abs(np.linalg.eigvals(gbar)))
    v = rng.uniform(0.2, 0.5, size=m)
    return HawkesModel(ExpKernel(betas, coeffs), v)
