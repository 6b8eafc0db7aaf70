"""Causal structure of multivariate Hawkes networks from second-order statistics."""
from .errors import (ConfigError, DegenerateModelError, EstimationError, HawkesError, ModeRecoveryFailure,
                     SchemaError, SimulationAbort, SingularityError, StationarityError)
from .graph import CausalGraph, build_graph, gap_threshold, score
from .model import ExpKernel, HawkesModel, analytic_cov_fourier, analytic_laplace_cov_density, mean_intensity, validate
from .modes import fit_modes, trace_profile
from .moments import cov_density_laplace, cov_fourier, estimate_cov, estimate_cov_density, estimate_rate
from .pipeline import LearnConfig, LearnResult, learn, replicate_scores
from .simulator import EventLog, intensity_trace, simulate
from .solver import assemble, solve_coeffs

__version__ = "0.1.0"
