"""Subgraph generated random graph models: sampling, exact expectations,
spectral concentration bounds and centrality error experiments."""
from .errors import CapacityError, ConvergenceError, DomainError, SpecError, SugmError
from .model import (BlockRule, DistanceRule, ModelFamily, Placement, Semantics, SubgraphTemplate,
                    SugmSpec, TableRule, UniformRule, clique, distance_model, link, load_family,
                    sbm_model, uniform_model, validate_spec)
from .sampler import Realization, sample
from .expectation import ExpectedMatrices, expected_adjacency, normalize
from .linalg import jacobi_eigendecomposition, solve_shifted, spectral_norm, top_two_eigenpairs
from .centrality import (CentralityVector, avg_l1_error, degree_centrality, degroot_consensus,
                         eigenvector_centrality, katz_centrality, lq_equilibrium)
from .bounds import BoundReport, estimate_mu, evaluate_bounds, fit_growth_exponent
from .experiment import SweepRecord, emit_csv, emit_plot, read_csv, run_sweep

__version__ = "0.1.0"
