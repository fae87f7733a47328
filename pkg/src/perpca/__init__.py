"""perpca: shared and client-specific principal components from heterogeneous data.

Federated Stiefel gradient descent decouples one global frame U from
per-client local frames V_i under the constraints U^T U = I, V_i^T V_i = I,
U^T V_i = 0, together with one-shot baselines, a planted-truth synthetic
generator, clustering of clients by local subspace, and numerical oracles
for the supporting matrix analysis.
"""

from .errors import DimensionError, InvariantError, SingularityError
from .model import ComponentState, covariance, kkt_residual, objective, reconstruction_error
from .solver import RoundTrace, SolverConfig, run_perpca
from .stiefel import (
    polar_retract,
    project_normal,
    project_tangent,
    projector,
    qr_retract,
    subspace_distance,
)

__all__ = [
    "ComponentState",
    "DimensionError",
    "InvariantError",
    "RoundTrace",
    "SingularityError",
    "SolverConfig",
    "covariance",
    "kkt_residual",
    "objective",
    "polar_retract",
    "project_normal",
    "project_tangent",
    "projector",
    "qr_retract",
    "reconstruction_error",
    "run_perpca",
    "subspace_distance",
]

__version__ = "0.1.0"
