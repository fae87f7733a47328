"""Datasets, covariance statistics, the shared/local objective, and
stationarity diagnostics.

Datasets are ``(d, n_i)`` ndarrays (features x observations). A client's
covariance ``S_i = Y_i Y_i^T / n_i`` is the only statistic the solver ever
touches; raw observations are needed only for reconstruction errors.

Reductions over clients always run in ascending client order, so results
are deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

from . import stiefel
from .errors import DimensionError, InvariantError

CROSS_TOL = 1e-8


@dataclass
class ComponentState:
    """Shared frame U (d x r1) plus one local frame per client (d x r2_i).

    Invariants: all frames orthonormal, and U^T V_i = 0 for every client.
    """

    U: np.ndarray
    V: list = field(default_factory=list)

    @property
    def d(self):
        return self.U.shape[0]

    @property
    def r1(self):
        return self.U.shape[1]

    @property
    def r2(self):
        return [Vi.shape[1] for Vi in self.V]

    @property
    def n_clients(self):
        return len(self.V)

    def validate(self, orth_tol=stiefel.ORTH_TOL, cross_tol=CROSS_TOL):
        """Raise unless all orthonormality and cross-orthogonality invariants hold."""
        stiefel.require_frame(self.U, orth_tol, name="shared frame")
        for i, Vi in enumerate(self.V):
            stiefel.require_frame(Vi, orth_tol, name=f"local frame {i}")
            if Vi.shape[0] != self.d:
                raise DimensionError(
                    f"local frame {i} has {Vi.shape[0]} rows, shared frame has {self.d}"
                )
            dev = np.max(np.abs(self.U.T @ Vi))
            if dev > cross_tol:
                raise InvariantError(
                    f"client {i}: shared/local cross product {dev:.3e} exceeds {cross_tol:.1e}"
                )
        return self


def covariance(Y):
    """Covariance S = Y Y^T / n of a (d, n) dataset; symmetric PSD by construction."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise ValueError(f"dataset must be (d, n) with n >= 1, got shape {Y.shape}")
    S = Y @ Y.T / Y.shape[1]
    return (S + S.T) / 2.0


def _require_covs(state, covs):
    if len(covs) != state.n_clients:
        raise DimensionError(
            f"{len(covs)} covariances for {state.n_clients} clients"
        )
    d = state.d
    for i, S in enumerate(covs):
        if S.shape != (d, d):
            raise DimensionError(f"covariance {i} has shape {S.shape}, expected ({d}, {d})")


def _captured(F, S):
    # tr(F^T S F) without forming the d x d projector
    return float(np.sum(F * (S @ F)))


def objective(state, covs):
    """Total explained variance (1/2) sum_i [tr(U^T S_i U) + tr(V_i^T S_i V_i)].

    Depends on the frames only through their column spaces; nonnegative for
    PSD covariances.
    """
    _require_covs(state, covs)
    total = 0.0
    for S, Vi in zip(covs, state.V):
        total += 0.5 * (_captured(state.U, S) + _captured(Vi, S))
    return total


def reconstruction_error(Y, U, V=None, cross_tol=CROSS_TOL):
    """Mean squared residual (1/n) ||Y - (P_U + P_V) Y||_F^2.

    ``V`` may be None when a single frame captures everything retained.
    Requires U^T V = 0 so that P_U + P_V is itself a projector.
    """
    Y = np.asarray(Y, dtype=float)
    U = np.asarray(U, dtype=float)
    if Y.ndim != 2 or U.shape[0] != Y.shape[0]:
        raise DimensionError(f"data {Y.shape} and frame {U.shape} disagree on d")
    fitted = U @ (U.T @ Y)
    if V is not None:
        V = np.asarray(V, dtype=float)
        if V.shape[0] != Y.shape[0]:
            raise DimensionError(f"data {Y.shape} and frame {V.shape} disagree on d")
        dev = np.max(np.abs(U.T @ V))
        if dev > cross_tol:
            raise InvariantError(
                f"frames not cross-orthogonal: {dev:.3e} exceeds {cross_tol:.1e}"
            )
        fitted = fitted + V @ (V.T @ Y)
    resid = Y - fitted
    return float(np.sum(resid * resid)) / Y.shape[1]


def mean_reconstruction_error(state, covs):
    """Mean over clients of tr(S_i) - tr(U^T S_i U) - tr(V_i^T S_i V_i).

    Identical to the raw-data reconstruction error, but computable from the
    covariances alone.
    """
    _require_covs(state, covs)
    errs = [
        float(np.trace(S)) - _captured(state.U, S) - _captured(Vi, S)
        for S, Vi in zip(covs, state.V)
    ]
    return float(np.mean(errs))


def kkt_residual(state, covs):
    """Squared norms of the first-order stationarity conditions.

    Returns ``(global_res, local_res)`` with
    global_res = ||sum_i (I - P_U - P_Vi) S_i U||_F^2 and
    local_res  = sum_i ||(I - P_U - P_Vi) S_i V_i||_F^2.
    Both vanish exactly at stationary points of the objective.
    """
    _require_covs(state, covs)
    U = state.U
    global_sum = np.zeros_like(U)
    local_res = 0.0
    for S, Vi in zip(covs, state.V):
        SU = S @ U
        global_sum += SU - U @ (U.T @ SU) - Vi @ (Vi.T @ SU)
        SV = S @ Vi
        res_v = SV - U @ (U.T @ SV) - Vi @ (Vi.T @ SV)
        local_res += float(np.sum(res_v * res_v))
    return float(np.sum(global_sum * global_sum)), local_res
