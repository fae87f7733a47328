"""Round-based federated Stiefel gradient ascent for shared/local components.

One communication round: every client updates its copy of the shared frame
and its local frame from the client covariance; the server averages the
shared-frame candidates and retracts the average; local frames are then
re-orthogonalized against the fresh shared frame (deflation + retraction),
so the state handed to the next round always satisfies U^T V_i = 0.

Clients are processed in ascending order and the server reduction is a
fixed-order sum, so a run is bitwise reproducible given (config, inputs).
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import baselines, metrics, model, stiefel
from .errors import DimensionError, SingularityError
from .rng import substream


@dataclass
class SolverConfig:
    r1: int
    r2: Union[int, Sequence[int]]
    rounds: int = 200
    stepsize: Union[float, str] = "auto"  # positive float or "auto"
    choice: int = 1  # 1: tangent step per block, 2: joint polar step
    retraction: str = "polar"  # "polar" or "qr"
    init: str = "distpca"  # "distpca" or "random"
    seed: int = 0
    record_trace: bool = True
    stepsize_scale: float = 0.5  # multiplier c in c / (G_max * sqrt(r)) for "auto"
    stop_subspace_tol: Optional[float] = None  # early stop; needs ground truth

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.choice not in (1, 2):
            raise ValueError(f"choice must be 1 or 2, got {self.choice}")
        if self.retraction not in stiefel.RETRACTIONS:
            raise ValueError(f"unknown retraction {self.retraction!r}")
        if self.init not in ("distpca", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if isinstance(self.stepsize, str):
            if self.stepsize != "auto":
                raise ValueError(f"stepsize must be positive or 'auto', got {self.stepsize!r}")
        elif self.stepsize <= 0:
            raise ValueError("explicit stepsize must be positive")
        if self.r1 < 1:
            raise ValueError("r1 must be >= 1")
        if self.stepsize_scale <= 0:
            raise ValueError("stepsize_scale must be positive")

    def r2_list(self, n_clients):
        return baselines._as_r2_list(self.r2, n_clients)


@dataclass
class RoundTrace:
    """Metrics of the feasible state at the end of one communication round."""

    round: int
    objective: float
    kkt_global: float
    kkt_local: float
    recon_error_mean: float
    subspace_error: Optional[float] = None

    FIELDS = ("round", "objective", "kkt_global", "kkt_local", "recon_error_mean", "subspace_error")


def operator_norm(S, rel_tol=1e-6, max_iter=10000):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    S = np.asarray(S, dtype=float)
    d = S.shape[0]
    v = 1.0 + 1e-3 * np.arange(d)  # deterministic start, unlikely to miss the top space
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = S @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # start vector hit the null space; a PSD matrix with a nonzero
            # diagonal entry cannot annihilate that basis vector
            k = int(np.argmax(np.diagonal(S)))
            if S[k, k] <= 0.0:
                return 0.0
            v = np.zeros(d)
            v[k] = 1.0
            continue
        v = w / norm
        lam_new = float(v @ (S @ v))
        if abs(lam_new - lam) <= rel_tol * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam


def auto_stepsize(covs, r, scale=0.5):
    """Constant stepsize scale / (G_max * sqrt(r)), G_max the largest operator norm."""
    if len(covs) == 0:
        raise ValueError("need at least one covariance")
    g_max = max(operator_norm(S) for S in covs)
    if g_max <= 0.0:
        raise ValueError("all covariances are zero; no scale to derive a stepsize from")
    return scale / (g_max * np.sqrt(r))


def init_random(d, r1, r2_list, seed):
    """Per-client joint orthonormalization of Gaussian blocks.

    The shared block is drawn once, so the split concatenation gives every
    client the same U; each V_i is orthonormal and orthogonal to U.
    """
    shared_raw = substream(seed, "init").standard_normal((d, r1))
    U = None
    V = []
    for i, r2 in enumerate(r2_list):
        raw = np.concatenate(
            [shared_raw, substream(seed, "init", i + 1).standard_normal((d, r2))], axis=1
        )
        Q = stiefel.qr_retract(np.zeros_like(raw), raw)
        if U is None:
            U = Q[:, :r1]
        V.append(Q[:, r1:])
    return model.ComponentState(U, V).validate()


def init_distpca(covs, r1, r2_list, seed):
    """Shared frame from one-shot distributed PCA, local frames random-then-corrected."""
    U = baselines.distpca_global(covs, r1, r2_list)
    d = U.shape[0]
    V = []
    for i, r2 in enumerate(r2_list):
        raw = substream(seed, "init", i + 1).standard_normal((d, r2))
        deflated = raw - U @ (U.T @ raw)
        V.append(stiefel.qr_retract(np.zeros_like(deflated), deflated))
    return model.ComponentState(U, V).validate()


def correction_step(V_half, U_next, retraction="polar"):
    """Restore cross-orthogonality of a local frame against a fresh shared frame.

    Deflates V_half by the projection onto col(U_next) and retracts, i.e.
    GR(V_half; -U_next U_next^T V_half). Because the retraction preserves
    column spaces, the result stays orthogonal to U_next. A frame that is
    already exactly orthogonal passes through unchanged.
    """
    retract = stiefel.RETRACTIONS[retraction]
    cross = U_next.T @ V_half
    if not cross.any():
        return V_half
    return retract(V_half, -U_next @ cross)


def _parallel_gradient(U, V, S):
    # tangent projection, at the concatenated frame [U, V], of S [U, V]
    W = np.concatenate([U, V], axis=1)
    G = S @ W
    sym = W.T @ G
    return G - W @ ((sym + sym.T) / 2.0)


def client_update_choice1(U, V, S, eta, retraction="polar"):
    """Tangent-gradient step: raw shared candidate, retracted local frame.

    Returns ``(U_candidate, V_half)``. The shared candidate U + eta * g_U is
    deliberately not orthonormalized; the server retracts after averaging.
    """
    r1 = U.shape[1]
    g = _parallel_gradient(U, V, S)
    U_candidate = U + eta * g[:, :r1]
    V_half = stiefel.RETRACTIONS[retraction](V, eta * g[:, r1:])
    return U_candidate, V_half


def client_update_choice2(U, V, S, eta):
    """Joint polar step: retract [U, V] + eta * S [U, V] and split."""
    r1 = U.shape[1]
    W = np.concatenate([U, V], axis=1)
    W_next = stiefel.polar_retract(W, eta * (S @ W))
    return W_next[:, :r1], W_next[:, r1:]


def server_aggregate(U_candidates, U_prev, retraction="polar"):
    """Average the clients' shared-frame candidates and retract at U_prev.

    Candidates are summed in list (ascending client) order.
    """
    if len(U_candidates) == 0:
        raise ValueError("no candidates to aggregate")
    for i, C in enumerate(U_candidates):
        if C.shape != U_prev.shape:
            raise DimensionError(f"candidate {i} has shape {C.shape}, expected {U_prev.shape}")
    mean = U_candidates[0].copy()
    for C in U_candidates[1:]:
        mean += C
    mean /= len(U_candidates)
    return stiefel.RETRACTIONS[retraction](U_prev, mean - U_prev)


def _check_covs(covs):
    if len(covs) == 0:
        raise ValueError("need at least one client covariance")
    covs = [np.asarray(S, dtype=float) for S in covs]
    d = covs[0].shape[0]
    for i, S in enumerate(covs):
        if S.ndim != 2 or S.shape != (d, d):
            raise DimensionError(f"covariance {i} has shape {S.shape}, expected ({d}, {d})")
        if np.max(np.abs(S - S.T)) > 1e-8 * max(1.0, float(np.max(np.abs(S)))):
            raise ValueError(f"covariance {i} is not symmetric")
    return covs, d


def run_perpca(covs, config, truth=None):
    """Run the federated solver on client covariances.

    Parameters
    ----------
    covs : list of (d, d) ndarray
        Per-client covariance matrices, ascending client order.
    config : SolverConfig
    truth : optional
        Ground-truth components, either a ``(U_true, V_true_list)`` pair or
        an object with ``U_true`` / ``V_true`` attributes. Only adds a
        subspace-error column to the trace (and enables early stopping);
        never influences the iteration.

    Returns
    -------
    (ComponentState, list of RoundTrace)
        The final feasible state and one trace record per completed round
        (empty when ``config.record_trace`` is off).
    """
    covs, d = _check_covs(covs)
    r2_list = config.r2_list(len(covs))
    if config.r1 + max(r2_list) > d:
        raise ValueError(f"r1 + max(r2) = {config.r1 + max(r2_list)} exceeds dimension {d}")

    if config.init == "random":
        state = init_random(d, config.r1, r2_list, config.seed)
    else:
        state = init_distpca(covs, config.r1, r2_list, config.seed)

    truth_pair = None if truth is None else metrics.as_truth_pair(truth)
    if config.stop_subspace_tol is not None and truth_pair is None:
        raise ValueError("early stopping on subspace error needs ground truth")

    if config.rounds == 0:
        return state, []

    if config.stepsize == "auto":
        eta = auto_stepsize(covs, max([config.r1] + r2_list), config.stepsize_scale)
    else:
        eta = float(config.stepsize)

    retraction = config.retraction
    trace = []
    for rnd in range(1, config.rounds + 1):
        candidates = []
        halves = []
        for i, S in enumerate(covs):
            try:
                if config.choice == 1:
                    cand, half = client_update_choice1(state.U, state.V[i], S, eta, retraction)
                else:
                    cand, half = client_update_choice2(state.U, state.V[i], S, eta)
            except SingularityError as exc:
                raise SingularityError(f"round {rnd}, client {i}: {exc}") from exc
            candidates.append(cand)
            halves.append(half)
        try:
            U_next = server_aggregate(candidates, state.U, retraction)
        except SingularityError as exc:
            raise SingularityError(f"round {rnd}, server aggregation: {exc}") from exc
        V_next = []
        for i, half in enumerate(halves):
            try:
                V_next.append(correction_step(half, U_next, retraction))
            except SingularityError as exc:
                raise SingularityError(
                    f"round {rnd}, client {i}: local frame collapsed onto the shared frame "
                    f"({exc})"
                ) from exc
        state = model.ComponentState(U_next, V_next)

        sub_err = None
        if truth_pair is not None:
            sub_err = metrics.subspace_error(state, truth_pair)
        if config.record_trace:
            kkt_g, kkt_l = model.kkt_residual(state, covs)
            trace.append(
                RoundTrace(
                    round=rnd,
                    objective=model.objective(state, covs),
                    kkt_global=kkt_g,
                    kkt_local=kkt_l,
                    recon_error_mean=model.mean_reconstruction_error(state, covs),
                    subspace_error=sub_err,
                )
            )
        if (
            config.stop_subspace_tol is not None
            and sub_err is not None
            and sub_err < config.stop_subspace_tol
        ):
            break
    return state, trace
