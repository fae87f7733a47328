"""Planted-truth synthetic data.

Observations on client i follow

    y = U phi + V_i psi + eps

with orthonormal shared frame U (d x r1), per-client local frames V_i
(d x r2) orthogonal to U, i.i.d. score vectors phi, psi, and isotropic
Gaussian noise eps. Heterogeneity of the local frames is summarized by
theta = 1 - lambda_max(mean of local projectors); theta > 0 makes the
shared/local split identifiable.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from . import stiefel
from .model import ComponentState
from .rng import substream


@dataclass
class GenerativeSpec:
    d: int
    N: int
    r1: int
    r2: int
    n_per_client: Union[int, Sequence[int]]
    global_score_std: float = 1.0
    local_score_std: float = 10.0
    noise_std: float = 0.0
    theta_target: Optional[float] = None  # exact control only for N=2, r2=1, d>=3
    seed: int = 0
    score_dist: str = "gaussian"  # or "rademacher"
    groups: Optional[Sequence[int]] = None  # clients with equal labels share V

    def __post_init__(self):
        if self.r1 + self.r2 > self.d:
            raise ValueError(f"r1 + r2 = {self.r1 + self.r2} exceeds dimension {self.d}")
        if self.r1 < 1 or self.r2 < 1 or self.N < 1:
            raise ValueError("r1, r2 and N must be positive")
        if np.ndim(self.n_per_client) == 0:
            self.n_per_client = [int(self.n_per_client)] * self.N
        else:
            self.n_per_client = [int(n) for n in self.n_per_client]
        if len(self.n_per_client) != self.N:
            raise ValueError(f"{len(self.n_per_client)} sample counts for {self.N} clients")
        if min(self.n_per_client) < 1:
            raise ValueError("every client needs at least one observation")
        for std in (self.global_score_std, self.local_score_std, self.noise_std):
            if std < 0:
                raise ValueError("standard deviations must be >= 0")
        if self.score_dist not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown score distribution {self.score_dist!r}")
        if self.theta_target is not None:
            if not 0.0 < self.theta_target <= 0.5:
                raise ValueError(
                    "theta_target must lie in (0, 0.5]; two rank-1 local frames "
                    "cannot realize a larger heterogeneity"
                )
            if not (self.N == 2 and self.r2 == 1 and self.d >= 3):
                raise ValueError("theta_target control needs N=2, r2=1, d>=3")
            if self.d < self.r1 + 2:
                raise ValueError(
                    "theta_target control needs two directions beyond the shared "
                    f"frame: d >= r1 + 2, got d={self.d}, r1={self.r1}"
                )
        if self.groups is not None:
            self.groups = [int(g) for g in self.groups]
            if len(self.groups) != self.N:
                raise ValueError(f"{len(self.groups)} group labels for {self.N} clients")


@dataclass
class PlantedTruth:
    U_true: np.ndarray
    V_true: List[np.ndarray]
    theta_actual: float
    eigengap: float
    groups: Optional[List[int]] = None

    def as_state(self):
        return ComponentState(self.U_true, list(self.V_true))


def theta_of(V_list):
    """Heterogeneity constant 1 - lambda_max of the averaged local projectors.

    Zero when all local subspaces coincide; 1 - 1/N for mutually orthogonal
    ones.
    """
    if len(V_list) == 0:
        raise ValueError("need at least one local frame")
    d = V_list[0].shape[0]
    avg = np.zeros((d, d))
    for Vi in V_list:
        avg += Vi @ Vi.T
    avg /= len(V_list)
    lam_max = float(np.linalg.eigvalsh(avg)[-1])
    return max(0.0, 1.0 - lam_max)


def eigengap_of(pop_cov_parts, r1, r2):
    """Spectral margin between retained and discarded population eigenvalues.

    ``pop_cov_parts`` is one ``(Sigma_g, Sigma_l)`` pair per client; the gap
    for a client is

        min(lambda_r1(Sigma_g), lambda_r2(Sigma_l))
          - max(lambda_{r1+1}(Sigma_g), lambda_{r2+1}(Sigma_l))

    and the minimum over clients is returned. A nonpositive gap means the
    retained components are not spectrally separated and raises ValueError.
    """
    gaps = []
    for Sigma_g, Sigma_l in pop_cov_parts:
        wg = np.sort(np.linalg.eigvalsh(Sigma_g))[::-1]
        wl = np.sort(np.linalg.eigvalsh(Sigma_l))[::-1]
        d = wg.shape[0]
        kept = min(wg[r1 - 1], wl[r2 - 1])
        dropped = max(
            wg[r1] if r1 < d else 0.0,
            wl[r2] if r2 < d else 0.0,
        )
        gaps.append(kept - dropped)
    gap = float(min(gaps))
    if gap < 0:
        raise ValueError(f"negative eigengap {gap:.3e}: retained spectrum not separated")
    return gap


def _raw_eigengap(spec):
    # same number as eigengap_of on population_covariance_parts, but without
    # the sign flag, so noisy / degenerate specs can still be described
    sg2 = spec.global_score_std**2
    sl2 = spec.local_score_std**2
    se2 = spec.noise_std**2
    if spec.d > spec.r1 + spec.r2:
        return min(sg2, sl2) - se2
    return min(sg2, sl2)


def generate_components(spec):
    """Draw the planted shared and local frames for a generative spec.

    Local frames are orthonormalized against the shared frame client by
    client; with ``theta_target`` (N=2, r2=1 geometry) the two local
    directions are rotated so the realized heterogeneity hits the target
    exactly.
    """
    rng = substream(spec.seed, "components")
    if spec.theta_target is not None:
        base = stiefel.random_frame(spec.d, spec.r1 + 2, rng)
        U = base[:, : spec.r1]
        w1, w2 = base[:, spec.r1], base[:, spec.r1 + 1]
        # theta = (1 - cos(angle between the locals)) / 2, inverted for the angle
        half = 0.5 * np.arccos(1.0 - 2.0 * spec.theta_target)
        v1 = np.cos(half) * w1 + np.sin(half) * w2
        v2 = np.cos(half) * w1 - np.sin(half) * w2
        V = [v1[:, None], v2[:, None]]
    else:
        U = stiefel.random_frame(spec.d, spec.r1, rng)
        labels = list(spec.groups) if spec.groups is not None else list(range(spec.N))
        frames = {}
        for label in sorted(set(labels)):
            raw = rng.standard_normal((spec.d, spec.r2))
            deflated = raw - U @ (U.T @ raw)
            frames[label] = stiefel.qr_retract(np.zeros_like(deflated), deflated)
        V = [frames[label] for label in labels]
    return PlantedTruth(
        U_true=U,
        V_true=V,
        theta_actual=theta_of(V),
        eigengap=_raw_eigengap(spec),
        groups=list(spec.groups) if spec.groups is not None else None,
    )


def _scores(rng, shape, std, dist):
    if std == 0.0:
        return np.zeros(shape)
    if dist == "rademacher":
        return std * rng.choice([-1.0, 1.0], size=shape)
    return std * rng.standard_normal(shape)


def generate_observations(truth, spec, test_split=0):
    """Sample the client datasets for a planted truth.

    Returns one ``(d, n_i)`` array per client. Each client draws from its
    own substream of ``spec.seed``, so changing N leaves earlier clients'
    data untouched. ``test_split`` selects an independent replicate (0 is
    the training draw).
    """
    datasets = []
    for i in range(spec.N):
        rng_s = substream(spec.seed, "scores", i, test_split)
        rng_n = substream(spec.seed, "noise", i, test_split)
        n = spec.n_per_client[i]
        phi = _scores(rng_s, (spec.r1, n), spec.global_score_std, spec.score_dist)
        psi = _scores(rng_s, (spec.r2, n), spec.local_score_std, spec.score_dist)
        Y = truth.U_true @ phi + truth.V_true[i] @ psi
        if spec.noise_std > 0:
            Y = Y + spec.noise_std * rng_n.standard_normal((spec.d, n))
        datasets.append(Y)
    return datasets


def population_covariance(truth, spec, client):
    """Analytic covariance sg^2 P_U + sl^2 P_Vi + se^2 I of one client."""
    d = spec.d
    return (
        spec.global_score_std**2 * truth.U_true @ truth.U_true.T
        + spec.local_score_std**2 * truth.V_true[client] @ truth.V_true[client].T
        + spec.noise_std**2 * np.eye(d)
    )


def population_covariance_parts(truth, spec):
    """Per-client ``(Sigma_g, Sigma_l)`` split of the analytic covariance.

    The isotropic noise is attributed to the discarded directions of the
    local part, so the eigengap of the pair shrinks by the noise variance.
    """
    d = spec.d
    parts = []
    for i in range(spec.N):
        P_u = truth.U_true @ truth.U_true.T
        P_v = truth.V_true[i] @ truth.V_true[i].T
        Sigma_g = spec.global_score_std**2 * P_u
        Sigma_l = spec.local_score_std**2 * P_v + spec.noise_std**2 * (
            np.eye(d) - P_u - P_v
        )
        parts.append((Sigma_g, Sigma_l))
    return parts
