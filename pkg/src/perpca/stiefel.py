"""Primitives on the manifold of d x r matrices with orthonormal columns.

A *frame* is a ``(d, r)`` ndarray ``U`` with ``U.T @ U = I`` up to
``ORTH_TOL``. Update directions ``xi`` are arbitrary ``(d, r)`` matrices.
All functions are pure: inputs are never mutated.
"""

import numpy as np

from .errors import DimensionError, InvariantError, SingularityError

ORTH_TOL = 1e-10
RANK_TOL = 1e-12


def is_orthonormal(U, tol=ORTH_TOL):
    """True when the columns of U are orthonormal within ``tol`` (max-abs)."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] < U.shape[1]:
        return False
    gram = U.T @ U
    return bool(np.max(np.abs(gram - np.eye(U.shape[1]))) <= tol)


def require_frame(U, tol=ORTH_TOL, name="frame"):
    """Validate a frame and return it as a float ndarray."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {U.shape}")
    d, r = U.shape
    if not 1 <= r <= d:
        raise DimensionError(f"{name} needs 1 <= r <= d, got d={d}, r={r}")
    dev = np.max(np.abs(U.T @ U - np.eye(r)))
    if dev > tol:
        raise InvariantError(
            f"{name} columns not orthonormal: deviation {dev:.3e} exceeds {tol:.1e}"
        )
    return U


def _check_pair(U, xi):
    U = np.asarray(U, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if U.ndim != 2 or xi.shape != U.shape:
        raise DimensionError(f"shape mismatch: frame {U.shape}, update {xi.shape}")
    return U, xi


def project_normal(U, xi):
    """Component of xi normal to the manifold at U: (1/2) U (U^T xi + xi^T U)."""
    U, xi = _check_pair(U, xi)
    sym = U.T @ xi
    return U @ ((sym + sym.T) / 2.0)


def project_tangent(U, xi):
    """Component of xi tangent at U: xi minus its normal component.

    The result rho satisfies rho^T U + U^T rho = 0.
    """
    U, xi = _check_pair(U, xi)
    sym = U.T @ xi
    return xi - U @ ((sym + sym.T) / 2.0)


def polar_retract(U, xi, rank_tol=RANK_TOL):
    """Map U + xi to the nearest frame in Frobenius norm.

    Computed through the thin SVD of U + xi (product of its left and right
    singular vectors), which is numerically stabler than the inverse square
    root of I + xi^T U + U^T xi + xi^T xi it is equivalent to. Preserves
    col(U + xi). A zero update returns U unchanged.
    """
    U, xi = _check_pair(U, xi)
    if not xi.any():
        return U.copy()
    left, sing, right = np.linalg.svd(U + xi, full_matrices=False)
    if sing[-1] < rank_tol:
        raise SingularityError(
            f"rank-deficient update: smallest singular value {sing[-1]:.3e} < {rank_tol:.1e}"
        )
    return left @ right


def qr_retract(U, xi, rank_tol=RANK_TOL):
    """Map U + xi to the Q factor of its QR decomposition.

    The diagonal of R is forced nonnegative so the result is unique and a
    zero update returns U unchanged. Preserves col(U + xi).
    """
    U, xi = _check_pair(U, xi)
    if not xi.any():
        return U.copy()
    Q, R = np.linalg.qr(U + xi)
    diag = np.diagonal(R)
    if np.min(np.abs(diag)) < rank_tol:
        raise SingularityError(
            f"rank-deficient update: |R| diagonal minimum {np.min(np.abs(diag)):.3e} "
            f"< {rank_tol:.1e}"
        )
    return Q * np.where(diag < 0, -1.0, 1.0)


RETRACTIONS = {"polar": polar_retract, "qr": qr_retract}


def projector(U):
    """Orthogonal projector U U^T onto the column space of U."""
    U = np.asarray(U, dtype=float)
    return U @ U.T


def subspace_distance(A, B):
    """Squared Frobenius distance ||A A^T - B B^T||_F^2 between column spaces.

    Equals rank(A) + rank(B) - 2 ||A^T B||_F^2, but is computed from the
    explicit projector difference, which stays accurate down to ~1e-30 for
    nearly equal subspaces where the Gram identity cancels catastrophically.
    Zero iff col(A) = col(B). Both inputs must be orthonormal frames with
    the same number of rows.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[0] != B.shape[0]:
        raise DimensionError(f"frames need equal ambient dimension: {A.shape}, {B.shape}")
    diff = A @ A.T - B @ B.T
    return float(np.sum(diff * diff))


def random_frame(d, r, rng):
    """Haar-ish random frame: QR of a Gaussian matrix with positive R diagonal."""
    if not 1 <= r <= d:
        raise DimensionError(f"need 1 <= r <= d, got d={d}, r={r}")
    Q, R = np.linalg.qr(rng.standard_normal((d, r)))
    return Q * np.where(np.diagonal(R) < 0, -1.0, 1.0)


def orthonormalize(M, rank_tol=RANK_TOL):
    """Orthonormal basis of col(M) via SVD, independent of any retraction.

    Singular values below ``rank_tol`` relative to the largest are dropped.
    """
    M = np.asarray(M, dtype=float)
    left, sing, _ = np.linalg.svd(M, full_matrices=False)
    if sing[0] <= 0.0:
        raise SingularityError("matrix has no numerically nonzero singular values")
    keep = sing > rank_tol * sing[0]
    return left[:, keep]
