"""Dense symmetric linear algebra building blocks.

SPD factorization and solves, the symmetric PSD matrix square root,
Moore-Penrose pseudoinverses with explicit rank reporting, and
Haar-distributed random orthogonal matrices.

All functions are pure: they never mutate their inputs and hold no module
state, so they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NotPositiveDefiniteError

__all__ = [
    "SpdFactor",
    "PseudoInverseResult",
    "spd_factor",
    "spd_solve",
    "sym_sqrt",
    "pseudo_inverse",
    "haar_orthogonal",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpdFactor:
    """Lower-triangular Cholesky factor L of an SPD matrix, L @ L.T == a."""

    dim: int
    lower: np.ndarray


@dataclass(frozen=True)
class PseudoInverseResult:
    """Moore-Penrose pseudoinverse with the rank decision that produced it.

    ``tolerance`` is the absolute singular-value cutoff actually applied
    (relative tolerance times the largest singular value).
    """

    pinv: np.ndarray
    rank: int
    tolerance: float


def _as_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {a.shape}")
    return a


def _require_symmetric(a: np.ndarray, tol: float = 1e-12) -> None:
    scale = max(float(np.abs(a).max(initial=0.0)), 1.0)
    if float(np.abs(a - a.T).max(initial=0.0)) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")


def spd_factor(a: np.ndarray) -> SpdFactor:
    """Cholesky-factor a symmetric positive definite matrix.

    Raises :class:`NotPositiveDefiniteError` when the factorization breaks
    down or any pivot falls below ``dim * eps * max(diag(a))``.
    """
    a = _as_square(a)
    _require_symmetric(a)
    p = a.shape[0]
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    pivot_floor = p * _EPS * float(np.diag(a).max(initial=0.0))
    if float((np.diag(lower) ** 2).min()) <= pivot_floor:
        raise NotPositiveDefiniteError(
            f"pivot below {pivot_floor:.3e}; matrix numerically singular"
        )
    return SpdFactor(dim=p, lower=lower)


def spd_solve(factor: SpdFactor, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b given ``factor = spd_factor(a)``.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor.dim:
        raise DimensionMismatchError(
            f"rhs has {b.shape[0]} rows, factor dimension is {factor.dim}"
        )
    return scipy.linalg.cho_solve((factor.lower, True), b, check_finite=False)


def sym_sqrt(a: np.ndarray) -> np.ndarray:
    """Unique symmetric PSD square root of an SPD matrix.

    Computed from the symmetric eigendecomposition (not Cholesky) so the
    result B satisfies B == B.T and B @ B == a.
    """
    a = _as_square(a)
    _require_symmetric(a)
    vals, vecs = np.linalg.eigh(a)
    p = a.shape[0]
    if vals[0] <= p * _EPS * max(float(vals[-1]), 0.0):
        raise NotPositiveDefiniteError(
            f"smallest eigenvalue {vals[0]:.3e} is not safely positive"
        )
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return (root + root.T) / 2.0


def pseudo_inverse(a: np.ndarray, rel_tol: float = 1e-10) -> PseudoInverseResult:
    """Moore-Penrose pseudoinverse with relative singular-value truncation.

    Singular values below ``rel_tol * s_max`` are treated as zero.  For
    symmetric input the symmetric eigendecomposition is used instead of a
    full SVD; a rank-0 (zero) matrix yields a zero pseudoinverse.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")

    symmetric = a.shape[0] == a.shape[1] and np.allclose(a, a.T, atol=1e-12, rtol=1e-12)
    if symmetric:
        vals, vecs = np.linalg.eigh(a)
        mags = np.abs(vals)
        cutoff = rel_tol * float(mags.max(initial=0.0))
        keep = mags > cutoff
        rank = int(keep.sum())
        if rank == 0:
            return PseudoInverseResult(np.zeros_like(a), 0, cutoff)
        sub = vecs[:, keep]
        pinv = (sub / vals[keep]) @ sub.T
        return PseudoInverseResult((pinv + pinv.T) / 2.0, rank, cutoff)

    u, s, vt = np.linalg.svd(a, full_matrices=False)
    cutoff = rel_tol * float(s.max(initial=0.0))
    keep = s > cutoff
    rank = int(keep.sum())
    if rank == 0:
        return PseudoInverseResult(np.zeros(a.T.shape), 0, cutoff)
    pinv = (vt[keep].T / s[keep]) @ u[:, keep].T
    return PseudoInverseResult(pinv, rank, cutoff)


def haar_orthogonal(p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-distributed p x p orthogonal matrix.

    QR decomposition of a standard Gaussian matrix, with the sign of each
    column fixed so that R has a positive diagonal; this makes the result
    unique (hence reproducible) for a given Gaussian draw.
    """
    if p < 1:
        raise DimensionMismatchError(f"p must be >= 1, got {p}")
    z = rng.standard_normal((p, p))
    q, r = np.linalg.qr(z)
    signs = np.sign(np.diagonal(r))
    signs = np.where(signs == 0.0, 1.0, signs)
    return q * signs
