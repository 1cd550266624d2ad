"""Dense symmetric-matrix utilities for the stability tests.

Everything here is a thin, carefully-toleranced layer over ``numpy.linalg``:
sign classification of symmetric matrices, PSD square roots, full-rank
factorizations M = J J', and numerical null-space containment.  These are the
scalar building blocks the feedback theorems are phrased in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonSymmetricError, NotPSDError

__all__ = [
    "DefinitenessKind",
    "Definiteness",
    "FullRankFactor",
    "classify_definiteness",
    "psd_sqrt",
    "full_rank_factor",
    "nullspace_contained",
    "symmetrize",
    "numerical_rank",
]

#: absolute eigenvalue floor used when a matrix norm is tiny
ABS_EIG_FLOOR = 1e-9

#: relative asymmetry accepted before a "symmetric" input is rejected
SYM_RTOL = 1e-8


class DefinitenessKind(enum.Enum):
    POSITIVE_DEFINITE = "positive_definite"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    NEGATIVE_DEFINITE = "negative_definite"
    NEGATIVE_SEMIDEFINITE = "negative_semidefinite"
    INDEFINITE = "indefinite"
    ZERO = "zero"


@dataclass(frozen=True)
class Definiteness:
    """Sign classification of a symmetric matrix at a given tolerance."""

    kind: DefinitenessKind
    min_eig: float
    max_eig: float
    tol_used: float

    @property
    def is_psd(self) -> bool:
        return self.kind in (
            DefinitenessKind.POSITIVE_DEFINITE,
            DefinitenessKind.POSITIVE_SEMIDEFINITE,
            DefinitenessKind.ZERO,
        )

    @property
    def is_nsd(self) -> bool:
        return self.kind in (
            DefinitenessKind.NEGATIVE_DEFINITE,
            DefinitenessKind.NEGATIVE_SEMIDEFINITE,
            DefinitenessKind.ZERO,
        )

    @property
    def is_pd(self) -> bool:
        return self.kind is DefinitenessKind.POSITIVE_DEFINITE

    @property
    def is_nd(self) -> bool:
        return self.kind is DefinitenessKind.NEGATIVE_DEFINITE


@dataclass(frozen=True)
class FullRankFactor:
    """Full column rank factor J with J J' reconstructing the input."""

    J: np.ndarray
    residual: float

    @property
    def rank(self) -> int:
        return self.J.shape[1]


def symmetrize(M: np.ndarray, rtol: float = SYM_RTOL) -> np.ndarray:
    """Return (M + M')/2, rejecting inputs that are not nearly symmetric.

    Raises
    ------
    NonSymmetricError
        If ``||M - M'|| > rtol * max(||M||, 1e-300)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.linalg.norm(M), 1e-300)
    defect = np.linalg.norm(M - M.T)
    if defect > rtol * scale:
        raise NonSymmetricError(
            f"asymmetry {defect:.3e} exceeds {rtol:.1e} * ||M|| = {rtol * scale:.3e}"
        )
    return 0.5 * (M + M.T)


def numerical_rank(M: np.ndarray) -> int:
    """Rank via SVD with the standard max(dims)*eps*sigma_1 cutoff."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    cutoff = max(M.shape) * np.finfo(float).eps * s[0]
    return int(np.sum(s > cutoff))


def _eig_tol(norm: float, tol: float | None) -> float:
    if tol is not None:
        return float(tol)
    return max(ABS_EIG_FLOOR, ABS_EIG_FLOOR * norm)


def classify_definiteness(M: np.ndarray, tol: float | None = None) -> Definiteness:
    """Classify a real symmetric matrix as PD/PSD/ND/NSD/indefinite/zero.

    Parameters
    ----------
    M : array_like
        Square matrix; symmetrized internally if its asymmetry is within
        tolerance, rejected otherwise.
    tol : float, optional
        Eigenvalue threshold separating "zero" from "signed".  Defaults to
        ``max(1e-9, 1e-9 * ||M||_2)``.

    Returns
    -------
    Definiteness
        Classification plus the extreme eigenvalues and the tolerance used.
    """
    M = np.asarray(M, dtype=float)
    sym_rtol = SYM_RTOL if tol is None else max(SYM_RTOL, tol)
    Ms = symmetrize(M, rtol=sym_rtol)
    w = np.linalg.eigvalsh(Ms)
    lo, hi = float(w[0]), float(w[-1])
    t = _eig_tol(np.linalg.norm(Ms, 2), tol)
    if max(abs(lo), abs(hi)) <= t:
        kind = DefinitenessKind.ZERO
    elif lo > t:
        kind = DefinitenessKind.POSITIVE_DEFINITE
    elif lo >= -t:
        kind = DefinitenessKind.POSITIVE_SEMIDEFINITE
    elif hi < -t:
        kind = DefinitenessKind.NEGATIVE_DEFINITE
    elif hi <= t:
        kind = DefinitenessKind.NEGATIVE_SEMIDEFINITE
    else:
        kind = DefinitenessKind.INDEFINITE
    return Definiteness(kind=kind, min_eig=lo, max_eig=hi, tol_used=t)


def psd_sqrt(M: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Symmetric PSD square root S with S @ S = M.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero; anything below ``-tol``
    raises :class:`NotPSDError`.
    """
    Ms = symmetrize(np.asarray(M, dtype=float))
    w, V = np.linalg.eigh(Ms)
    t = _eig_tol(max(abs(w[0]), abs(w[-1])) if w.size else 0.0, tol)
    if w.size and w[0] < -t:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e} below -{t:.1e}")
    S = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return 0.5 * (S + S.T)


def full_rank_factor(M: np.ndarray, tol: float | None = None) -> FullRankFactor:
    """Factor a symmetric PSD matrix as M = J J' with J of full column rank.

    The number of columns of J equals the numerical rank of M (eigenvalues
    above ``max(dims) * eps * lambda_max`` are kept).
    """
    Ms = symmetrize(np.asarray(M, dtype=float))
    w, V = np.linalg.eigh(Ms)
    scale = max(abs(w[0]), abs(w[-1])) if w.size else 0.0
    t = _eig_tol(scale, tol)
    if w.size and w[0] < -t:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e} below -{t:.1e}")
    cutoff = max(Ms.shape) * np.finfo(float).eps * max(scale, 0.0)
    keep = w > max(cutoff, 0.0)
    # deterministic gauge: columns by decreasing eigenvalue, dominant entry positive
    idx = np.argsort(w[keep])[::-1]
    J = (V[:, keep] * np.sqrt(w[keep]))[:, idx]
    for j in range(J.shape[1]):
        lead = np.argmax(np.abs(J[:, j]))
        if J[lead, j] < 0:
            J[:, j] = -J[:, j]
    residual = float(np.linalg.norm(J @ J.T - Ms))
    return FullRankFactor(J=J, residual=residual)


def nullspace_contained(M1: np.ndarray, M2: np.ndarray, tol: float = 1e-8) -> bool:
    """True iff null(M1) is contained in null(M2), both by SVD.

    Each right null-space basis vector v of M1 must satisfy
    ``||M2 v|| <= tol * ||M2||``.  A zero M2 contains every null space.
    """
    M1 = np.atleast_2d(np.asarray(M1, dtype=float))
    M2 = np.atleast_2d(np.asarray(M2, dtype=float))
    if M1.shape[1] != M2.shape[1]:
        raise DimensionError(
            f"column counts differ: {M1.shape[1]} vs {M2.shape[1]}"
        )
    norm2 = np.linalg.norm(M2, 2)
    if norm2 == 0.0:
        return True
    _, s, Vt = np.linalg.svd(M1)
    cutoff = max(M1.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    null_basis = Vt[np.sum(s > cutoff):].T
    if null_basis.shape[1] == 0:
        return True
    return bool(np.all(np.linalg.norm(M2 @ null_basis, axis=0) <= tol * norm2))
