"""Dense complex linear algebra kernel.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
Superoperators act on column-stacked vectorizations::

    vec([[a, b],
         [c, d]]) = (a, c, b, d)

so that ``vec(A X B) = (B.T kron A) vec(X)``.  This convention is used by
every module in the package.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailure,
    DimensionCap,
    NonHermitianInput,
    OverflowGuard,
    ShapeMismatch,
)

HERMITIAN_RTOL = 1e-12
EXP_NORM_CAP = 1e4
SYM_DIM_CAP = 4096


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    return A


def _require_square(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {A.shape}")


def hermiticity_defect(M) -> float:
    A = np.asarray(M, dtype=complex)
    return float(np.linalg.norm(A - A.conj().swapaxes(-1, -2)))


def is_hermitian(M, rtol: float = HERMITIAN_RTOL) -> bool:
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    return hermiticity_defect(A) <= rtol * max(1.0, float(np.linalg.norm(A)))


def hermitize(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    return 0.5 * (A + A.conj().swapaxes(-1, -2))


def dagger(M) -> np.ndarray:
    return np.asarray(M).conj().swapaxes(-1, -2)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def hermitian_eig(M, rtol: float = HERMITIAN_RTOL) -> Spectrum:
    A = as_matrix(M)
    _require_square(A)
    if not is_hermitian(A, rtol):
        raise NonHermitianInput(
            f"matrix is not Hermitian (defect {hermiticity_defect(A):.3e})"
        )
    try:
        w, V = np.linalg.eigh(hermitize(A))
    except np.linalg.LinAlgError as exc:  # LAPACK iteration cap
        raise ConvergenceFailure(str(exc)) from exc
    return Spectrum(w, V)


def min_eigenvalue(M) -> float:
    """Smallest eigenvalue of a Hermitian matrix (or of each in a stack; returns the min)."""
    return float(np.linalg.eigvalsh(hermitize(M)).min())


def psd_project(M) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix to the Hermitian ``M``."""
    spec = hermitian_eig(M)
    V = spec.eigenvectors
    return (V * np.maximum(spec.eigenvalues, 0.0)) @ V.conj().T


def psd_project_stack(blocks: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Blockwise projection of a ``(..., d, d)`` stack onto ``{X : X >= floor * I}``.

    No Hermiticity check; the stack is symmetrized first.  Used in solver
    inner loops where the check would dominate the cost.
    """
    try:
        w, V = np.linalg.eigh(hermitize(blocks))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    w = np.maximum(w, floor)
    return (V * w[..., None, :]) @ V.conj().swapaxes(-1, -2)


def mat_exp(M, norm_cap: float = EXP_NORM_CAP) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant.

    Works for non-normal input.  Raises :class:`OverflowGuard` when the
    1-norm of ``M`` exceeds ``norm_cap``.
    """
    A = as_matrix(M)
    _require_square(A)
    norm1 = float(np.abs(A).sum(axis=0).max()) if A.size else 0.0
    if norm1 > norm_cap:
        raise OverflowGuard(f"||M||_1 = {norm1:.3e} exceeds cap {norm_cap:.3e}")
    if norm1 == 0.0:
        return np.eye(A.shape[0], dtype=complex)
    return scipy.linalg.expm(A)


def schur_product(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise ShapeMismatch(f"Schur product of shapes {A.shape} and {B.shape}")
    return A * B


def tensor(*factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for F in factors:
        out = np.kron(out, as_matrix(F))
    return out


def partial_trace(M, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every tensor factor whose index is not in ``keep``.

    ``dims`` lists the factor dimensions; ``keep`` is an index or a
    sequence of indices (kept factors stay in their original order).
    """
    A = as_matrix(M)
    dims = [int(x) for x in dims]
    total = int(np.prod(dims))
    if A.shape != (total, total):
        raise ShapeMismatch(f"matrix shape {A.shape} does not match dims {dims}")
    keep = [keep] if np.isscalar(keep) else list(keep)
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ShapeMismatch(f"keep indices {keep} out of range for {n} factors")
    keep = sorted(set(keep))
    T = A.reshape(dims + dims)
    # trace the discarded factors from the highest index down so axes stay valid
    cur = n
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        T = np.trace(T, axis1=idx, axis2=idx + cur)
        cur -= 1
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return T.reshape(kd, kd)


def vec(A) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(A, dtype=complex).T.reshape(-1)


def unvec(v, d: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ShapeMismatch(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d).T


def superop_dim(S) -> int:
    S = as_matrix(S)
    _require_square(S)
    d = int(round(np.sqrt(S.shape[0])))
    if d * d != S.shape[0]:
        raise ShapeMismatch(f"superoperator size {S.shape[0]} is not a perfect square")
    return d


def apply_superop(S, A) -> np.ndarray:
    """Apply a superoperator to a matrix or to a ``(k, d, d)`` stack."""
    A = np.asarray(A, dtype=complex)
    d = A.shape[-1]
    S = np.asarray(S, dtype=complex)
    if S.shape != (d * d, d * d):
        raise ShapeMismatch(f"superop {S.shape} cannot act on {d}x{d} matrices")
    flat = A.swapaxes(-1, -2).reshape(A.shape[:-2] + (d * d,))
    out = flat @ S.T
    return out.reshape(A.shape[:-2] + (d, d)).swapaxes(-1, -2)


def superop_from_map(func, d: int) -> np.ndarray:
    """Matrix of a linear map on d x d matrices, built column by column."""
    S = np.zeros((d * d, d * d), dtype=complex)
    for col in range(d * d):
        E = np.zeros(d * d, dtype=complex)
        E[col] = 1.0
        S[:, col] = vec(func(unvec(E, d)))
    return S


def commutation_matrix(d: int) -> np.ndarray:
    """Permutation ``T`` with ``T vec(A) = vec(A.T)``."""
    T = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            T[i * d + j, j * d + i] = 1.0
    return T


def trace_dual(S) -> np.ndarray:
    """Superoperator of the trace-dual map.

    If ``S`` represents ``L`` then the result represents the map ``V`` with
    ``tr[V(X) A] = tr[X L(A)]`` for all ``X, A``.
    """
    d = superop_dim(S)
    T = commutation_matrix(d)
    return T @ np.asarray(S).T @ T


def choi(superop) -> np.ndarray:
    """Choi matrix ``sum_ij L(|i><j|) kron |i><j|``.

    The map is completely positive iff the result is PSD.  For a map read in
    the Schrodinger picture, trace preservation is ``tr_1 Choi = I``; for a
    Heisenberg map, unitality is ``tr_2 Choi = I``.
    """
    S = as_matrix(superop)
    d = superop_dim(S)
    J = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            Eij = np.zeros((d, d), dtype=complex)
            Eij[i, j] = 1.0
            J += np.kron(unvec(S @ vec(Eij), d), Eij)
    return J


def is_completely_positive(superop, atol: float = 1e-8) -> bool:
    return min_eigenvalue(choi(superop)) >= -atol


def sym_projector(d: int, n: int, cap: int = SYM_DIM_CAP) -> np.ndarray:
    """Projector onto the symmetric subspace of the n-fold tensor power of C^d."""
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive")
    D = d**n
    if D > cap:
        raise DimensionCap(f"d**n = {D} exceeds cap {cap}")
    idx = np.arange(D).reshape((d,) * n)
    P = np.zeros((D, D))
    rows = np.arange(D)
    for perm in itertools.permutations(range(n)):
        cols = np.transpose(idx, perm).reshape(-1)
        P[rows, cols] += 1.0
    P /= factorial(n)
    return P.astype(complex)


def sym_rank(d: int, n: int) -> int:
    return comb(d + n - 1, n)
