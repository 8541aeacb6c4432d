"""Finite-outcome observables (POVMs) and the scalar functionals built on them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidBiObservable,
    InvalidBloch,
    InvalidObservable,
    NotAKernel,
    PartitionMismatch,
    ShapeMismatch,
)
from .numkit import hermitize

if TYPE_CHECKING:
    from .dynamics import DecoherencePartition

EFFECT_ATOL = 1e-10
BI_ATOL = 1e-8

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_1, SIGMA_2, SIGMA_3)


def _labels(n: int, outcomes) -> tuple[str, ...]:
    if outcomes is None:
        return tuple(str(i) for i in range(n))
    labels = tuple(str(o) for o in outcomes)
    if len(labels) != n:
        raise ShapeMismatch(f"{len(labels)} labels for {n} effects")
    return labels


@dataclass(frozen=True, eq=False)
class Observable:
    """A finite-outcome POVM stored as a ``(n_outcomes, d, d)`` effect stack.

    Construction does not validate; call :func:`validate` for a report.
    """

    effects: np.ndarray
    outcomes: tuple[str, ...] = ()

    def __post_init__(self):
        E = np.array(self.effects, dtype=complex)
        if E.ndim != 3 or E.shape[1] != E.shape[2]:
            raise ShapeMismatch(f"effects must have shape (n, d, d), got {E.shape}")
        E.setflags(write=False)
        object.__setattr__(self, "effects", E)
        object.__setattr__(self, "outcomes", _labels(E.shape[0], self.outcomes or None))

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.effects.shape[0]

    def __len__(self) -> int:
        return self.n_outcomes

    def __getitem__(self, i) -> np.ndarray:
        return self.effects[i]

    def map(self, func) -> "Observable":
        """Apply a linear map effect-by-effect, keeping labels."""
        return Observable(np.array([func(A) for A in self.effects]), self.outcomes)

    def is_diagonal(self, atol: float = 1e-10) -> bool:
        off = self.effects.copy()
        idx = np.arange(self.dim)
        off[:, idx, idx] = 0
        return bool(np.abs(off).max(initial=0.0) <= atol)

    def allclose(self, other: "Observable", atol: float = 1e-10) -> bool:
        return self.effects.shape == other.effects.shape and bool(
            np.allclose(self.effects, other.effects, atol=atol, rtol=0)
        )


@dataclass(frozen=True)
class ValidationReport:
    min_eigenvalues: tuple[float, ...]
    max_eigenvalues: tuple[float, ...]
    hermiticity_defect: float
    normalization_defect: float
    atol: float

    @property
    def passed(self) -> bool:
        return (
            self.hermiticity_defect <= self.atol
            and self.normalization_defect <= self.atol
            and min(self.min_eigenvalues) >= -self.atol
            and max(self.max_eigenvalues) <= 1 + self.atol
        )

    def __bool__(self) -> bool:
        return self.passed


def validate(E: Observable, atol: float = EFFECT_ATOL) -> ValidationReport:
    eff = E.effects
    herm = float(np.abs(eff - eff.conj().swapaxes(-1, -2)).max(initial=0.0))
    w = np.linalg.eigvalsh(hermitize(eff))
    norm = float(np.linalg.norm(eff.sum(axis=0) - np.eye(E.dim)))
    return ValidationReport(
        tuple(float(x) for x in w.min(axis=1)),
        tuple(float(x) for x in w.max(axis=1)),
        herm,
        norm,
        atol,
    )


def require_valid(E: Observable, atol: float = EFFECT_ATOL) -> None:
    report = validate(E, atol)
    if not report.passed:
        raise InvalidObservable(f"invalid observable: {report}")


# -- constructors ---------------------------------------------------------


def trivial_observable(d: int, probs: Sequence[float] = (1.0,), outcomes=None) -> Observable:
    p = np.asarray(probs, dtype=float)
    return Observable(p[:, None, None] * np.eye(d), outcomes)


def basis_observable(d: int, outcomes=None) -> Observable:
    """Sharp observable of the computational basis."""
    E = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        E[k, k, k] = 1.0
    return Observable(E, outcomes)


def projective_observable(vectors, outcomes=None) -> Observable:
    """Rank-one projections onto the columns of a unitary matrix."""
    V = np.asarray(vectors, dtype=complex)
    return Observable(np.einsum("ik,jk->kij", V, V.conj()), outcomes)


def random_observable(d: int, n: int, rng: np.random.Generator, rank: int | None = None) -> Observable:
    """Random POVM: ``E_k = S^{-1/2} A_k S^{-1/2}`` with Wishart ``A_k``."""
    rank = d if rank is None else rank
    A = rng.normal(size=(n, d, rank)) + 1j * rng.normal(size=(n, d, rank))
    W = A @ A.conj().swapaxes(-1, -2)
    w, V = np.linalg.eigh(W.sum(axis=0))
    S = (V / np.sqrt(w)) @ V.conj().T
    return Observable(hermitize(S @ W @ S))


# -- Bloch parametrization --------------------------------------------------


@dataclass(frozen=True)
class BlochEffect:
    """Unbiased qubit effect ``(I + e . sigma) / 2`` with ``|e| <= 1``."""

    vector: tuple[float, float, float]
    bias: float = 0.5

    def __post_init__(self):
        v = tuple(float(x) for x in self.vector)
        if len(v) != 3:
            raise InvalidBloch("Bloch vector must have three components")
        if np.linalg.norm(v) > 1 + 1e-12:
            raise InvalidBloch(f"|e| = {np.linalg.norm(v):.6g} > 1")
        object.__setattr__(self, "vector", v)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vector)

    def effect(self) -> np.ndarray:
        e = self.array
        return 0.5 * (SIGMA_0 + e[0] * SIGMA_1 + e[1] * SIGMA_2 + e[2] * SIGMA_3)

    def observable(self) -> Observable:
        A = self.effect()
        return Observable(np.array([A, SIGMA_0 - A]), ("+", "-"))


def bloch_observable(e) -> Observable:
    return BlochEffect(tuple(e)).observable()


def bloch_coordinates(A) -> np.ndarray:
    """Return ``(x0, x1, x2, x3)`` with ``A = (1/2) sum_k x_k sigma_k``."""
    A = np.asarray(A, dtype=complex)
    return np.array([np.trace(P @ A).real for P in (SIGMA_0,) + PAULIS])


# -- bi-observables -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BiObservable:
    """Grid ``G(i, j)`` of effects stored as ``(n_rows, n_cols, d, d)``."""

    grid: np.ndarray
    row_outcomes: tuple[str, ...] = ()
    col_outcomes: tuple[str, ...] = ()

    def __post_init__(self):
        G = np.array(self.grid, dtype=complex)
        if G.ndim != 4 or G.shape[2] != G.shape[3]:
            raise ShapeMismatch(f"grid must have shape (n, m, d, d), got {G.shape}")
        G.setflags(write=False)
        object.__setattr__(self, "grid", G)
        object.__setattr__(self, "row_outcomes", _labels(G.shape[0], self.row_outcomes or None))
        object.__setattr__(self, "col_outcomes", _labels(G.shape[1], self.col_outcomes or None))

    @property
    def dim(self) -> int:
        return self.grid.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape[:2]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(hermitize(self.grid)).min())

    def as_observable(self) -> Observable:
        n, m = self.shape
        labels = [f"{a},{b}" for a in self.row_outcomes for b in self.col_outcomes]
        return Observable(self.grid.reshape(n * m, self.dim, self.dim), labels)

    def map(self, func) -> "BiObservable":
        n, m = self.shape
        out = np.array([[func(self.grid[i, j]) for j in range(m)] for i in range(n)])
        return BiObservable(out, self.row_outcomes, self.col_outcomes)


def margins(G: BiObservable, atol: float = BI_ATOL) -> tuple[Observable, Observable]:
    if G.min_eigenvalue() < -atol:
        raise InvalidBiObservable(f"grid has eigenvalue {G.min_eigenvalue():.3e}")
    total = G.grid.sum(axis=(0, 1))
    if np.linalg.norm(total - np.eye(G.dim)) > atol:
        raise InvalidBiObservable("grid does not sum to the identity")
    return (
        Observable(G.grid.sum(axis=1), G.row_outcomes),
        Observable(G.grid.sum(axis=0), G.col_outcomes),
    )


def margin_defect(G: BiObservable, E: Observable, F: Observable) -> float:
    """Largest Frobenius deviation between the margins of ``G`` and ``(E, F)``."""
    rows = G.grid.sum(axis=1) - E.effects
    cols = G.grid.sum(axis=0) - F.effects
    return float(
        max(np.linalg.norm(rows, axis=(1, 2)).max(), np.linalg.norm(cols, axis=(1, 2)).max())
    )


# -- functionals ----------------------------------------------------------


def _check_index(E: Observable, *idx: int) -> None:
    for k in idx:
        if not 0 <= k < E.dim:
            raise IndexOutOfRange(f"basis index {k} out of range for dim {E.dim}")


def coherence(E: Observable, n: int, m: int) -> float:
    """Summed magnitude of the (n, m) matrix elements over all effects."""
    _check_index(E, n, m)
    return float(np.abs(E.effects[:, n, m]).sum())


def basis_distribution(E: Observable, n: int) -> np.ndarray:
    """Outcome distribution of ``E`` in the basis state ``|n>``."""
    _check_index(E, n)
    return E.effects[:, n, n].real.copy()


def hellinger_sq_dist(p, q) -> float:
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    return float(min(1.0, max(0.0, 1.0 - np.sqrt(p * q).sum())))


def hellinger_sq(F: Observable, n: int, m: int) -> float:
    """Squared Hellinger distance between the basis distributions of ``|n>`` and ``|m>``."""
    return hellinger_sq_dist(basis_distribution(F, n), basis_distribution(F, m))


def regularity_lambda(E: Observable, partition: "DecoherencePartition") -> float:
    """``min_{i,k} tr[sigma_k P_k E(i) P_k]``; positive iff ``E`` is regular."""
    if partition.dim != E.dim:
        raise PartitionMismatch(f"partition dim {partition.dim} != observable dim {E.dim}")
    vals = [
        np.trace(s @ P @ A @ P).real
        for A in E.effects
        for P, s in zip(partition.projections, partition.block_states)
    ]
    return float(max(0.0, min(vals)))


def postprocess(base: Observable, kernel, outcomes=None, atol: float = 1e-10) -> Observable:
    """Classical post-processing: new effect ``i`` is ``sum_k kernel[k, i] base(k)``."""
    K = np.asarray(kernel, dtype=float)
    if K.ndim != 2 or K.shape[0] != base.n_outcomes:
        raise NotAKernel(f"kernel shape {K.shape} incompatible with {base.n_outcomes} outcomes")
    if K.min(initial=0.0) < -atol or np.abs(K.sum(axis=1) - 1).max(initial=0.0) > atol:
        raise NotAKernel("kernel rows must be probability vectors")
    return Observable(np.einsum("ki,kab->iab", K, base.effects), outcomes)
