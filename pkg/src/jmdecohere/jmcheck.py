"""Compatibility (joint measurability) oracles.

The general decision procedure is :func:`jm_feasibility`; the remaining
functions are analytic criteria or explicit joint-observable constructions
that either certify compatibility, certify incompatibility, or are
inconclusive.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .dynamics import DecoherencePartition, conditional_expectation, validate_multiplier
from .errors import (
    DimensionCap,
    HellingerSingular,
    InvalidBloch,
    InvalidMultiplier,
    InvalidObservable,
    NotDiagonal,
    NotInEnvelope,
    PartitionMismatch,
)
from .feasibility import BlockProblem, SolverOptions, solve
from .numkit import SYM_DIM_CAP, hermitize, partial_trace, sym_projector, tensor
from .observables import (
    BiObservable,
    Observable,
    basis_distribution,
    coherence,
    hellinger_sq,
    require_valid,
)


class Status(str, enum.Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    INDETERMINATE = "Indeterminate"


_STATUS = {
    "feasible": Status.COMPATIBLE,
    "infeasible": Status.INCOMPATIBLE,
    "undecided": Status.INDETERMINATE,
}


@dataclass
class JmVerdict:
    """Outcome of a compatibility check.

    ``residual`` is the feasibility defect at termination.  ``certified`` is
    True when the verdict is backed by an explicit object: a joint observable
    (or decomposition) for Compatible, a separating witness for Incompatible.
    """

    status: Status
    certificate: BiObservable | None = None
    residual: float = 0.0
    iterations: int = 0
    criterion: str = ""
    certified: bool = False
    decomposition: np.ndarray | None = None
    bounds: tuple[float, float] = (-np.inf, np.inf)
    notes: dict = field(default_factory=dict)

    @property
    def compatible(self) -> bool:
        return self.status is Status.COMPATIBLE


# -- unbiased qubit criterion -------------------------------------------------------


def busch_unbiased(e, f) -> JmVerdict:
    """``|e + f| + |e - f| <= 2`` for unbiased binary qubit observables."""
    e = np.asarray(e, dtype=float)
    f = np.asarray(f, dtype=float)
    if e.shape != (3,) or f.shape != (3,):
        raise InvalidBloch("Bloch vectors must have three components")
    if np.linalg.norm(e) > 1 + 1e-12 or np.linalg.norm(f) > 1 + 1e-12:
        raise InvalidBloch("Bloch vectors must have norm at most 1")
    excess = float(np.linalg.norm(e + f) + np.linalg.norm(e - f) - 2.0)
    status = Status.COMPATIBLE if excess <= 1e-12 else Status.INCOMPATIBLE
    return JmVerdict(status, residual=excess, criterion="busch", certified=True)


def example_f(t):
    """Compatibility function of the periodic two-qubit model (time in periods).

    ``Lambda_t(P_1)`` and ``Lambda_t(P_2)`` are compatible iff the value is >= 0.
    """
    t = np.asarray(t, dtype=float)
    s2 = np.sin(np.pi * t) ** 2
    c, s = np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)
    r = 2 * np.sqrt(2) * s
    a = np.sqrt(np.clip(0.5 * s2 * (3 + c - r), 0.0, None))
    b = np.sqrt(np.clip(0.5 * s2 * (3 + c + r), 0.0, None))
    out = a + b - c - 1
    return float(out) if out.ndim == 0 else out


def example_roots(n_grid: int = 2001, t_range: tuple[float, float] = (0.0, 1.0)) -> list[float]:
    """Sign changes of :func:`example_f`, refined with Brent's method."""
    ts = np.linspace(t_range[0], t_range[1], n_grid)
    fs = example_f(ts)
    roots = []
    for a, b, fa, fb in zip(ts[:-1], ts[1:], fs[:-1], fs[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(float(brentq(example_f, a, b, xtol=1e-14)))
    return roots


# -- general feasibility --------------------------------------------------------------


def _check_pair(E: Observable, F: Observable) -> None:
    require_valid(E)
    require_valid(F)
    if E.dim != F.dim:
        raise InvalidObservable(f"dimension mismatch {E.dim} != {F.dim}")


def commuting(E: Observable, F: Observable, tol: float = 1e-12) -> bool:
    A = E.effects[:, None]
    B = F.effects[None, :]
    return bool(np.abs(A @ B - B @ A).max(initial=0.0) <= tol)


def product_joint(E: Observable, F: Observable) -> BiObservable:
    grid = hermitize(E.effects[:, None] @ F.effects[None, :])
    return BiObservable(grid, E.outcomes, F.outcomes)


def margin_problem(E: Observable, F: Observable) -> BlockProblem:
    """Affine set of grids with row sums ``E(i)`` and column sums ``F(j)``."""
    nE, nF, d = E.n_outcomes, F.n_outcomes, E.dim
    eye = np.eye(d)
    Ee, Fe = E.effects, F.effects

    def project(G):
        G = G.reshape(nE, nF, d, d)
        R = G.sum(axis=1)
        C = G.sum(axis=0)
        S = G.sum(axis=(0, 1))
        out = G + (Ee - R)[:, None] / nF + (Fe - C)[None, :] / nE + (S - eye) / (nE * nF)
        return out.reshape(nE * nF, d, d)

    G0 = Ee[:, None] / nF + Fe[None, :] / nE - eye / (nE * nF)
    return BlockProblem(G0.reshape(nE * nF, d, d), project)


def _verdict(result, criterion: str) -> JmVerdict:
    status = _STATUS[result.status]
    certified = result.certified or status is Status.COMPATIBLE
    v = JmVerdict(
        status,
        residual=float(result.residual),
        iterations=int(result.iterations),
        criterion=criterion,
        certified=certified,
        bounds=(float(result.lower), float(result.upper)),
        notes={"method": result.method},
    )
    if result.trace:
        v.notes["residual_trace"] = list(result.trace)
    return v


def jm_feasibility(E: Observable, F: Observable, opts: SolverOptions | None = None) -> JmVerdict:
    """Search for a joint observable with margins ``E`` and ``F``."""
    opts = opts or SolverOptions()
    _check_pair(E, F)
    if commuting(E, F, opts.commute_tol):
        return JmVerdict(
            Status.COMPATIBLE, product_joint(E, F), criterion="commuting", certified=True
        )
    problem = margin_problem(E, F)
    result = solve(problem, opts)
    v = _verdict(result, "feasibility")
    if v.status is Status.COMPATIBLE:
        grid = hermitize(result.X).reshape(E.n_outcomes, F.n_outcomes, E.dim, E.dim)
        v.certificate = BiObservable(grid, E.outcomes, F.outcomes)
    return v


# -- envelope around the decoherence-free algebra --------------------------------------


def _op_norm(A: np.ndarray) -> np.ndarray:
    return np.abs(np.linalg.eigvalsh(hermitize(A))).max(axis=-1)


def _bottom(A: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize(A)).min(axis=-1)


@dataclass(frozen=True)
class EnvelopeReport:
    lhs: np.ndarray  # ||E(i) - Gamma E(i)|| + ||F(j) - Gamma F(j)||
    rhs: np.ndarray  # bottom(Gamma E(i)) * bottom(Gamma F(j))
    in_envelope: bool


def envelope_check(E: Observable, F: Observable, part: DecoherencePartition) -> EnvelopeReport:
    _check_pair(E, F)
    if part.dim != E.dim:
        raise PartitionMismatch(f"partition dim {part.dim} != observable dim {E.dim}")
    gE = conditional_expectation(part, E.effects)
    gF = conditional_expectation(part, F.effects)
    dE = _op_norm(E.effects - gE)
    dF = _op_norm(F.effects - gF)
    lhs = dE[:, None] + dF[None, :]
    rhs = np.clip(_bottom(gE), 0, None)[:, None] * np.clip(_bottom(gF), 0, None)[None, :]
    return EnvelopeReport(lhs, rhs, bool(np.all(lhs <= rhs)))


def envelope_joint(E: Observable, F: Observable, part: DecoherencePartition) -> BiObservable:
    """``G(i,j) = Gamma E(i) Gamma F(j) + (E(i) - Gamma E(i)) / n_F + (F(j) - Gamma F(j)) / n_E``.

    The off-algebra parts are spread uniformly over the other index so that
    the margins are exactly ``E`` and ``F``; each block is bounded below by
    ``rhs - lhs >= 0`` on the envelope.
    """
    if not envelope_check(E, F, part).in_envelope:
        raise NotInEnvelope("pair is outside the jointly measurable envelope")
    gE = conditional_expectation(part, E.effects)
    gF = conditional_expectation(part, F.effects)
    nE, nF = E.n_outcomes, F.n_outcomes
    grid = (
        gE[:, None] @ gF[None, :]
        + (E.effects - gE)[:, None] / nF
        + (F.effects - gF)[None, :] / nE
    )
    return BiObservable(hermitize(grid), E.outcomes, F.outcomes)


# -- coherence / Hellinger criteria -------------------------------------------------------


@dataclass(frozen=True)
class TradeoffReport:
    passed: bool
    violated: tuple[int, int] | None
    worst: float  # max over n<m of coh_nm(E) + d2_nm(F)


def tradeoff_necessary(E: Observable, F: Observable, tol: float = 1e-10) -> TradeoffReport:
    """Necessary condition ``coh_nm(E) + d2_nm(F) <= 1``; a violation certifies incompatibility."""
    _check_pair(E, F)
    worst, arg = 0.0, None
    for n, m in itertools.combinations(range(E.dim), 2):
        val = coherence(E, n, m) + hellinger_sq(F, n, m)
        if arg is None or val > worst:
            worst, arg = val, (n, m)
    if arg is None:
        return TradeoffReport(True, None, 1.0)
    passed = worst <= 1 + tol
    return TradeoffReport(passed, None if passed else arg, worst)


def hellinger_matrix(F: Observable) -> np.ndarray:
    d = F.dim
    H = np.zeros((d, d))
    for n, m in itertools.combinations(range(d), 2):
        H[n, m] = H[m, n] = hellinger_sq(F, n, m)
    return H


@dataclass(frozen=True)
class MMatrixReport:
    certified: bool
    min_eigenvalues: tuple[float, ...]
    certificate: BiObservable | None


def mmatrix_sufficient(E: Observable, F: Observable, tol: float = 1e-12) -> MMatrixReport:
    """Sufficient condition: every ``M(i)_nm = E(i)_nm / (1 - d2_nm(F))`` is PSD.

    ``F`` must be diagonal.  When certified, the joint observable
    ``G(i,j) = M(i) * (sqrt p(j) sqrt p(j)^T)`` is returned.
    """
    _check_pair(E, F)
    if not F.is_diagonal():
        raise NotDiagonal("the second observable must be diagonal")
    H = hellinger_matrix(F)
    if np.any(H[~np.eye(F.dim, dtype=bool)] >= 1 - 1e-12):
        raise HellingerSingular("some squared Hellinger distance equals 1")
    M = E.effects / (1 - H)[None]
    mins = np.linalg.eigvalsh(hermitize(M)).min(axis=1)
    certified = bool(mins.min() >= -tol)
    cert = None
    if certified:
        root = np.sqrt(np.clip(np.einsum("jnn->jn", F.effects).real, 0, None))  # (nF, d)
        outer = root[:, :, None] * root[:, None, :]
        cert = BiObservable(M[:, None] * outer[None], E.outcomes, F.outcomes)
    return MMatrixReport(certified, tuple(float(x) for x in mins), cert)


# -- Schur channels with a diagonal partner ------------------------------------------------


def schur_problem(C: np.ndarray, P: np.ndarray) -> BlockProblem:
    """Affine set ``{C^(j)}: sum_j C^(j) = C, diag C^(j) = P[:, j]``."""
    d, J = P.shape
    idx = np.arange(d)
    off = C - np.diag(np.diag(C))

    def project(X):
        X = X + (C - X.sum(axis=0))[None] / J
        X[:, idx, idx] = P.T
        return X

    X0 = off[None] / J + np.einsum("nj,nm->jnm", P, np.eye(d))
    return BlockProblem(X0, project)


def schur_jm_feasibility(C, F: Observable, opts: SolverOptions | None = None) -> JmVerdict:
    """Decide whether ``(C * E, F)`` is compatible for every observable ``E``.

    Equivalent to splitting ``C`` into PSD parts ``C^(j)`` with diagonals
    ``p_n(j) = <n|F(j)|n>``; the parts are returned as ``decomposition``.
    """
    opts = opts or SolverOptions()
    C = validate_multiplier(C)
    require_valid(F)
    if not F.is_diagonal():
        raise NotDiagonal("the second observable must be diagonal")
    if C.shape[0] != F.dim:
        raise InvalidMultiplier(f"multiplier dim {C.shape[0]} != observable dim {F.dim}")
    P = np.einsum("jnn->nj", F.effects).real
    problem = schur_problem(C, P)
    if np.allclose(C, np.diag(np.diag(C)), atol=0, rtol=0):
        return JmVerdict(
            Status.COMPATIBLE, criterion="diagonal", certified=True,
            decomposition=problem.X0.copy(),
        )
    result = solve(problem, opts)
    v = _verdict(result, "schur-feasibility")
    if v.status is Status.COMPATIBLE:
        v.decomposition = hermitize(result.X)
    return v


def schur_joint(decomposition: np.ndarray, E: Observable, F: Observable | None = None) -> BiObservable:
    """Joint observable ``G(i,j) = C^(j) * E(i)`` of ``(C * E, F)``."""
    grid = decomposition[None, :] * E.effects[:, None]
    cols = F.outcomes if F is not None else ()
    return BiObservable(grid, E.outcomes, cols)


# -- symmetric-subspace joint observable ---------------------------------------------------


def sym_subspace_time(n: int, d: int) -> float:
    """Depolarizing time at which the symmetric-subspace construction applies."""
    return -float(np.log((n + d) / (n * (d + 1))))


def sym_subspace_joint(observables: Sequence[Observable], d: int | None = None, cap: int = SYM_DIM_CAP) -> Observable:
    """Joint observable on the product outcome set built from the symmetric subspace.

    Its k-th margin is the k-th observable depolarized (towards ``I/d``) at
    :func:`sym_subspace_time`.
    """
    obs = list(observables)
    n = len(obs)
    d = obs[0].dim if d is None else d
    if any(E.dim != d for E in obs):
        raise InvalidObservable("all observables must act on the same dimension")
    if d**n > cap:
        raise DimensionCap(f"d**n = {d**n} exceeds cap {cap}")
    Pn = sym_projector(d, n, cap)
    scale = d / comb(d + n - 1, n)
    effects, labels = [], []
    for combo in itertools.product(*[range(E.n_outcomes) for E in obs]):
        T = tensor(*[E.effects[x] for E, x in zip(obs, combo)])
        effects.append(scale * partial_trace(Pn @ T @ Pn, [d] * n, 0))
        labels.append(",".join(E.outcomes[x] for E, x in zip(obs, combo)))
    return Observable(hermitize(np.array(effects)), labels)


def joint_margin(G: Observable, shape: Sequence[int], k: int) -> Observable:
    """k-th margin of an observable indexed by a product outcome set of the given shape."""
    d = G.dim
    T = G.effects.reshape(tuple(shape) + (d, d))
    axes = tuple(a for a in range(len(shape)) if a != k)
    return Observable(T.sum(axis=axes))
