"""Heisenberg-picture dynamics: GKLS semigroups, Schur (pure decoherence)
channels, the conditional expectation onto the decoherence-free algebra,
decay-rate constants, and the periodic two-qubit model.

All superoperators are column-stacking matrices (see :mod:`jmdecohere.numkit`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    InvalidMultiplier,
    NonHermitianH,
    NoSpectralGap,
    PartitionMismatch,
    ShapeMismatch,
)
from .numkit import (
    apply_superop,
    as_matrix,
    choi,
    dagger,
    hermitize,
    is_hermitian,
    mat_exp,
    superop_from_map,
    trace_dual,
)
from .observables import SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3, Observable

PARTITION_ATOL = 1e-10
COMMUTE_ATOL = 1e-8


# -- GKLS generators --------------------------------------------------------


def gkls_superop(H, lindblad_ops: Sequence) -> np.ndarray:
    """Matrix of ``L(A) = i[H, A] + sum_l (L_l* A L_l - {L_l* L_l, A} / 2)``."""
    H = as_matrix(H)
    d = H.shape[0]
    eye = np.eye(d)
    S = 1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for L in lindblad_ops:
        L = as_matrix(L)
        LdL = dagger(L) @ L
        S += np.kron(L.T, dagger(L)) - 0.5 * (np.kron(eye, LdL) + np.kron(LdL.T, eye))
    return S


@dataclass(frozen=True, eq=False)
class Generator:
    """GKLS data together with its cached Heisenberg superoperator."""

    hamiltonian: np.ndarray
    lindblad_ops: tuple[np.ndarray, ...]
    superop: np.ndarray
    divisible: bool = True

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def schrodinger_superop(self) -> np.ndarray:
        return trace_dual(self.superop)

    def channel(self, t: float) -> np.ndarray:
        """Superoperator of ``exp(t L)``."""
        if t < 0:
            raise ValueError("time must be nonnegative")
        return mat_exp(t * self.superop)

    def evolve(self, t: float, E: Observable) -> Observable:
        if t == 0:
            return E
        return Observable(apply_superop(self.channel(t), E.effects), E.outcomes)

    def apply(self, A) -> np.ndarray:
        return apply_superop(self.superop, A)

    def spectral_scale(self) -> float:
        """Smallest nonzero decay rate ``-Re mu`` of the superoperator (1.0 if none)."""
        re = -np.linalg.eigvals(self.superop).real
        re = re[re > 1e-9]
        return float(re.min()) if re.size else 1.0


def gkls_generator(H, lindblad_ops: Sequence = (), divisible: bool = True) -> Generator:
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise ShapeMismatch(f"Hamiltonian shape {H.shape}")
    if not is_hermitian(H):
        raise NonHermitianH("Hamiltonian is not Hermitian")
    ops = []
    for L in lindblad_ops:
        L = as_matrix(L)
        if L.shape != H.shape:
            raise ShapeMismatch(f"Lindblad operator shape {L.shape} != {H.shape}")
        ops.append(L)
    H = hermitize(H)
    for A in [H, *ops]:
        A.setflags(write=False)
    S = gkls_superop(H, ops)
    S.setflags(write=False)
    return Generator(H, tuple(ops), S, divisible)


def evolve(gen, t: float, E: Observable) -> Observable:
    return gen.evolve(t, E)


def dephasing_generator(gamma: float, omega: float = 0.0) -> Generator:
    """Qubit dephasing whose Bloch xy-components decay as ``exp(-gamma t)``.

    ``H = omega sigma_3 / 2`` rotates the xy-plane at angular speed ``omega``;
    the single Lindblad operator is ``sqrt(2 gamma) sigma_3 / 2``.
    """
    return gkls_generator(0.5 * omega * SIGMA_3, [np.sqrt(2.0 * gamma) * SIGMA_3 / 2])


def depolarizing_generator(sigma=None, d: int | None = None) -> Generator:
    """Generator of ``A -> exp(-t) A + (1 - exp(-t)) tr[A sigma] I``.

    Lindblad operators ``sqrt(p_k) |phi_k><i|`` from the eigen-decomposition
    of ``sigma``; ``sigma`` defaults to ``I / d``.
    """
    if sigma is None:
        sigma = np.eye(d) / d
    sigma = as_matrix(sigma)
    d = sigma.shape[0]
    p, phi = np.linalg.eigh(hermitize(sigma))
    ops = []
    for k in range(d):
        if p[k] <= 0:
            continue
        for i in range(d):
            ket_i = np.zeros(d)
            ket_i[i] = 1.0
            ops.append(np.sqrt(p[k]) * np.outer(phi[:, k], ket_i))
    return gkls_generator(np.zeros((d, d)), ops)


def depolarize(E: Observable, t: float, sigma=None) -> Observable:
    """Closed-form depolarizing channel applied to an observable."""
    d = E.dim
    sigma = np.eye(d) / d if sigma is None else as_matrix(sigma)
    a = np.exp(-t)
    tr = np.einsum("kab,ba->k", E.effects, sigma)
    return Observable(a * E.effects + (1 - a) * tr[:, None, None] * np.eye(d), E.outcomes)


# -- pure decoherence -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SchurGenerator:
    """Diagonal GKLS data and the Schur-product generator ``D``."""

    h: np.ndarray
    u: np.ndarray
    D: np.ndarray
    divisible: bool = True

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def decoheres(self) -> bool:
        """True iff ``Re d_nm < 0`` for every ``n != m``."""
        return self.rate() > 0

    def rate(self) -> float:
        """``min_{n != m} -Re d_nm`` (0 in dimension 1)."""
        if self.dim < 2:
            return 0.0
        off = ~np.eye(self.dim, dtype=bool)
        return float((-self.D.real)[off].min())

    def multiplier(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("time must be nonnegative")
        return np.exp(t * self.D)

    def evolve(self, t: float, E: Observable) -> Observable:
        if t == 0:
            return E
        return Observable(self.multiplier(t)[None] * E.effects, E.outcomes)

    @cached_property
    def superop(self) -> np.ndarray:
        return np.diag(self.D.T.reshape(-1))

    def to_generator(self) -> Generator:
        ops = [np.diag(row) for row in self.u]
        return gkls_generator(np.diag(self.h), ops, self.divisible)

    def spectral_scale(self) -> float:
        r = self.rate()
        return r if r > 1e-12 else 1.0


def schur_generator(h, u, divisible: bool = True) -> SchurGenerator:
    """``d_nm = i(h_n - h_m) - (1/2) sum_l (|u_n|^2 + |u_m|^2 - 2 conj(u_n) u_m)``.

    ``u`` holds one row per Lindblad operator (a single 1-d vector is allowed).
    """
    h = np.asarray(h, dtype=float).reshape(-1)
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    if u.shape[1] != h.size:
        raise ShapeMismatch(f"u rows have length {u.shape[1]}, h has {h.size}")
    D = 1j * (h[:, None] - h[None, :])
    for row in u:
        a2 = np.abs(row) ** 2
        D -= 0.5 * (a2[:, None] + a2[None, :] - 2 * np.outer(row.conj(), row))
    for A in (h, u, D):
        A.setflags(write=False)
    return SchurGenerator(h, u, D, divisible)


def validate_multiplier(C, atol: float = 1e-8) -> np.ndarray:
    C = as_matrix(C)
    if C.shape[0] != C.shape[1]:
        raise InvalidMultiplier(f"multiplier must be square, got {C.shape}")
    if np.abs(np.diag(C) - 1).max() > atol:
        raise InvalidMultiplier("multiplier diagonal must be 1")
    if not is_hermitian(C, 1e-10):
        raise InvalidMultiplier("multiplier must be Hermitian")
    if np.linalg.eigvalsh(hermitize(C)).min() < -atol:
        raise InvalidMultiplier("multiplier is not positive semidefinite")
    return C


def schur_channel(C, E: Observable) -> Observable:
    """Apply ``A -> C * A`` (entrywise) to each effect."""
    C = validate_multiplier(C)
    if C.shape[0] != E.dim:
        raise InvalidMultiplier(f"multiplier dim {C.shape[0]} != observable dim {E.dim}")
    return Observable(C[None] * E.effects, E.outcomes)


def uniform_multiplier(d: int, lam: float) -> np.ndarray:
    """``(1 - lam) I + lam * ones``: every coherence damped by ``lam``."""
    return (1 - lam) * np.eye(d) + lam * np.ones((d, d))


# -- decoherence-free algebra ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecoherencePartition:
    """Central projections ``P_n`` with faithful block states ``sigma_n``."""

    projections: tuple[np.ndarray, ...]
    block_states: tuple[np.ndarray, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        P = tuple(as_matrix(p) for p in self.projections)
        S = tuple(as_matrix(s) for s in self.block_states)
        if len(P) != len(S) or len(P) != len(self.weights) or not P:
            raise PartitionMismatch("projections, states and weights must have equal length")
        d = P[0].shape[0]
        eye = np.eye(d)
        if np.linalg.norm(sum(P) - eye) > PARTITION_ATOL:
            raise PartitionMismatch("projections do not sum to the identity")
        for a, Pa in enumerate(P):
            if np.linalg.norm(Pa @ Pa - Pa) > PARTITION_ATOL or not is_hermitian(Pa, 1e-10):
                raise PartitionMismatch(f"P_{a} is not an orthogonal projection")
            for b in range(a):
                if np.linalg.norm(Pa @ P[b]) > PARTITION_ATOL:
                    raise PartitionMismatch(f"P_{a} and P_{b} are not orthogonal")
        for Pa, s in zip(P, S):
            if abs(np.trace(s) - 1) > PARTITION_ATOL or np.linalg.norm(Pa @ s @ Pa - s) > PARTITION_ATOL:
                raise PartitionMismatch("block state must be a unit-trace state on its block")
            r = int(round(np.trace(Pa).real))
            w = np.linalg.eigvalsh(hermitize(s))
            if w.min() < -PARTITION_ATOL or w[-r:].min() <= PARTITION_ATOL:
                raise PartitionMismatch("block state is not faithful on its block")
        wts = tuple(float(x) for x in self.weights)
        if min(wts) < 0 or abs(sum(wts) - 1) > PARTITION_ATOL:
            raise PartitionMismatch("weights must form a probability vector")
        object.__setattr__(self, "projections", P)
        object.__setattr__(self, "block_states", S)
        object.__setattr__(self, "weights", wts)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    @property
    def n_blocks(self) -> int:
        return len(self.projections)

    def invariant_state(self) -> np.ndarray:
        return sum(w * s for w, s in zip(self.weights, self.block_states))


def block_partition(blocks: Sequence[Sequence[int]], d: int, states=None, weights=None) -> DecoherencePartition:
    """Partition by coordinate blocks; states default to normalized identities."""
    P, S = [], []
    for k, idx in enumerate(blocks):
        Pk = np.zeros((d, d), dtype=complex)
        Pk[list(idx), list(idx)] = 1.0
        P.append(Pk)
        S.append(Pk / len(idx) if states is None else as_matrix(states[k]))
    if weights is None:
        weights = [len(idx) / d for idx in blocks]
    return DecoherencePartition(tuple(P), tuple(S), tuple(weights))


def maximal_partition(d: int, probs=None) -> DecoherencePartition:
    """Rank-one blocks ``|n><n|``: the diagonal algebra of pure decoherence."""
    weights = np.full(d, 1.0 / d) if probs is None else np.asarray(probs, dtype=float)
    return block_partition([[n] for n in range(d)], d, weights=weights)


def trivial_partition(sigma) -> DecoherencePartition:
    """Single block: the decoherence-free algebra is the multiples of identity."""
    sigma = as_matrix(sigma)
    d = sigma.shape[0]
    return DecoherencePartition((np.eye(d, dtype=complex),), (sigma,), (1.0,))


def conditional_expectation(part: DecoherencePartition, A) -> np.ndarray:
    """``Gamma(A) = sum_n tr[sigma_n P_n A P_n] P_n``; accepts a stack of matrices."""
    A = np.asarray(A, dtype=complex)
    if A.shape[-1] != part.dim or A.shape[-2] != part.dim:
        raise PartitionMismatch(f"operator dim {A.shape[-1]} != partition dim {part.dim}")
    out = np.zeros_like(A)
    for P, s in zip(part.projections, part.block_states):
        # sigma_n is supported on P_n, so tr[sigma P A P] = tr[sigma A]
        coef = np.einsum("ab,...ba->...", s, A)
        out = out + coef[..., None, None] * P
    return out


def conditional_expectation_superop(part: DecoherencePartition) -> np.ndarray:
    return superop_from_map(lambda A: conditional_expectation(part, A), part.dim)


def gamma_observable(part: DecoherencePartition, E: Observable) -> Observable:
    return Observable(conditional_expectation(part, E.effects), E.outcomes)


# -- decay-rate constants ---------------------------------------------------------


@dataclass(frozen=True)
class DecoherenceRates:
    """Constants in ``||Lambda_t - Gamma Lambda_t|| <= K exp(-gamma t)``."""

    gamma: float
    K: float
    method: str  # "exact-schur" | "numerical-estimate"


def map_norm_bound(superop) -> float:
    """Upper bound ``d * ||Choi||_op`` on the induced operator norm of a map."""
    S = as_matrix(superop)
    d = int(round(np.sqrt(S.shape[0])))
    return float(d * np.linalg.norm(choi(S), 2))


def decoherence_rates(gen, part: DecoherencePartition, sample_times: Sequence[float] | None = None) -> DecoherenceRates:
    if gen.dim != part.dim:
        raise PartitionMismatch(f"generator dim {gen.dim} != partition dim {part.dim}")
    if isinstance(gen, SchurGenerator):
        gamma = gen.rate()
        if gamma <= 1e-12:
            raise NoSpectralGap(f"spectral gap {gamma:.3e}")
        return DecoherenceRates(gamma, float(max(1, gen.dim - 1)), "exact-schur")

    S = np.asarray(gen.superop)
    G = conditional_expectation_superop(part)
    scale = max(1.0, float(np.linalg.norm(S, 2)))
    for t in sample_times or (0.5 / scale, 1.0 / scale, 2.0 / scale):
        Lt = mat_exp(t * S)
        if np.linalg.norm(G @ Lt - Lt @ G) > COMMUTE_ATOL * max(1.0, np.linalg.norm(Lt)):
            raise PartitionMismatch("conditional expectation does not commute with the dynamics")
    # ker Gamma = range(I - Gamma), an invariant subspace of the generator
    U, sv, _ = np.linalg.svd(np.eye(S.shape[0]) - G)
    Q = U[:, sv > 0.5]
    if Q.shape[1] == 0:
        raise NoSpectralGap("conditional expectation is the identity")
    mu = np.linalg.eigvals(Q.conj().T @ S @ Q)
    gamma = float(-mu.real.max())
    if gamma <= 1e-12:
        raise NoSpectralGap(f"spectral gap {gamma:.3e}")
    K = 0.0
    comp = np.eye(S.shape[0]) - G
    for k in range(-6, 7):
        t = 2.0**k / gamma
        if t * np.abs(S).sum(axis=0).max() > 1e4:
            continue
        K = max(K, map_norm_bound(comp @ mat_exp(t * S)) * np.exp(gamma * t))
    return DecoherenceRates(gamma, float(K), "numerical-estimate")


# -- the periodic two-qubit model -------------------------------------------------

KET_PLUS = np.array([1.0, 0.0], dtype=complex)
PROJ_1 = 0.5 * (SIGMA_0 + SIGMA_1)
PROJ_2 = 0.5 * (SIGMA_0 + SIGMA_2)
PROJ_3 = 0.5 * (SIGMA_0 + SIGMA_3)


def twoqubit_hamiltonian(omega: float) -> np.ndarray:
    return -(omega / np.sqrt(2)) * (np.kron(PROJ_3, SIGMA_2) + np.kron(SIGMA_2, PROJ_3))


def twoqubit_unitary(omega: float, t: float) -> np.ndarray:
    return mat_exp(1j * t * twoqubit_hamiltonian(omega))


def _reduced_heisenberg(U: np.ndarray, A) -> np.ndarray:
    # conditional expectation on the environment state |+><+|
    iso = np.kron(SIGMA_0, KET_PLUS.reshape(2, 1))
    return iso.conj().T @ dagger(U) @ np.kron(as_matrix(A), SIGMA_0) @ U @ iso


@dataclass(frozen=True, eq=False)
class TwoQubitChannel:
    superop: np.ndarray
    images: np.ndarray  # Lambda_t(P_1), Lambda_t(P_2), Lambda_t(P_3)


def nonmarkov_twoqubit(omega: float, t: float) -> TwoQubitChannel:
    """Exact reduced Heisenberg channel of the periodic two-qubit model at time ``t``."""
    U = twoqubit_unitary(omega, t)
    S = superop_from_map(lambda A: _reduced_heisenberg(U, A), 2)
    images = np.array([_reduced_heisenberg(U, P) for P in (PROJ_1, PROJ_2, PROJ_3)])
    return TwoQubitChannel(S, images)


def twoqubit_closed_form(omega: float, t: float) -> np.ndarray:
    """Closed-form matrices of ``Lambda_t(P_1), Lambda_t(P_2), Lambda_t(P_3)``."""
    a = omega * t
    r2 = np.sqrt(2)
    c1 = 0.5 * (np.cos(a) + np.cos(2 * a))
    L1 = 0.5 * np.array(
        [[1 + np.sin(2 * a) / r2, c1], [c1, 1 - (np.sin(a) + 0.5 * np.sin(2 * a)) / r2]],
        dtype=complex,
    )
    b = 0.5 * (1 + np.cos(a))
    L2 = 0.5 * np.array([[1, -1j * b], [1j * b, 1]], dtype=complex)
    o = -(np.sin(a) + 0.5 * np.sin(2 * a)) / r2
    L3 = 0.5 * np.array(
        [[1 + np.cos(a) ** 2, o], [o, 1 + 0.5 * (np.sin(a) ** 2 - 2 * np.cos(a))]], dtype=complex
    )
    return np.array([L1, L2, L3])


def twoqubit_p1_coefficients(omega: float, t: float) -> np.ndarray:
    """Pauli coefficients ``x_k`` with ``Lambda_t(P_1) = (1/2) sum_k x_k sigma_k``."""
    a = omega * t
    r2 = np.sqrt(2)
    return np.array(
        [
            1 - np.sin(a) / (2 * r2) + np.sin(2 * a) / (4 * r2),
            0.5 * (np.cos(a) + np.cos(2 * a)),
            0.0,
            np.sin(a) / (2 * r2) + 3 * np.sin(2 * a) / (4 * r2),
        ]
    )


@dataclass(frozen=True)
class TwoQubitFamily:
    """Time-indexed channel family of the two-qubit model; not a semigroup."""

    omega: float = 2 * np.pi
    divisible: bool = field(default=False, init=False)
    dim: int = field(default=2, init=False)

    def channel(self, t: float) -> np.ndarray:
        return nonmarkov_twoqubit(self.omega, t).superop

    def evolve(self, t: float, E: Observable) -> Observable:
        return Observable(apply_superop(self.channel(t), E.effects), E.outcomes)
