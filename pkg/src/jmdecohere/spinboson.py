"""Spin-boson pure decoherence reduced to the spin-projection blocks.

The N-qubit model decoheres only between blocks of equal total spin
projection ``k = 0..N``.  Compatibility of ``(Lambda_t E, F_alpha)`` for all
``E`` reduces to an ``(N+1)``-dimensional Schur problem with multiplier
``C[lam]_kk' = lam^{(k-k')^2}`` and diagonal weights of ``F_alpha``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .dynamics import SchurGenerator, schur_generator
from .errors import OutOfRange
from .feasibility import SolverOptions
from .jmcheck import JmVerdict, Status, schur_jm_feasibility
from .observables import Observable

CSV_COLUMNS = ("lambda", "alpha", "verdict", "residual", "theta_bound", "hellinger_bound")


def _unit(name: str, x: float, closed_right: bool = True) -> float:
    x = float(x)
    ok = 0.0 <= x <= 1.0 if closed_right else 0.0 <= x < 1.0
    if not ok:
        raise OutOfRange(f"{name}={x} outside [0, 1{']' if closed_right else ')'}")
    return x


def _check_n(N: int) -> int:
    if int(N) != N or N < 1:
        raise OutOfRange(f"N must be a positive integer, got {N}")
    return int(N)


@dataclass(frozen=True)
class SpinBosonConfig:
    N: int
    lam: float
    alpha: float

    def __post_init__(self):
        _check_n(self.N)
        _unit("lambda", self.lam)
        _unit("alpha", self.alpha)

    def multiplier(self) -> np.ndarray:
        return reduced_matrix(self.N, self.lam)

    def observable(self) -> Observable:
        return f_alpha(self.N, self.alpha)


def reduced_matrix(N: int, lam: float) -> np.ndarray:
    """``(N+1) x (N+1)`` matrix with entries ``lam^{(k-k')^2}`` (``0^0 = 1``)."""
    N = _check_n(N)
    lam = _unit("lambda", lam)
    k = np.arange(N + 1)
    return np.power(lam, (k[:, None] - k[None, :]) ** 2).astype(float)


def q_weights(N: int) -> np.ndarray:
    """Normalized block dimensions ``2^-N binom(N, k)``."""
    N = _check_n(N)
    return np.array([comb(N, k) for k in range(N + 1)], dtype=float) / 2.0**N


def f_alpha_weights(N: int, alpha: float) -> np.ndarray:
    """``P[k', k] = alpha delta_{kk'} + (1 - alpha) q_k``: outcome k on block k'."""
    alpha = _unit("alpha", alpha)
    q = q_weights(N)
    return alpha * np.eye(N + 1) + (1 - alpha) * q[None, :]


def f_alpha(N: int, alpha: float) -> Observable:
    """Reduced covariant observable interpolating between the block projections and a coin toss."""
    P = f_alpha_weights(N, alpha)
    return Observable(np.array([np.diag(P[:, k]) for k in range(N + 1)]).astype(complex))


def u_k(N: int, k: int, alpha: float) -> float:
    if not 0 <= k <= _check_n(N):
        raise OutOfRange(f"block index {k} outside 0..{N}")
    alpha = _unit("alpha", alpha)
    a = q_weights(N)[k] * (1 - alpha)
    return float(np.sqrt(a * (alpha + a)) - a)


def hellinger_d2(N: int, k: int, kp: int, alpha: float) -> float:
    """Squared Hellinger distance of ``F_alpha`` between blocks ``k != k'``."""
    return alpha - u_k(N, k, alpha) - u_k(N, kp, alpha)


def hellinger_bound(N: int, alpha: float) -> float:
    """Largest lambda allowed by the adjacent-block (0, 1) necessary condition."""
    return 1 - hellinger_d2(N, 0, 1, alpha)


def hellinger_necessary(N: int, lam: float, alpha: float, tol: float = 1e-12) -> bool:
    """True (pass) unless ``lam > 1 - alpha + u_0 + u_1``; a violation rules out compatibility."""
    return _unit("lambda", lam) <= hellinger_bound(N, alpha) + tol


@dataclass(frozen=True)
class Theta3:
    value: float
    remainder: float  # alternating-series bound on the truncation error
    terms: int


def theta3(lam: float, tol: float = 1e-16) -> Theta3:
    """``1 + 2 sum_k (-1)^k lam^{k^2}``, summed until the next term is below ``tol``."""
    lam = _unit("lambda", lam, closed_right=False)
    total, k = 1.0, 1
    while True:
        term = lam ** (k * k)
        if term < tol:
            return Theta3(total, 2 * term, k - 1)
        total += 2 * (-1) ** k * term
        k += 1


def theta_bound(N: int, alpha: float) -> float:
    """Right-hand side ``alpha - 2 u_0(alpha)`` of the sufficient condition."""
    return alpha - 2 * u_k(N, 0, alpha)


def theta_sufficient(lam: float, alpha: float, N: int) -> bool:
    """True (certified) when ``theta3(lam) >= alpha - 2 u_0(alpha)``."""
    if _unit("lambda", lam) == 1.0:
        return theta_bound(N, alpha) <= 0.0
    th = theta3(lam)
    return th.value - th.remainder >= theta_bound(N, alpha)


def n2_boundary(lam: float) -> float:
    """Closed-form N = 2 compatibility boundary ``alpha(lam)``."""
    lam = _unit("lambda", lam)
    l2 = lam * lam
    return float(1 - 4 * l2 / (3 + l2 * l2 + 2 * np.sqrt(2) * (1 - l2)))


def check_point(N: int, lam: float, alpha: float, opts: SolverOptions | None = None) -> JmVerdict:
    return schur_jm_feasibility(reduced_matrix(N, lam), f_alpha(N, alpha), opts)


def alpha_boundary(N: int, lam: float, tol: float = 1e-5, opts: SolverOptions | None = None) -> tuple[float, float]:
    """Bisect in alpha for the solver boundary: returns ``(alpha_ok, alpha_bad)``.

    ``alpha_ok`` is Compatible; ``alpha_bad`` is not (or 1 if everything is).
    """
    if check_point(N, lam, 1.0, opts).compatible:
        return 1.0, 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if check_point(N, lam, mid, opts).compatible:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass
class PhaseDiagram:
    N: int
    lambdas: np.ndarray
    alphas: np.ndarray
    verdicts: np.ndarray  # (n_lambda, n_alpha) of Status values
    residuals: np.ndarray
    theta_certified: np.ndarray = field(repr=False, default=None)
    hellinger_pass: np.ndarray = field(repr=False, default=None)

    def rows(self) -> list[dict]:
        out = []
        for i, lam in enumerate(self.lambdas):
            th = theta3(lam).value if lam < 1 else 0.0
            for j, a in enumerate(self.alphas):
                out.append({
                    "lambda": repr(float(lam)),
                    "alpha": repr(float(a)),
                    "verdict": str(self.verdicts[i, j]),
                    "residual": repr(float(self.residuals[i, j])),
                    "theta_bound": repr(float(th - theta_bound(self.N, a))),
                    "hellinger_bound": repr(float(hellinger_bound(self.N, a) - lam)),
                })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def inclusion_violations(self) -> list[tuple[float, float, str]]:
        """Points breaking theta-certified => Compatible => Hellinger-pass."""
        bad = []
        for i, lam in enumerate(self.lambdas):
            for j, a in enumerate(self.alphas):
                comp = self.verdicts[i, j] == Status.COMPATIBLE.value
                if self.theta_certified[i, j] and not comp:
                    bad.append((float(lam), float(a), "theta-certified but not Compatible"))
                if comp and not self.hellinger_pass[i, j]:
                    bad.append((float(lam), float(a), "Compatible but Hellinger-violated"))
        return bad


def phase_diagram(
    N: int,
    lambda_grid: Sequence[float] | None = None,
    alpha_grid: Sequence[float] | None = None,
    opts: SolverOptions | None = None,
) -> PhaseDiagram:
    """Solver verdict for every ``(lambda, alpha)``; defaults to a 101 x 101 grid."""
    N = _check_n(N)
    lams = np.linspace(0, 1, 101) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    alps = np.linspace(0, 1, 101) if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    for x in lams:
        _unit("lambda", x)
    for x in alps:
        _unit("alpha", x)
    shape = (lams.size, alps.size)
    verdicts = np.empty(shape, dtype=object)
    residuals = np.zeros(shape)
    th_cert = np.zeros(shape, dtype=bool)
    hel = np.zeros(shape, dtype=bool)
    for i, lam in enumerate(lams):
        C = reduced_matrix(N, lam)
        for j, a in enumerate(alps):
            v = schur_jm_feasibility(C, f_alpha(N, a), opts)
            verdicts[i, j] = v.status.value
            residuals[i, j] = v.residual
            th_cert[i, j] = theta_sufficient(lam, a, N)
            hel[i, j] = hellinger_necessary(N, lam, a)
    return PhaseDiagram(N, lams, alps, verdicts, residuals, th_cert, hel)


# -- time dependence -----------------------------------------------------------------


def semigroup_lambda(rate: float, t: float) -> float:
    """Markovian ``lambda(t) = exp(-rate t)``."""
    if rate < 0 or t < 0:
        raise OutOfRange("rate and time must be nonnegative")
    return float(np.exp(-rate * t))


def spin_projection(N: int) -> np.ndarray:
    """Block index (number of excited qubits) of each computational basis state."""
    N = _check_n(N)
    return np.array([bin(n).count("1") for n in range(2**N)], dtype=float)


def full_generator(N: int, rate: float) -> SchurGenerator:
    """Schur generator on ``2^N`` with ``C_t[n, m] = exp(-rate t (k_n - k_m)^2)``."""
    return schur_generator(np.zeros(2**N), np.sqrt(2 * rate) * spin_projection(N))


def reduced_generator(N: int, rate: float) -> SchurGenerator:
    """The same semigroup on the reduced ``(N+1)``-dimensional block space."""
    N = _check_n(N)
    return schur_generator(np.zeros(N + 1), np.sqrt(2 * rate) * np.arange(N + 1, dtype=float))


def block_projection(N: int, k: int) -> np.ndarray:
    """Projection onto the decoherence-free subspace with ``k`` excitations."""
    return np.diag((spin_projection(N) == k).astype(complex))
