"""Feasibility engines for "affine family of Hermitian blocks, all PSD" problems.

A :class:`BlockProblem` is given by a start stack ``X0`` of shape
``(B, d, d)`` lying in an affine set ``A = X0 + L`` and the orthogonal
(Frobenius) projection onto ``A``.  The question is whether ``A`` meets the
product PSD cone.  Two engines are provided:

* :func:`dykstra` -- Dykstra alternating projections between the PSD cone and
  ``A``, with the plateau rule for infeasibility and a separating-witness test.
* :func:`barrier` -- a log-det barrier method maximizing the robustness ``s``
  in ``X >= s I``.  It brackets the optimal ``s`` from both sides, so it
  settles instances close to the boundary where alternating projections stall.

Both return a :class:`SolveResult`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceFailure
from .numkit import hermitize, psd_project_stack


@dataclass
class SolverOptions:
    """Tunables shared by the joint-measurability solvers.

    ``method`` is ``"auto"`` (Dykstra for ``auto_dykstra_iter`` steps, then the
    barrier method if still undecided), ``"dykstra"`` or ``"barrier"``.
    """

    method: str = "auto"
    max_iter: int = 50_000
    auto_dykstra_iter: int = 1_000
    psd_tol: float = 1e-8
    plateau_window: int = 500
    plateau_tol: float = 1e-12
    infeasible_threshold: float = 1e-6
    witness_every: int = 25
    commute_tol: float = 1e-12
    barrier_gap: float = 1e-11
    barrier_max_newton: int = 400
    record_trace: bool = False

    def __post_init__(self):
        if self.method not in ("auto", "dykstra", "barrier"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_iter < 1 or self.auto_dykstra_iter < 0:
            raise ValueError("iteration limits must be positive")
        for name in ("psd_tol", "plateau_tol", "infeasible_threshold", "barrier_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolveResult:
    status: str  # "feasible" | "infeasible" | "undecided"
    X: np.ndarray
    residual: float
    iterations: int
    method: str
    certified: bool = False  # infeasibility backed by a separating witness
    lower: float = -np.inf  # bounds on the robustness max{s : X >= s I}
    upper: float = np.inf
    trace: list = field(default_factory=list)


class BlockProblem:
    """Affine set ``X0 + L`` of ``(B, d, d)`` Hermitian stacks."""

    def __init__(self, X0: np.ndarray, project_affine: Callable[[np.ndarray], np.ndarray]):
        self.X0 = hermitize(np.asarray(X0, dtype=complex))
        self.project_affine = project_affine
        self._basis = None

    @property
    def shape(self):
        return self.X0.shape

    def project_L(self, Y: np.ndarray) -> np.ndarray:
        return self.project_affine(self.X0 + Y) - self.X0

    def project_Lperp(self, Z: np.ndarray) -> np.ndarray:
        return Z - self.project_L(Z)

    def basis(self) -> np.ndarray:
        """Orthonormal basis of ``L`` as a ``(m, B, d, d)`` array of Hermitian stacks."""
        if self._basis is None:
            B, d, _ = self.shape
            n = B * d * d
            cols = np.empty((n, n))
            for k in range(n):
                e = np.zeros(n)
                e[k] = 1.0
                cols[:, k] = herm_to_real(self.project_L(real_to_herm(e, B, d)))
            w, V = np.linalg.eigh(0.5 * (cols + cols.T))
            V = V[:, w > 0.5]
            self._basis = np.array([real_to_herm(v, B, d) for v in V.T]).reshape(-1, B, d, d)
        return self._basis

    def witness_bound(self, Z: np.ndarray) -> float:
        """Upper bound on the robustness from a candidate dual stack ``Z``.

        ``Z`` is projected onto ``L``-perp and shifted by a multiple of the
        identity stack until PSD; then ``s* <= <Z, X0> / tr Z`` for every
        feasible ``(X, s)``.  Requires the identity stack to be orthogonal to L.
        """
        Zp = hermitize(self.project_Lperp(Z))
        eta = max(0.0, -float(np.linalg.eigvalsh(Zp).min()))
        B, d, _ = self.shape
        Zp = Zp + eta * np.eye(d)
        total = float(np.einsum("bii->", Zp).real)
        if total <= 0:
            return np.inf
        return float(np.vdot(Zp, self.X0).real) / total


def herm_to_real(X: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian stack (Frobenius inner product)."""
    d = X.shape[-1]
    iu = np.triu_indices(d, 1)
    diag = np.einsum("...ii->...i", X).real
    up = X[..., iu[0], iu[1]]
    return np.concatenate(
        [diag, np.sqrt(2) * up.real, np.sqrt(2) * up.imag], axis=-1
    ).reshape(-1)


def real_to_herm(v: np.ndarray, B: int, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(B, d * d)
    iu = np.triu_indices(d, 1)
    k = len(iu[0])
    X = np.zeros((B, d, d), dtype=complex)
    idx = np.arange(d)
    X[:, idx, idx] = v[:, :d]
    up = (v[:, d : d + k] + 1j * v[:, d + k :]) / np.sqrt(2)
    X[:, iu[0], iu[1]] = up
    X[:, iu[1], iu[0]] = up.conj()
    return X


def _min_eig(X: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(X)).min())


def dykstra(problem: BlockProblem, opts: SolverOptions, max_iter: int | None = None) -> SolveResult:
    """Dykstra alternating projections between the PSD cone and the affine set."""
    max_iter = opts.max_iter if max_iter is None else max_iter
    X = problem.X0.copy()
    if _min_eig(X) >= -opts.psd_tol:
        return SolveResult("feasible", X, 0.0, 0, "dykstra", lower=_min_eig(X))
    P = np.zeros_like(X)
    Q = np.zeros_like(X)
    history: list[float] = []
    trace = history if opts.record_trace else []
    residual = np.inf
    for k in range(1, max_iter + 1):
        Y = psd_project_stack(X + P)
        P = X + P - Y
        Xn = problem.project_affine(Y + Q)
        Q = Y + Q - Xn
        X = Xn
        w, V = np.linalg.eigh(hermitize(X))
        residual = float(np.linalg.norm(np.minimum(w, 0.0)))
        history.append(residual)
        if w.min() >= -opts.psd_tol:
            return SolveResult("feasible", X, residual, k, "dykstra", lower=float(w.min()), trace=trace)
        if k % opts.witness_every == 0:
            Z = (V * np.maximum(-w, 0.0)[..., None, :]) @ V.conj().swapaxes(-1, -2)
            upper = problem.witness_bound(Z)
            if upper < -opts.psd_tol:
                return SolveResult(
                    "infeasible", X, residual, k, "dykstra", certified=True, upper=upper, trace=trace
                )
        if (
            k > opts.plateau_window
            and history[k - 1 - opts.plateau_window] - residual < opts.plateau_tol
            and residual > opts.infeasible_threshold
        ):
            return SolveResult("infeasible", X, residual, k, "dykstra", trace=trace)
    return SolveResult("undecided", X, residual, max_iter, "dykstra", trace=trace)


def _inv_sqrt_stack(S: np.ndarray):
    w, V = np.linalg.eigh(hermitize(S))
    if w.min() <= 0:
        return None, None
    R = (V / np.sqrt(w)[..., None, :]) @ V.conj().swapaxes(-1, -2)
    return R, w


def barrier(problem: BlockProblem, opts: SolverOptions) -> SolveResult:
    """Log-det barrier method for ``max s`` subject to ``X0 + sum z_k A_k >= s I``."""
    basis = problem.basis()
    B, d, _ = problem.shape
    eye = np.eye(d)
    # the last direction moves s; S(w) = X0 + sum_k w_k A_k - s I
    dirs = np.concatenate([basis, -np.broadcast_to(eye, (1, B, d, d))], axis=0)
    m = dirs.shape[0]
    n_tot = B * d
    w = np.zeros(m)
    w[-1] = _min_eig(problem.X0) - 1.0
    t = 1.0
    total_newton = 0
    lower, upper = w[-1], np.inf

    def stack(wv):
        return problem.X0 + np.tensordot(wv[:-1], basis, axes=1) - wv[-1] * eye

    def phi(wv, tv):
        S = stack(wv)
        try:
            L = np.linalg.cholesky(hermitize(S))
        except np.linalg.LinAlgError:
            return np.inf
        return -tv * wv[-1] - 2.0 * np.log(np.einsum("bii->bi", L).real).sum()

    while True:
        for _ in range(opts.barrier_max_newton):
            if total_newton >= opts.max_iter:
                break
            S = stack(w)
            R, _ = _inv_sqrt_stack(S)
            if R is None:
                raise ConvergenceFailure("barrier iterate left the interior")
            W = R[None] @ dirs @ R[None]
            g = -np.einsum("kbii->k", W).real
            g[-1] -= t
            Wf = W.reshape(m, -1)
            H = (Wf.conj() @ Wf.T).real
            H[np.diag_indices(m)] += 1e-14 * max(1.0, np.abs(np.diag(H)).max())
            try:
                step = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = float(-g @ step)
            total_newton += 1
            if dec / 2 < 1e-10:
                break
            f0 = phi(w, t)
            alpha = 1.0
            while alpha > 1e-12:
                if phi(w + alpha * step, t) <= f0 - 0.25 * alpha * dec:
                    break
                alpha *= 0.5
            w = w + alpha * step
            if alpha <= 1e-12:
                break
        S = stack(w)
        X = S + w[-1] * eye
        lower = max(lower, _min_eig(X))
        Z = np.linalg.inv(hermitize(S)) / t
        upper = min(upper, problem.witness_bound(Z))
        if lower >= 0:
            return SolveResult("feasible", X, 0.0, total_newton, "barrier", lower=lower, upper=upper)
        if upper < -opts.psd_tol:
            return SolveResult(
                "infeasible", X, -upper, total_newton, "barrier", certified=True, lower=lower, upper=upper
            )
        if n_tot / t < opts.barrier_gap or upper - lower < opts.barrier_gap:
            break
        if total_newton >= opts.max_iter:
            break
        t *= 10.0
    if lower >= -opts.psd_tol:
        return SolveResult("feasible", X, -lower, total_newton, "barrier", lower=lower, upper=upper)
    return SolveResult("undecided", X, -lower, total_newton, "barrier", lower=lower, upper=upper)


def solve(problem: BlockProblem, opts: SolverOptions) -> SolveResult:
    if opts.method == "dykstra":
        return dykstra(problem, opts)
    if opts.method == "barrier":
        return barrier(problem, opts)
    first = dykstra(problem, opts, max_iter=opts.auto_dykstra_iter) if opts.auto_dykstra_iter else None
    if first is not None and first.status != "undecided" and (first.status == "feasible" or first.certified):
        return first
    second = barrier(problem, opts)
    second.iterations += first.iterations if first is not None else 0
    second.method = "dykstra+barrier" if first is not None else "barrier"
    return second
