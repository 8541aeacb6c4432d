"""Critical compatibility times: bisection over semigroup time and closed-form bounds."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import DecoherencePartition, DecoherenceRates
from .errors import InvalidBloch, NontrivialAlgebra, NotDivisible, NotRegular
from .feasibility import SolverOptions
from .jmcheck import JmVerdict, Status, jm_feasibility
from .observables import Observable


@dataclass
class CriticalTime:
    """Result of a critical-time computation.

    ``t_star`` is None when the pair is still not compatible at ``t_max``.
    For bisection, ``bracket = (t_lo, t_hi)`` with ``t_lo`` not Compatible
    and ``t_hi`` Compatible.
    """

    t_star: float | None
    bracket: tuple[float, float]
    method: str
    t_max: float = np.inf
    flags: list[str] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    @property
    def none_within(self) -> bool:
        return self.t_star is None

    def row(self) -> dict:
        return {
            "method": self.method,
            "t_star": "none-within-t_max" if self.t_star is None else repr(float(self.t_star)),
            "t_lo": repr(float(self.bracket[0])),
            "t_hi": repr(float(self.bracket[1])),
            "flags": ";".join(self.flags),
        }


def critical_time(
    gen,
    E: Observable,
    F: Observable,
    t_max: float | None = None,
    tol: float = 1e-4,
    opts: SolverOptions | None = None,
) -> CriticalTime:
    """Bisect for the first time at which ``(Lambda_t E, Lambda_t F)`` is compatible.

    Valid only for semigroup (divisible) dynamics, where compatibility at one
    time persists at all later times.  Indeterminate verdicts are treated as
    not compatible and flag the result ``solver-limited``.
    """
    if not getattr(gen, "divisible", False):
        raise NotDivisible("bisection requires a divisible (semigroup) family")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t_max is None:
        t_max = 50.0 / gen.spectral_scale()
    opts = opts or SolverOptions()
    verdicts: dict[float, str] = {}
    flags: list[str] = []

    def check(t: float) -> bool:
        v = jm_feasibility(gen.evolve(t, E), gen.evolve(t, F), opts)
        verdicts[t] = v.status.value
        if v.status is Status.INDETERMINATE:
            flags.append(f"indeterminate@{t!r}")
        return v.status is Status.COMPATIBLE

    if check(0.0):
        return CriticalTime(0.0, (0.0, 0.0), "bisection", t_max, ["already-compatible"], verdicts)
    if not check(t_max):
        return CriticalTime(None, (t_max, np.inf), "bisection", t_max, flags, verdicts)
    lo, hi = 0.0, float(t_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if check(mid):
            hi = mid
        else:
            lo = mid
    out_flags = [f for f in flags]
    if any(lo <= t <= hi and s == Status.INDETERMINATE.value for t, s in verdicts.items()):
        out_flags.append("solver-limited")
    return CriticalTime(hi, (lo, hi), "bisection", t_max, out_flags, verdicts)


def scan_compatibility(family, E: Observable, F: Observable, times: Sequence[float], opts: SolverOptions | None = None) -> list[tuple[float, JmVerdict]]:
    """Verdicts on a user time grid; the mode for non-divisible families."""
    opts = opts or SolverOptions()
    return [(float(t), jm_feasibility(family.evolve(t, E), family.evolve(t, F), opts)) for t in times]


# -- closed forms ---------------------------------------------------------------


def _bloch(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or np.linalg.norm(v) > 1 + 1e-12:
        raise InvalidBloch("Bloch vectors must be 3-vectors of norm at most 1")
    return v


def dephasing_quadratic(e, f) -> tuple[float, float, float]:
    """Coefficients ``(a, b, c)``: compatible at time t iff ``a x^2 - b x + c >= 0``, ``x = exp(-2 gamma t)``."""
    e, f = _bloch(e), _bloch(f)
    e0, f0 = e[:2], f[:2]
    dot = float(e0 @ f0)
    a = dot**2
    b = float(np.sum((e0 - f0) ** 2)) + 2 * dot * (1 - e[2] * f[2])
    c = (1 - e[2] ** 2) * (1 - f[2] ** 2)
    return a, b, c


def dephasing_closed_form(e, f, gamma: float) -> CriticalTime:
    """Exact critical time for unbiased qubit observables under dephasing.

    Dephasing damps the xy-part of both Bloch vectors by ``exp(-gamma t)``
    and leaves the z-part; the Hamiltonian rotation plays no role.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    a, b, c = dephasing_quadratic(e, f)
    if a - b + c >= 0:
        return CriticalTime(0.0, (0.0, 0.0), "closed-form:dephasing", flags=["already-compatible"])
    # q(0) = c >= 0 > q(1): the compatible range of x is (0, x*] with x* the smaller root
    if a == 0.0:
        x = c / b
    else:
        disc = max(b * b - 4 * a * c, 0.0)
        x = 2 * c / (b + np.sqrt(disc))  # smaller root, stable form
    if x <= 0:
        return CriticalTime(None, (np.inf, np.inf), "closed-form:dephasing", flags=["never"])
    t = -np.log(x) / (2 * gamma)
    return CriticalTime(float(t), (float(t), float(t)), "closed-form:dephasing")


def dephasing_orthogonal_time(e, f, gamma: float) -> float:
    """``-(1/2 gamma) ln[(1 - e_z^2)(1 - f_z^2) / |e_0 - f_0|^2]`` for ``e_0 . f_0 = 0``."""
    e, f = _bloch(e), _bloch(f)
    return float(
        -np.log((1 - e[2] ** 2) * (1 - f[2] ** 2) / np.sum((e[:2] - f[:2]) ** 2)) / (2 * gamma)
    )


def depolarizing_bound(n: int, d: int) -> float:
    """Time after which any n observables are compatible under ``I/d`` depolarizing."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    return float(-np.log((n + d) / (n * (d + 1))))


def depolarizing_all_n_bound(d: int) -> float:
    """Time after which arbitrarily many observables are compatible."""
    if d < 2:
        raise ValueError("need d >= 2")
    # log form avoids overflow of d**d
    return float(
        -(np.log(3 * d - 1) + (d - 1) * np.log(d - 1) - np.log(d + 1) - d * np.log(d))
    )


def generic_bound(lambda_E: float, lambda_F: float, rates: DecoherenceRates) -> float:
    """``-(1/gamma) ln(lambda_E lambda_F / 2K)``, clamped at 0."""
    if lambda_E <= 0 or lambda_F <= 0:
        raise NotRegular("both observables must be regular (lambda > 0)")
    ratio = lambda_E * lambda_F / (2 * rates.K)
    if ratio >= 1:
        return 0.0
    return float(-np.log(ratio) / rates.gamma)


def eb_bound(sigma_min: float, d: int, rates: DecoherenceRates, partition: DecoherencePartition | None = None) -> float:
    """Entanglement-breaking time ``-(1/gamma) ln(sigma_min / (K d^{3/2}))``.

    Only meaningful when the decoherence-free algebra is trivial.
    """
    if partition is not None and partition.n_blocks > 1:
        raise NontrivialAlgebra("no finite entanglement-breaking time for a nontrivial algebra")
    if sigma_min <= 0:
        raise ValueError("invariant state must be faithful")
    ratio = sigma_min / (rates.K * d**1.5)
    if ratio >= 1:
        return 0.0
    return float(-np.log(ratio) / rates.gamma)
