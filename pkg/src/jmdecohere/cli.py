"""Command-line front end.

Exit codes: 0 ok, 2 input error, 3 Indeterminate verdict.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from .crittime import critical_time, dephasing_closed_form, generic_bound
from .dynamics import DecoherenceRates, TwoQubitFamily, PROJ_1, PROJ_2
from .errors import JMError
from .feasibility import SolverOptions
from .formats import FormatError, dumps, load_generator, load_observable, observable_to_dict, verdict_to_dict
from .jmcheck import (
    Status,
    busch_unbiased,
    example_f,
    example_roots,
    jm_feasibility,
    mmatrix_sufficient,
    tradeoff_necessary,
)
from .observables import Observable, bloch_coordinates, random_observable, validate

EXIT_OK, EXIT_INPUT, EXIT_INDETERMINATE = 0, 2, 3
MAX_SPIN_N = 12


class InputError(Exception):
    pass


def _positive(kind):
    def parse(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not x > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return x
    return parse


def _grid(text):
    n = _positive(int)(text)
    if n < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    return n


def _options(args) -> SolverOptions:
    kw = {}
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
        kw["auto_dykstra_iter"] = min(1000, args.max_iter)
    return SolverOptions(**kw)


def _observable(path) -> Observable:
    E = load_observable(path)
    report = validate(E)
    if not report.passed:
        raise InputError(f"{path}: not a valid observable (normalization defect {report.normalization_defect:.2e}, "
                         f"min eigenvalue {min(report.min_eigenvalues):.2e})")
    return E


def _unbiased_bloch(E: Observable):
    """Bloch vector of an unbiased binary qubit observable, or None."""
    if E.dim != 2 or E.n_outcomes != 2:
        return None
    x = bloch_coordinates(E.effects[0])
    if abs(x[0] - 1) > 1e-10:
        return None
    return x[1:]


def _emit(doc: dict, rows: list[dict] | None, fmt: str, out) -> None:
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        out.write(buf.getvalue())
    else:
        out.write(dumps(doc) + "\n")


def _f(x) -> str:
    return repr(float(x))


# -- subcommands --------------------------------------------------------------------


def cmd_check(args, out) -> int:
    E, F = _observable(args.povm_a), _observable(args.povm_b)
    if E.dim != F.dim:
        raise InputError(f"dimension mismatch: {E.dim} vs {F.dim}")
    criteria = {}
    e, f = _unbiased_bloch(E), _unbiased_bloch(F)
    busch = busch_unbiased(e, f) if e is not None and f is not None else None
    if busch is not None:
        criteria["busch"] = busch.status.value
    trade = tradeoff_necessary(E, F)
    criteria["tradeoff_necessary"] = "pass" if trade.passed else "violated"
    if F.is_diagonal():
        try:
            criteria["mmatrix_sufficient"] = "certified" if mmatrix_sufficient(E, F).certified else "inconclusive"
        except JMError:
            criteria["mmatrix_sufficient"] = "not-applicable"
    verdict = jm_feasibility(E, F, _options(args))
    if verdict.criterion != "commuting" and busch is not None:
        # the qubit criterion is exact; report it as the deciding one
        decided = busch
        decided.iterations, decided.bounds = verdict.iterations, verdict.bounds
        if verdict.status is Status.COMPATIBLE and busch.status is Status.COMPATIBLE:
            decided.certificate = verdict.certificate
        verdict = decided
    doc = {"verdict": verdict_to_dict(verdict, args.emit_certificate), "criteria": criteria}
    row = {"status": verdict.status.value, "criterion": verdict.criterion, "residual": _f(verdict.residual)}
    _emit(doc, [row], args.format, out)
    return EXIT_INDETERMINATE if verdict.status is Status.INDETERMINATE else EXIT_OK


def _closed_forms(gen, E, F) -> dict:
    """Analytic times that apply to the given instance (pure qubit dephasing)."""
    found = {}
    diag = all(np.allclose(A, np.diag(np.diag(A)), atol=1e-12) for A in (gen.hamiltonian, *gen.lindblad_ops))
    if gen.dim != 2 or not diag or not gen.lindblad_ops:
        return found
    gamma = 0.5 * sum(abs(L[0, 0] - L[1, 1]) ** 2 for L in gen.lindblad_ops)
    if gamma <= 0:
        return found
    e, f = _unbiased_bloch(E), _unbiased_bloch(F)
    if e is not None and f is not None:
        ct = dephasing_closed_form(e, f, gamma)
        found["dephasing_closed_form"] = "none" if ct.t_star is None else _f(ct.t_star)
    lam_e = float(np.einsum("inn->in", E.effects).real.min())
    lam_f = float(np.einsum("inn->in", F.effects).real.min())
    if lam_e > 0 and lam_f > 0:
        found["generic_bound"] = _f(generic_bound(lam_e, lam_f, DecoherenceRates(gamma, 1.0, "exact-schur")))
    return found


def cmd_critical_time(args, out) -> int:
    gen = load_generator(args.generator)
    E, F = _observable(args.povm_a), _observable(args.povm_b)
    if not (E.dim == F.dim == gen.dim):
        raise InputError("generator and observables must share one dimension")
    ct = critical_time(gen, E, F, t_max=args.t_max, tol=args.tol, opts=_options(args))
    row = ct.row()
    row.update({"t_max": _f(ct.t_max)})
    bounds = _closed_forms(gen, E, F)
    doc = {**row, "bracket": [row["t_lo"], row["t_hi"]], "closed_forms": bounds}
    del doc["t_lo"], doc["t_hi"]
    row.update({k: bounds.get(k, "") for k in ("dephasing_closed_form", "generic_bound")})
    _emit(doc, [row], args.format, out)
    return EXIT_OK


def cmd_example_nonmarkov(args, out) -> int:
    family = TwoQubitFamily(args.omega)
    P1 = Observable(np.array([PROJ_1, np.eye(2) - PROJ_1]), ("+", "-"))
    P2 = Observable(np.array([PROJ_2, np.eye(2) - PROJ_2]), ("+", "-"))
    opts = _options(args)
    rows = []
    worst = EXIT_OK
    for t in np.linspace(0.0, 1.0, args.grid):
        v = jm_feasibility(family.evolve(t, P1), family.evolve(t, P2), opts)
        if v.status is Status.INDETERMINATE:
            worst = EXIT_INDETERMINATE
        tau = args.omega * t / (2 * np.pi)
        rows.append({"t": _f(t), "f": _f(example_f(tau)), "verdict": v.status.value})
    scale = 2 * np.pi / args.omega
    roots = [scale * r for r in example_roots(t_range=(0.0, args.omega / (2 * np.pi)))]
    doc = {"omega": _f(args.omega), "roots": [_f(r) for r in roots], "rows": rows}
    _emit(doc, rows, args.format, out)
    return worst


def cmd_phase_diagram(args, out) -> int:
    from .spinboson import phase_diagram

    if args.n > MAX_SPIN_N:
        raise InputError(f"N={args.n} exceeds {MAX_SPIN_N}")
    grid = np.linspace(0.0, 1.0, args.grid)
    pd = phase_diagram(args.n, grid, grid, _options(args))
    if args.format == "json":
        _emit({"N": args.n, "rows": pd.rows()}, None, "json", out)
    else:
        out.write(pd.to_csv())
    return EXIT_OK


def cmd_random_pair(args, out) -> int:
    rng = np.random.default_rng(args.seed)
    E = random_observable(args.dim, args.outcomes, rng)
    F = random_observable(args.dim, args.outcomes, rng)
    v = jm_feasibility(E, F, _options(args))
    doc = {
        "seed": args.seed,
        "povm_a": observable_to_dict(E),
        "povm_b": observable_to_dict(F),
        "verdict": verdict_to_dict(v, args.emit_certificate),
    }
    _emit(doc, [{"seed": str(args.seed), "status": v.status.value}], args.format, out)
    return EXIT_INDETERMINATE if v.status is Status.INDETERMINATE else EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jmdecohere", description="Joint measurability under decoherence.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--max-iter", type=_positive(int), default=None, help="solver iteration cap")
        sp.add_argument("--format", choices=("json", "csv"), default=fmt)
        sp.add_argument("-o", "--output", default=None, help="write to file instead of stdout")

    sp = sub.add_parser("check", help="decide compatibility of two observables")
    sp.add_argument("povm_a")
    sp.add_argument("povm_b")
    sp.add_argument("--emit-certificate", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("critical-time", help="bisect for the critical time under a semigroup")
    sp.add_argument("generator")
    sp.add_argument("povm_a")
    sp.add_argument("povm_b")
    sp.add_argument("--tol", type=_positive(float), default=1e-4)
    sp.add_argument("--t-max", type=_positive(float), default=None)
    common(sp)
    sp.set_defaults(func=cmd_critical_time)

    sp = sub.add_parser("example-nonmarkov", help="data for the periodic two-qubit example")
    sp.add_argument("--omega", type=_positive(float), default=2 * np.pi)
    sp.add_argument("--grid", type=_grid, default=101)
    common(sp, fmt="csv")
    sp.set_defaults(func=cmd_example_nonmarkov)

    sp = sub.add_parser("phase-diagram", help="spin-boson (lambda, alpha) phase diagram")
    sp.add_argument("--n", type=_positive(int), default=2, help="number of qubits")
    sp.add_argument("--grid", type=_grid, default=101)
    common(sp, fmt="csv")
    sp.set_defaults(func=cmd_phase_diagram)

    sp = sub.add_parser("random-pair", help="check a seeded random pair of observables")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dim", type=_positive(int), default=2)
    sp.add_argument("--outcomes", type=_positive(int), default=2)
    sp.add_argument("--emit-certificate", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_random_pair)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.output:
            with open(args.output, "w", newline="") as fh:
                return args.func(args, fh)
        return args.func(args, sys.stdout)
    except (InputError, FormatError, JMError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
