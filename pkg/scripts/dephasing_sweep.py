"""Critical times of random unbiased qubit pairs under dephasing: bisection vs closed form.

Usage: python3 scripts/dephasing_sweep.py [--pairs 20] [--gamma 1.0] [--seed 0]
"""
from __future__ import annotations

import argparse

import numpy as np

from jmdecohere.crittime import critical_time, dephasing_closed_form
from jmdecohere.dynamics import dephasing_generator
from jmdecohere.observables import bloch_observable


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    gen = dephasing_generator(args.gamma, args.omega)
    print(f"{'|e|':>6} {'|f|':>6} {'bisection':>10} {'closed form':>12}")
    for _ in range(args.pairs):
        e, f = (rng.normal(size=3) for _ in range(2))
        e *= rng.uniform(0.5, 1) / np.linalg.norm(e)
        f *= rng.uniform(0.5, 1) / np.linalg.norm(f)
        ct = critical_time(gen, bloch_observable(e), bloch_observable(f))
        cf = dephasing_closed_form(e, f, args.gamma)
        fmt = lambda x: "never" if x is None else f"{x:.5f}"  # noqa: E731
        print(f"{np.linalg.norm(e):6.3f} {np.linalg.norm(f):6.3f} {fmt(ct.t_star):>10} {fmt(cf.t_star):>12}")


if __name__ == "__main__":
    main()
