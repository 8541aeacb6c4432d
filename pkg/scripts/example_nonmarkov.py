"""Compatibility of the periodic two-qubit example over one period.

Writes t, f(t) and the solver verdict per grid point, plus the roots of f.
Usage: python3 scripts/example_nonmarkov.py [--grid 201] [--out results/example.csv]
"""
from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from jmdecohere.dynamics import PROJ_1, PROJ_2, nonmarkov_twoqubit
from jmdecohere.jmcheck import example_f, example_roots, jm_feasibility
from jmdecohere.observables import Observable


def binary(A) -> Observable:
    return Observable([A, np.eye(2) - A])


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--out", default="results/example_nonmarkov.csv")
    args = p.parse_args()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f", "verdict"])
        for t in np.linspace(0, 1, args.grid):
            images = nonmarkov_twoqubit(2 * np.pi, t).images
            v = jm_feasibility(binary(images[0]), binary(images[1]))
            w.writerow([f"{t:.6f}", f"{example_f(t):.10f}", v.status.value])
    print("roots of f:", ", ".join(f"{r:.6f}" for r in example_roots()))
    print("wrote", out)


if __name__ == "__main__":
    main()
