"""N = 2 spin-boson phase diagram with the closed-form boundary for comparison.

Usage: python3 scripts/phase_diagram_n2.py [--grid 51] [--out results/phase_n2.csv]
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from jmdecohere.spinboson import alpha_boundary, n2_boundary, phase_diagram


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--grid", type=int, default=51)
    p.add_argument("--out", default="results/phase_n2.csv")
    args = p.parse_args()

    start = time.perf_counter()
    grid = np.linspace(0, 1, args.grid)
    pd = phase_diagram(2, grid, grid)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(pd.to_csv())
    print(f"phase diagram {args.grid}x{args.grid}: {time.perf_counter() - start:.1f}s, "
          f"inclusion violations: {len(pd.inclusion_violations())}")

    print(f"{'lambda':>8} {'solver':>10} {'closed form':>12}")
    for lam in np.linspace(0, 1, 11):
        lo, hi = alpha_boundary(2, lam, tol=1e-4)
        print(f"{lam:8.2f} {0.5 * (lo + hi):10.5f} {n2_boundary(lam):12.5f}")
    print("wrote", out)


if __name__ == "__main__":
    main()
