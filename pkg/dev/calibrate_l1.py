#!/usr/bin/env python3
"""
ABOUTME: Measures ‖f - g‖₁ / ε for piecewise-polytope approximations of the planar Gaussian
ABOUTME: Prints the constant to freeze as L1_CONSTANT in tests/test_structure.py (run with PYTHONPATH=src)
"""

import argparse
import json
import statistics
import sys

import numpy as np

from densities import GaussianDensity
from lab_config import APPROX_RUN_C_H
from lab_errors import LabError
from structure import ApproxConfig, approximation_error, build_approximation, integral_of_g


def measure(epsilons: list[float], seeds: int, c_H: float, budget: int) -> list[dict]:
    """One row per (ε, seed) with the error ratio and the integral of g."""
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    rows = []
    for eps in epsilons:
        for seed in range(seeds):
            g = build_approximation(f, ApproxConfig(eps, c_L=2.0, c_H=c_H), seed=seed)
            error = approximation_error(f, g, budget=budget, seed=1_000 + seed)
            mass = integral_of_g(g, seed=2_000 + seed)
            rows.append(
                {
                    "epsilon": eps,
                    "seed": seed,
                    "levels": g.level_count,
                    "H": g.diagnostics["H"],
                    "l1": error.value,
                    "l1_stderr": error.stderr,
                    "ratio": error.value / eps,
                    "integral_g": mass.value,
                }
            )
    return rows


def main():
    """Command-line interface for the L1 calibration."""
    parser = argparse.ArgumentParser(
        description="Calibrate the L1 error constant of the structural approximation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Default grid, three seeds per epsilon
  PYTHONPATH=src python dev/calibrate_l1.py

  # More seeds, JSON output
  PYTHONPATH=src python dev/calibrate_l1.py --seeds 10 --json
        """,
    )
    parser.add_argument("--epsilons", type=float, nargs="+", default=[0.4, 0.2, 0.1])
    parser.add_argument("--seeds", type=int, default=3, help="Seeds per epsilon (default: 3)")
    parser.add_argument(
        "--c-h", type=float, default=APPROX_RUN_C_H, help=f"Facet constant (default: {APPROX_RUN_C_H})"
    )
    parser.add_argument("--budget", type=int, default=400_000, help="Monte Carlo budget for ‖f - g‖₁")
    parser.add_argument("--json", action="store_true", help="Output raw rows as JSON")
    args = parser.parse_args()

    try:
        rows = measure(args.epsilons, args.seeds, args.c_h, args.budget)
    except LabError as exc:
        print(f"❌ {type(exc).__name__}: {exc}")
        sys.exit(exc.exit_code)

    if args.json:
        print(json.dumps(rows, indent=2))
        return

    print(f"{'ε':>6} {'seed':>5} {'levels':>7} {'H':>3} {'‖f-g‖₁':>9} {'ratio':>7} {'∫g':>7}")
    for row in rows:
        print(
            f"{row['epsilon']:>6.3f} {row['seed']:>5d} {row['levels']:>7d} {row['H']:>3d} "
            f"{row['l1']:>9.4f} {row['ratio']:>7.3f} {row['integral_g']:>7.4f}"
        )
    ratios = [row["ratio"] for row in rows]
    worst = max(ratios)
    print(f"\n📊 ratio mean {statistics.mean(ratios):.3f}, max {worst:.3f}")
    # Tests apply the 10% allowance themselves
    print(f"✅ Freeze L1_CONSTANT = {worst:.3f}")


if __name__ == "__main__":
    main()
