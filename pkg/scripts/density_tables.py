"""Write plot-ready CSV tables for the constant- and linear-rate examples.

Usage: python scripts/density_tables.py [output_dir]
"""

import sys
from pathlib import Path

from whkernel.cli import main

RUNS = {
    "queue_exponential": ["solve-queue-const", "--lam", "1", "--omega", "2", "--service-rate", "2"],
    "queue_erlang2": ["solve-queue-const", "--lam", "1", "--omega", "2",
                      "--dist", '{"type": "erlang", "k": 2, "mu": 4}'],
    "insurance_exponential": ["solve-ins-const", "--lam", "1", "--omega", "2", "--c", "1",
                              "--service-rate", "2", "--x-min", "0", "--x-max", "5"],
    "linear_a1": ["solve-linear", "--lam", "1", "--mu", "2", "--a", "1"],
    "linear_a4": ["solve-linear", "--lam", "1", "--mu", "2", "--a", "4"],
}


def run(out: Path) -> int:
    worst = 0
    for name, argv in RUNS.items():
        code = main(argv + ["--out", str(out / name)])
        print(f"{name}: exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "tables")))
