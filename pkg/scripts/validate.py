"""Analytic vs Monte Carlo comparison for the three model families.

Usage: python scripts/validate.py [output_dir] [--quick]
"""

import json
import sys
from pathlib import Path

from whkernel.cli import main


def run(out: Path, quick: bool) -> int:
    sim = ["--seed", "1", "--replications", "10",
           "--total-time", "1e5" if quick else "1e6"]
    runs = {
        "queue_const_exponential": ["compare", "--model", "queue-const", "--lam", "1",
                                    "--omega", "2", "--service-rate", "2", *sim],
        "queue_const_erlang2": ["compare", "--model", "queue-const", "--lam", "1", "--omega", "2",
                                "--dist", '{"type": "erlang", "k": 2, "mu": 4}', *sim],
        "queue_linear_a1": ["compare", "--model", "queue-linear", "--lam", "1", "--mu", "2",
                            "--a", "1", *sim],
        "insurance_const": ["compare", "--model", "ins-const", "--lam", "1", "--c", "1",
                            "--omega", "2", "--service-rate", "2", "--seed", "1",
                            "--n-paths", "20000" if quick else "200000",
                            "--x-min", "-2", "--x-max", "3", "--step", "0.5"],
    }
    worst = 0
    for name, argv in runs.items():
        code = main(argv + ["--out", str(out / name)])
        verdict = json.loads((out / name / "verdict.json").read_text())
        print(f"{name}: exit {code} l1={verdict['l1_distance']:.3g} "
              f"max_z={verdict['max_z_score']:.2f}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    args = [a for a in sys.argv[1:] if a != "--quick"]
    sys.exit(run(Path(args[0] if args else "validation"), "--quick" in sys.argv))
