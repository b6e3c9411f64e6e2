"""Desk-scale benchmark: 3 Gaussian levels x (PR sweep + classic baselines).

Equivalent to `prf benchmark` with the built-in defaults; kept as a script
so the library entry points stay exercised directly.

Usage: python scripts/run_benchmark.py [outdir]
"""

import sys

from prfilter.bench import default_config, run_benchmark


def main():
    cfg = default_config()
    if len(sys.argv) > 1:
        cfg.out = sys.argv[1]
    print(cfg.describe())
    path = run_benchmark(cfg)
    print(f"report: {path}")
    with open(path.replace("report.csv", "summary.csv")) as fh:
        print(fh.read())


if __name__ == "__main__":
    main()
