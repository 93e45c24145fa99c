"""Reproduce the three example scenes from their configs and summarize localization.

Usage: python3 scripts/run_examples.py [--out out] [--names example1 example2 example3]
"""

import argparse
import time
from pathlib import Path

from bhm.harness import load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="out")
    parser.add_argument("--names", nargs="+", default=["example1", "example2", "example3"])
    args = parser.parse_args()
    for name in args.names:
        cfg = load_config(ROOT / "configs" / f"{name}.cfg")
        t = time.perf_counter()
        report = run_experiment(cfg, Path(args.out) / name)
        ok = sum(c.passed for c in report.checks)
        print(f"{name}: {ok}/{len(report.checks)} localization checks pass ({time.perf_counter() - t:.1f} s)")
        for c in report.checks:
            if not c.passed:
                print(f"  {c.name}: argmax distance {c.value:.2f}, {c.detail}")


if __name__ == "__main__":
    main()
