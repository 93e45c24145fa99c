"""Run the acceptance checks and write validation.json.

Usage: python3 scripts/validate.py [--level fast|full] [--out out/validation] [--criteria 1 2 ...]
"""

import argparse
from pathlib import Path

from bhm.harness.validation import validate_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--level", choices=("fast", "full"), default="fast")
    parser.add_argument("--out", default="out/validation")
    parser.add_argument("--criteria", type=int, nargs="*", default=None)
    args = parser.parse_args()
    report = validate_suite(args.level, criteria=args.criteria)
    for c in report.checks:
        t = report.timings.get(c.name, float("nan"))
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.6g} ({c.tolerance}) [{t:.1f} s] {c.detail}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "validation.json").write_text(report.to_json(timings=True), encoding="utf-8")


if __name__ == "__main__":
    main()
