"""Command-line entry point: ``bhm simulate | image | reconstruct | validate``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .harness.config import load_config
from .harness.experiment import load_data, run_experiment, run_images, run_simulate
from .harness.validation import validate_suite


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    run_simulate(cfg, cfg.out_dir)
    print(f"data written to {cfg.out_dir}")
    return 0


def _cmd_image(args) -> int:
    cfg = _config(args)
    data = load_data(cfg, args.data or cfg.out_dir)
    report = run_images(cfg, data, cfg.out_dir)
    _summary(report)
    return 0


def _cmd_reconstruct(args) -> int:
    cfg = _config(args)
    report = run_experiment(cfg, cfg.out_dir)
    _summary(report)
    return 0


def _cmd_validate(args) -> int:
    report = validate_suite(args.level, mutation=args.mutate)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.6g} ({c.tolerance}) {c.detail}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "validation.json").write_text(report.to_json(), encoding="utf-8")
    return 0 if report.passed else 1


def _summary(report) -> None:
    ok = sum(c.passed for c in report.checks)
    print(f"{ok}/{len(report.checks)} localization checks pass")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bhm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override noise.seed")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")

    common(sub.add_parser("simulate", help="write clean and noisy data files"))
    p_img = sub.add_parser("image", help="image previously simulated data")
    common(p_img)
    p_img.add_argument("--data", default=None, help="directory holding the data files (default: --out)")
    common(sub.add_parser("reconstruct", help="simulate, image and emit in one go"))
    p_val = sub.add_parser("validate", help="run the acceptance checks")
    p_val.add_argument("--level", choices=("fast", "full"), default="fast")
    p_val.add_argument("--out", default=None, help="write validation.json here")
    p_val.add_argument("--mutate", type=int, default=None, metavar="J",
                       help="negate the prefactor of I_J first (negative control)")
    return parser


COMMANDS = {"simulate": _cmd_simulate, "image": _cmd_image, "reconstruct": _cmd_reconstruct, "validate": _cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        print(f"bhm {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
